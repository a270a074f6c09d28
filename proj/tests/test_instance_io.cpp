#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "test_support.hpp"
#include "xosp/instance_io.hpp"

using namespace xosp;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_instance_text(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("plain instance round trip") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Instance inst = test::random_instance(rng, 4, 3, 4, 3);
    const std::string text = serialize(inst);
    const InstanceFile f = parse_instance_text(text);
    REQUIRE(std::holds_alternative<Instance>(f.data));
    const Instance& back = std::get<Instance>(f.data);
    CHECK(back.supply().counts() == inst.supply().counts());
    REQUIRE(back.num_buyers() == inst.num_buyers());
    for (int i = 0; i < inst.num_buyers(); ++i) {
      REQUIRE(back.buyer(i).num_atoms() == inst.buyer(i).num_atoms());
      for (int a = 0; a < inst.buyer(i).num_atoms(); ++a) {
        CHECK(std::abs(back.buyer(i).atom(a).prob - inst.buyer(i).atom(a).prob) <= 1e-15);
        for (ItemSet s = 0; s < 8; ++s)
          CHECK(back.buyer(i).atom(a).valuation.value(s) == inst.buyer(i).atom(a).valuation.value(s));
      }
    }
    const std::string again = serialize(back);
    CHECK(serialize(std::get<Instance>(parse_instance_text(again).data)).size() == again.size());
  }
}

TEST_CASE("family metadata round trip") {
  const XOSValuation v(1, {{1}});
  const Instance inst(SupplyVector({2}), std::vector<ValueDistribution>{ValueDistribution({{v, 1.0}})});
  const FamilyMeta meta{"supply-tight", 2, 1, 0, 1e-3, 0, {0.5, 1.5}};
  const InstanceFile f = parse_instance_text(serialize(inst, meta));
  REQUIRE(f.family);
  CHECK(f.family->name == "supply-tight");
  CHECK(f.family->prices == std::vector<double>{0.5, 1.5});
  CHECK(f.family->eps == 1e-3);
}

TEST_CASE("multi-unit files") {
  const std::string text =
      R"({"supply":[4,3],"demand_cap":2,"buyers":[{"atoms":[{"prob":1,"clauses":[[[2,1],[1]]]}]}]})";
  const InstanceFile f = parse_instance_text(text);
  REQUIRE(std::holds_alternative<MultiUnitInstance>(f.data));
  const MultiUnitInstance& mi = std::get<MultiUnitInstance>(f.data);
  CHECK(mi.demand_cap == 2);
  CHECK(mi.buyers[0][0].valuation.value({2, 1}) == doctest::Approx(4));
  CHECK(parse_instance_text(serialize(mi)).data.index() == 1);
  CHECK(error_of(R"({"supply":[4],"buyers":[{"atoms":[{"prob":1,"clauses":[[[2,1]]]}]}]})").find("demand_cap") !=
        std::string::npos);
}

TEST_CASE("diagnostics name the offending field") {
  CHECK(error_of("{\"supply\": [1],\n \"buyers\": [}").find("line 2") != std::string::npos);
  CHECK(error_of(R"({"buyers":[]})").find("$.supply") != std::string::npos);
  CHECK(error_of(R"({"supply":[1, -2],"buyers":[]})").find("$.supply[1]") != std::string::npos);
  CHECK(error_of(R"({"supply":[1],"buyers":[{"atoms":[{"prob":0.5,"clauses":[[1]]},{"prob":0.4,"clauses":[[1]]}]}]})")
            .find("$.buyers[0].atoms") != std::string::npos);
  CHECK(error_of(R"({"supply":[1],"buyers":[{"atoms":[{"prob":1,"clauses":[[1,2]]}]}]})")
            .find("$.buyers[0].atoms[0].clauses[0]") != std::string::npos);
  CHECK(error_of(R"({"supply":[1],"buyers":[{"atoms":[{"prob":1,"clauses":[[-1]]}]}]})")
            .find("$.buyers[0].atoms[0].clauses[0][0]") != std::string::npos);
  CHECK(error_of(R"({"supply":[1],"buyers":[{"atoms":[{"prob":"x","clauses":[[1]]}]}]})")
            .find("$.buyers[0].atoms[0].prob") != std::string::npos);
  CHECK(error_of(R"({"supply":[1],"buyers":[{"atoms":[{"prob":0.5,"clauses":[[1]]},{"prob":0.5000000005,"clauses":[[1]]}]}]})")
            .empty());
}

TEST_CASE("atomic writes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "xosp_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "out.json").string();
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  CHECK(read_text(path) == "second\n");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 1);
  CHECK_THROWS_AS(read_text((dir / "missing.json").string()), ParseError);
  CHECK_THROWS(write_file_atomic((dir / "no/such/dir/x").string(), "x"));
  fs::remove_all(dir);
}
