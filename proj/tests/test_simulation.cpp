#include <doctest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "xosp/simulation.hpp"

using namespace xosp;

namespace {

EstimateOptions opts(int runs, std::uint64_t seed, int threads = 1) {
  EstimateOptions o;
  o.runs = runs;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("orders are validated permutations") {
  Rng rng(1);
  const Instance inst = test::random_instance(rng, 4, 1, 2, 2);
  const Profile prof(4, 0);
  CHECK(ArrivalOrder::identity().produce(inst, prof, rng) == std::vector<int>{0, 1, 2, 3});
  CHECK(ArrivalOrder::reversed().produce(inst, prof, rng) == std::vector<int>{3, 2, 1, 0});
  CHECK(ArrivalOrder::fixed({2, 0, 3, 1}).produce(inst, prof, rng) == std::vector<int>{2, 0, 3, 1});
  CHECK_THROWS(ArrivalOrder::fixed({0, 0, 1, 2}).produce(inst, prof, rng));
  CHECK_THROWS(ArrivalOrder::scripted("bad", [](const Instance&, const Profile&) { return std::vector<int>{0, 1}; })
                   .produce(inst, prof, rng));
  std::vector<int> r = ArrivalOrder::uniform_random().produce(inst, prof, rng);
  std::sort(r.begin(), r.end());
  CHECK(r == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("value-sorted adversaries") {
  std::vector<ValueDistribution> d;
  for (double v : {3.0, 1.0, 2.0}) d.emplace_back(std::vector<Atom>{{XOSValuation(1, {{v}}), 1.0}});
  const Instance inst(SupplyVector({1}), d);
  CHECK(low_value_first(inst, {0, 0, 0}) == std::vector<int>{1, 2, 0});
  CHECK(high_value_first(inst, {0, 0, 0}) == std::vector<int>{0, 2, 1});
}

TEST_CASE("empty market") {
  const Instance inst(SupplyVector({2}), std::vector<ValueDistribution>{});
  const SupplyBasedPricing mech(PriceSchedule::static_prices(inst.supply(), {1.0}));
  const RatioEstimate est = estimate_ratio(inst, mech, ArrivalOrder::identity(), {"ex-ante", 0, 0}, opts(10, 1));
  CHECK(est.mean == 0);
  CHECK(std::isnan(est.ratio));
}

TEST_CASE("same seed gives identical output regardless of threads") {
  Rng rng(4);
  const Instance inst = test::random_instance(rng, 5, 3, 3, 3);
  const ExAnteSolution sol = solve_ex_ante(inst);
  const SupplyBasedPricing mech(PriceSchedule::from_welfare(inst.supply(), sol.item_welfare));
  const Benchmark b{"ex-ante", sol.objective, 0};
  const std::string a = to_csv(estimate_ratio(inst, mech, ArrivalOrder::uniform_random(), b, opts(300, 42, 1)));
  const std::string c = to_csv(estimate_ratio(inst, mech, ArrivalOrder::uniform_random(), b, opts(300, 42, 4)));
  CHECK(a == c);
  const std::string d = to_csv(estimate_ratio(inst, mech, ArrivalOrder::uniform_random(), b, opts(300, 43, 1)));
  CHECK(a != d);
  std::istringstream in(a);
  std::string header;
  std::getline(in, header);
  CHECK(header == "run,seed,welfare,revenue,utility,sold_0,sold_1,sold_2");
  CHECK(a.find("\nmean,stderr,benchmark,ratio,ratio_stderr\n") != std::string::npos);
}

TEST_CASE("estimate bookkeeping") {
  Rng rng(9);
  const Instance inst = test::random_instance(rng, 4, 2, 2, 3);
  const ExAnteSolution sol = solve_ex_ante(inst);
  const SupplyBasedPricing mech(PriceSchedule::from_welfare(inst.supply(), sol.item_welfare));
  const RatioEstimate est =
      estimate_ratio(inst, mech, ArrivalOrder::reversed(), {"ex-ante", sol.objective, 0}, opts(500, 3));
  CHECK(est.mean == doctest::Approx(est.revenue + est.utility));
  CHECK(est.ratio == doctest::Approx(est.mean / sol.objective));
  CHECK(est.records.size() == 500);
  for (int j = 0; j < 2; ++j) {
    double total = 0, mean = 0;
    for (size_t c = 0; c < est.sellout[j].size(); ++c) {
      total += est.sellout[j][c];
      mean += c * est.sellout[j][c];
    }
    CHECK(total == doctest::Approx(1));
    CHECK(mean == doctest::Approx(est.mean_sold[j]));
  }
  RatioEstimate one = estimate_ratio(inst, mech, ArrivalOrder::reversed(), {"ex-ante", 1, 0}, opts(1, 3));
  CHECK(one.std_error == 0);
}

TEST_CASE("enumerating late buyers is unbiased") {
  std::vector<ValueDistribution> d;
  for (int i = 0; i < 3; ++i)
    d.emplace_back(std::vector<Atom>{{XOSValuation(1, {{1.0 + i}}), 0.6}, {XOSValuation(1, {{0.5}}), 0.4}});
  d.emplace_back(std::vector<Atom>{{XOSValuation(1, {{100.0}}), 0.01}, {XOSValuation(1, {{0.0}}), 0.99}});
  const Instance inst(SupplyVector({2}), d);
  const SupplyBasedPricing mech(PriceSchedule::static_prices(inst.supply(), {0.8}));
  EstimateOptions sampled = opts(100000, 5);
  sampled.keep_records = false;
  EstimateOptions exact = opts(20000, 6);
  exact.enumerated_buyers = {3};
  const RatioEstimate a = estimate_ratio(inst, mech, ArrivalOrder::identity(), {"x", 1, 0}, sampled);
  const RatioEstimate b = estimate_ratio(inst, mech, ArrivalOrder::identity(), {"x", 1, 0}, exact);
  CHECK(std::abs(a.mean - b.mean) <= 4 * std::hypot(a.std_error, b.std_error));
  CHECK(b.std_error < a.std_error);
  EstimateOptions bad = opts(10, 1);
  bad.enumerated_buyers = {0};
  CHECK_THROWS(estimate_ratio(inst, mech, ArrivalOrder::identity(), {"x", 1, 0}, bad));
}

TEST_CASE("supply-based pricing meets its guarantee on small random instances") {
  Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    const Instance inst = test::random_instance(rng, 5, 3, 4, 3);
    const ExAnteSolution sol = solve_ex_ante(inst);
    const SupplyBasedPricing mech(PriceSchedule::from_welfare(inst.supply(), sol.item_welfare));
    const RatioEstimate est = estimate_ratio(inst, mech, ArrivalOrder::scripted("low", low_value_first),
                                             {"ex-ante", sol.objective, 0}, opts(2000, 100 + t));
    CHECK(est.mean >= supply_bound(inst.supply().min_supply()) * sol.objective - 3 * est.std_error);
  }
}
