#include "xosp/instance_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

namespace xosp {

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError(field + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

void check_probabilities(const json& atoms, const std::string& path) {
  double total = 0;
  for (size_t a = 0; a < atoms.size(); ++a) {
    const std::string p = path + ".atoms[" + std::to_string(a) + "].prob";
    const double pr = number(need(atoms[a], "prob", path + ".atoms[" + std::to_string(a) + "]"), p);
    if (!(pr > 0)) fail(p, "probability must be positive");
    total += pr;
  }
  if (std::abs(total - 1.0) > ValueDistribution::kSumTolerance)
    fail(path + ".atoms", "probabilities sum to " + std::to_string(total) + ", not 1 within 1e-9");
}

bool clauses_nested(const json& buyers) {
  for (const auto& b : buyers)
    if (b.is_object() && b.contains("atoms"))
      for (const auto& at : b["atoms"])
        if (at.is_object() && at.contains("clauses"))
          for (const auto& cl : at["clauses"])
            if (cl.is_array())
              for (const auto& e : cl) return e.is_array();
  return false;
}

}  // namespace

InstanceFile parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) fail("$", "expected an object");
  const json& sj = need(doc, "supply", "$");
  if (!sj.is_array()) fail("$.supply", "expected an array");
  std::vector<int> supply;
  for (size_t j = 0; j < sj.size(); ++j) {
    const int k = integer(sj[j], "$.supply[" + std::to_string(j) + "]");
    if (k < 0) fail("$.supply[" + std::to_string(j) + "]", "supply must be nonnegative");
    supply.push_back(k);
  }
  const int m = static_cast<int>(supply.size());
  const json& bj = need(doc, "buyers", "$");
  if (!bj.is_array()) fail("$.buyers", "expected an array");

  InstanceFile out;
  if (doc.contains("family")) {
    const json& f = doc["family"];
    FamilyMeta fm;
    fm.name = need(f, "name", "$.family").get<std::string>();
    fm.k = integer(need(f, "k", "$.family"), "$.family.k");
    fm.n = integer(need(f, "n", "$.family"), "$.family.n");
    fm.grid = f.contains("grid") ? integer(f["grid"], "$.family.grid") : 0;
    fm.eps = number(need(f, "eps", "$.family"), "$.family.eps");
    fm.U = f.contains("U") ? number(f["U"], "$.family.U") : 0.0;
    if (f.contains("prices"))
      for (size_t c = 0; c < f["prices"].size(); ++c)
        fm.prices.push_back(number(f["prices"][c], "$.family.prices[" + std::to_string(c) + "]"));
    out.family = fm;
  }

  const bool nested = clauses_nested(bj);
  std::optional<int> cap;
  if (doc.contains("demand_cap")) {
    cap = integer(doc["demand_cap"], "$.demand_cap");
    if (*cap < 1) fail("$.demand_cap", "must be at least 1");
  }
  if (nested && !cap) fail("$.demand_cap", "required for per-item weight lists");

  try {
    if (nested) {
      MultiUnitInstance mi;
      mi.supply = supply;
      mi.demand_cap = *cap;
      for (size_t i = 0; i < bj.size(); ++i) {
        const std::string bp = "$.buyers[" + std::to_string(i) + "]";
        const json& atoms = need(bj[i], "atoms", bp);
        if (!atoms.is_array() || atoms.empty()) fail(bp + ".atoms", "expected a nonempty array");
        check_probabilities(atoms, bp);
        std::vector<MultiUnitAtom> mats;
        for (size_t a = 0; a < atoms.size(); ++a) {
          const std::string ap = bp + ".atoms[" + std::to_string(a) + "]";
          MultiUnitAtom mat;
          mat.prob = atoms[a]["prob"].get<double>();
          const json& cls = need(atoms[a], "clauses", ap);
          for (size_t c = 0; c < cls.size(); ++c) {
            const std::string cp = ap + ".clauses[" + std::to_string(c) + "]";
            if (!cls[c].is_array() || static_cast<int>(cls[c].size()) != m) fail(cp, "expected one list per item");
            std::vector<std::vector<double>> cl;
            for (size_t j = 0; j < cls[c].size(); ++j) {
              if (!cls[c][j].is_array()) fail(cp + "[" + std::to_string(j) + "]", "expected a weight list");
              std::vector<double> w;
              for (size_t t = 0; t < cls[c][j].size(); ++t)
                w.push_back(number(cls[c][j][t], cp + "[" + std::to_string(j) + "][" + std::to_string(t) + "]"));
              cl.push_back(std::move(w));
            }
            mat.valuation.clauses.push_back(std::move(cl));
          }
          mats.push_back(std::move(mat));
        }
        mi.buyers.push_back(std::move(mats));
      }
      mi.validate();
      out.data = std::move(mi);
      return out;
    }

    std::vector<ValueDistribution> buyers;
    for (size_t i = 0; i < bj.size(); ++i) {
      const std::string bp = "$.buyers[" + std::to_string(i) + "]";
      const json& atoms = need(bj[i], "atoms", bp);
      if (!atoms.is_array() || atoms.empty()) fail(bp + ".atoms", "expected a nonempty array");
      check_probabilities(atoms, bp);
      std::vector<Atom> list;
      for (size_t a = 0; a < atoms.size(); ++a) {
        const std::string ap = bp + ".atoms[" + std::to_string(a) + "]";
        const json& cls = need(atoms[a], "clauses", ap);
        if (!cls.is_array() || cls.empty()) fail(ap + ".clauses", "expected a nonempty array");
        std::vector<std::vector<double>> clauses;
        for (size_t c = 0; c < cls.size(); ++c) {
          const std::string cp = ap + ".clauses[" + std::to_string(c) + "]";
          if (!cls[c].is_array() || static_cast<int>(cls[c].size()) != m)
            fail(cp, "expected " + std::to_string(m) + " coefficients");
          std::vector<double> row;
          for (size_t j = 0; j < cls[c].size(); ++j) {
            const double v = number(cls[c][j], cp + "[" + std::to_string(j) + "]");
            if (v < 0) fail(cp + "[" + std::to_string(j) + "]", "coefficients must be nonnegative");
            row.push_back(v);
          }
          clauses.push_back(std::move(row));
        }
        list.push_back({XOSValuation(m, std::move(clauses)), atoms[a]["prob"].get<double>()});
      }
      buyers.emplace_back(std::move(list));
    }
    out.data = Instance(SupplyVector(supply), std::move(buyers), cap);
  } catch (const ModelError& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

InstanceFile read_instance_file(const std::string& path) { return parse_instance_text(read_text(path)); }

Instance read_plain_instance(const std::string& path) {
  InstanceFile f = read_instance_file(path);
  if (!std::holds_alternative<Instance>(f.data)) throw ParseError(path + ": multi-unit instance where a plain one was expected");
  return std::get<Instance>(std::move(f.data));
}

std::string serialize(const Instance& inst, const std::optional<FamilyMeta>& family) {
  json doc;
  doc["supply"] = inst.supply().counts();
  json buyers = json::array();
  for (int i = 0; i < inst.num_buyers(); ++i) {
    json atoms = json::array();
    for (const Atom& at : inst.buyer(i).atoms()) {
      json cls = json::array();
      for (int a = 0; a < at.valuation.num_clauses(); ++a) cls.push_back(at.valuation.clause_vector(a));
      atoms.push_back({{"prob", at.prob}, {"clauses", cls}});
    }
    buyers.push_back({{"atoms", atoms}});
  }
  doc["buyers"] = buyers;
  if (inst.demand_cap()) doc["demand_cap"] = *inst.demand_cap();
  if (family) {
    doc["family"] = {{"name", family->name}, {"k", family->k},   {"n", family->n},
                     {"grid", family->grid}, {"eps", family->eps}, {"U", family->U}};
    if (!family->prices.empty()) doc["family"]["prices"] = family->prices;
  }
  return doc.dump() + "\n";
}

std::string serialize(const MultiUnitInstance& mi) {
  json doc;
  doc["supply"] = mi.supply;
  doc["demand_cap"] = mi.demand_cap;
  json buyers = json::array();
  for (const auto& b : mi.buyers) {
    json atoms = json::array();
    for (const auto& at : b) atoms.push_back({{"prob", at.prob}, {"clauses", at.valuation.clauses}});
    buyers.push_back({{"atoms", atoms}});
  }
  doc["buyers"] = buyers;
  return doc.dump() + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into " + path + ": " + ec.message());
  }
}

}  // namespace xosp
