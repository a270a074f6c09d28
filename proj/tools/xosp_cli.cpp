// Command-line front end: ex-ante LP, hindsight optimum, simulation, hard
// instance generation, ratio tables and the invariant self-check.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "xosp/checks.hpp"
#include "xosp/ex_ante.hpp"
#include "xosp/hard_instances.hpp"
#include "xosp/instance_io.hpp"
#include "xosp/mechanisms.hpp"
#include "xosp/ratio_calc.hpp"
#include "xosp/simulation.hpp"

using namespace xosp;

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file_atomic(path, content);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw UsageError("bad number in list: '" + tok + "'");
    }
  }
  return out;
}

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---- ea-opt --------------------------------------------------------------

struct EaOptArgs {
  std::string instance, output;
};

void run_ea_opt(const EaOptArgs& a) {
  const Instance inst = read_plain_instance(a.instance);
  const ExAnteSolution sol = solve_ex_ante(inst);
  std::string out = "objective," + num(sol.objective) + "\n";
  out += "item,supply,item_welfare,mass\n";
  for (int j = 0; j < inst.num_items(); ++j)
    out += std::to_string(j) + "," + std::to_string(inst.supply()[j]) + "," + num(sol.item_welfare[j]) + "," +
           num(sol.item_mass(j)) + "\n";
  out += "buyer";
  for (int j = 0; j < inst.num_items(); ++j) out += ",z_" + std::to_string(j);
  out += "\n";
  for (int i = 0; i < inst.num_buyers(); ++i) {
    out += std::to_string(i);
    for (int j = 0; j < inst.num_items(); ++j) out += "," + num(sol.z[i][j]);
    out += "\n";
  }
  emit(a.output, out);
}

// ---- hopt ----------------------------------------------------------------

struct HoptArgs {
  std::string instance, output, profile;
  int samples = 0;
  std::optional<std::uint64_t> seed;
};

void run_hopt(const HoptArgs& a) {
  const Instance inst = read_plain_instance(a.instance);
  std::string out;
  if (!a.profile.empty()) {
    Profile p;
    for (double v : parse_list(a.profile)) p.push_back(static_cast<int>(v));
    if (static_cast<int>(p.size()) != inst.num_buyers()) throw UsageError("profile needs one atom index per buyer");
    for (int i = 0; i < inst.num_buyers(); ++i)
      if (p[i] < 0 || p[i] >= inst.buyer(i).num_atoms()) throw UsageError("atom index out of range");
    bool unit = true;
    for (int i = 0; i < inst.num_buyers(); ++i) unit = unit && inst.buyer(i).atom(p[i]).valuation.is_unit_demand();
    const HindsightResult h = unit ? hindsight_opt_unit_demand(inst, p) : hindsight_opt(inst, p);
    out = "welfare," + num(h.welfare) + "\nbuyer,bundle\n";
    for (int i = 0; i < inst.num_buyers(); ++i) out += std::to_string(i) + ",\"" + format_set(h.allocation[i]) + "\"\n";
  } else {
    if (!a.seed) throw UsageError("--seed is required when sampling profiles");
    if (a.samples < 1) throw UsageError("--samples must be positive");
    ProphetOptions po;
    po.samples = a.samples;
    po.seed = *a.seed;
    const ProphetEstimate e = prophet_benchmark(inst, po);
    out = "mean,stderr,samples\n" + num(e.mean) + "," + num(e.std_error) + "," + std::to_string(e.samples) + "\n";
  }
  emit(a.output, out);
}

// ---- simulate ------------------------------------------------------------

struct SimArgs {
  std::string instance, output, mechanism = "supply", orders = "fixed", benchmark = "auto", prices;
  int runs = 1000, threads = default_threads(), prophet_samples = 500;
  std::optional<std::uint64_t> seed;
  double C = 2.0, gamma = 0.0;
  bool no_exact_tail = false;
};

std::vector<int> large_buyers(const FamilyMeta& f, const Instance& inst) {
  if (f.name == "single-hard") return {f.n};
  if (f.name == "two-item") return {f.n, f.n + 1};
  if (f.name == "supply-tight" && inst.num_buyers() > 0 &&
      inst.buyer(inst.num_buyers() - 1).num_atoms() > 1)
    return {inst.num_buyers() - 1};
  return {};
}

void run_simulate(const SimArgs& a) {
  if (!a.seed) throw UsageError("--seed is required");
  if (a.runs < 1) throw UsageError("--runs must be positive");
  InstanceFile file = read_instance_file(a.instance);
  Instance inst;
  if (std::holds_alternative<MultiUnitInstance>(file.data))
    inst = multi_unit_reduce(std::get<MultiUnitInstance>(file.data)).instance;
  else
    inst = std::get<Instance>(file.data);

  std::optional<ExAnteSolution> sol;
  auto need_sol = [&]() -> const ExAnteSolution& {
    if (!sol) sol = solve_ex_ante(inst);
    return *sol;
  };
  std::unique_ptr<Mechanism> mech;
  std::vector<double> static_prices;
  if (a.mechanism == "supply") {
    mech = std::make_unique<SupplyBasedPricing>(PriceSchedule::from_welfare(inst.supply(), need_sol().item_welfare));
  } else if (a.mechanism == "static") {
    static_prices = parse_list(a.prices);
    if (static_cast<int>(static_prices.size()) != inst.num_items()) throw UsageError("--prices needs one price per item");
    mech = std::make_unique<SupplyBasedPricing>(PriceSchedule::static_prices(inst.supply(), static_prices));
  } else if (a.mechanism == "ladder") {
    // Per-copy prices of a single-item instance; defaults to the stored ladder.
    std::vector<double> ladder = a.prices.empty() && file.family ? file.family->prices : parse_list(a.prices);
    if (inst.num_items() != 1 || static_cast<int>(ladder.size()) != inst.supply()[0])
      throw UsageError("--mechanism ladder needs one item and one price per copy");
    mech = std::make_unique<SupplyBasedPricing>(PriceSchedule::from_ladders(inst.supply(), {ladder}));
  } else if (a.mechanism == "dynamic") {
    mech = std::make_unique<DynamicPricing>(inst, need_sol(), a.C);
  } else if (a.mechanism == "magician") {
    mech = std::make_unique<MagicianReduction>(inst, need_sol(), a.gamma);
  } else {
    throw UsageError("unknown mechanism " + a.mechanism);
  }

  ArrivalOrder order;
  bool tail_last = false;
  if (a.orders == "fixed") {
    order = ArrivalOrder::identity();
    tail_last = true;
  } else if (a.orders == "reversed") {
    order = ArrivalOrder::reversed();
  } else if (a.orders == "random") {
    order = ArrivalOrder::uniform_random();
  } else if (a.orders == "adversarial") {
    if (file.family && file.family->name == "two-item") {
      TwoItemHardParams p{file.family->k, file.family->n, file.family->eps, file.family->U, file.family->grid};
      const RunState st0 = mech->start(inst);
      const std::vector<double> pr = mech->offered_prices(st0);
      order = ArrivalOrder::scripted("adversarial", [p, pr](const Instance& in, const Profile& prof) {
        return two_item_adversarial_order(in, p, pr, prof);
      });
      tail_last = true;
    } else if (file.family) {
      // The generated single-item families are already in adversarial order.
      order = ArrivalOrder::identity();
      tail_last = true;
    } else {
      order = ArrivalOrder::scripted("adversarial", low_value_first);
    }
  } else {
    throw UsageError("unknown order " + a.orders);
  }

  Benchmark bench;
  std::string which = a.benchmark;
  if (which == "auto") which = a.mechanism == "static" ? "prophet" : "ex-ante";
  std::vector<int> tail = file.family ? large_buyers(*file.family, inst) : std::vector<int>{};
  if (which == "ex-ante") {
    bench = {"ex-ante", need_sol().objective, 0.0};
  } else if (which == "prophet") {
    ProphetOptions po;
    po.samples = a.prophet_samples;
    po.seed = derive_seed(*a.seed, 0xb0b);
    po.enumerated_buyers = tail;
    const ProphetEstimate pe = prophet_benchmark(inst, po);
    bench = {"prophet", pe.mean, pe.std_error};
  } else {
    throw UsageError("unknown benchmark " + which);
  }

  EstimateOptions eo;
  eo.runs = a.runs;
  eo.seed = *a.seed;
  eo.threads = a.threads;
  if (tail_last && !a.no_exact_tail) eo.enumerated_buyers = tail;
  const RatioEstimate est = estimate_ratio(inst, *mech, order, bench, eo);
  emit(a.output, to_csv(est));
}

// ---- make-instance -------------------------------------------------------

struct MakeArgs {
  std::string family, output, prices;
  int k = 2, n = 100, grid = 64;
  double eps = 1e-3, delta = 0;
  std::optional<double> U;
};

void run_make(const MakeArgs& a) {
  FamilyMeta meta{a.family, a.k, a.n, a.grid, a.eps, a.U.value_or(0.0)};
  std::optional<std::string> warn;
  Instance inst;
  if (a.family == "single-hard") {
    if (!a.U) meta.U = large_scale(single_item_minimax_alpha(a.k), a.k);
    inst = make_single_item_hard({a.k, a.n, a.eps, meta.U, a.grid});
  } else if (a.family == "two-item") {
    if (!a.U) meta.U = large_scale(two_item_minimax_alpha(a.k), a.k);
    TwoItemHardParams p{a.k, a.n, a.eps, meta.U, a.grid};
    warn = p.warning();
    inst = make_two_item_hard(p);
  } else if (a.family == "supply-tight") {
    std::vector<double> ladder;
    if (a.prices.empty())
      for (int c = 1; c <= a.k; ++c) ladder.push_back(ladder_fraction(a.k, c) * 2.0 * a.k);
    else
      ladder = parse_list(a.prices);
    const double delta = a.delta > 0 ? a.delta : a.eps / 10;
    SupplyTightInstance st = make_supply_tight(a.k, ladder, a.eps, delta);
    meta.prices = ladder;
    meta.n = st.instance.num_buyers();
    inst = std::move(st.instance);
  } else {
    throw UsageError("unknown family " + a.family);
  }
  if (warn) std::cerr << "warning: " << *warn << "\n";
  emit(a.output, serialize(inst, meta));
}

// ---- ratio ---------------------------------------------------------------

struct RatioArgs {
  int k_min = 2, k_max = 11;
  std::string format = "csv", output;
};

void run_ratio(const RatioArgs& a) {
  if (a.k_min < 1 || a.k_max < a.k_min) throw UsageError("need 1 <= k-min <= k-max");
  if (a.format != "csv" && a.format != "table") throw UsageError("format must be csv or table");
  std::string out;
  char buf[256];
  if (a.format == "csv")
    out = "k,lambda_star,tau,lambda_hat_star,lambda_hat_prime,tau_hat\n";
  else
    out = "   k   lambda*      tau   lambda^*   lambda^'    tau^\n";
  for (int k = a.k_min; k <= a.k_max; ++k) {
    const RatioReport r = compute_ratios(k);
    if (a.format == "csv")
      std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.10f,%.10f,%.10f\n", k, r.lambda_star, r.tau, r.lambda_hat_star,
                    r.lambda_hat_prime, r.tau_hat);
    else
      std::snprintf(buf, sizeof buf, "%4d %9.5f %8.4f %10.5f %10.5f %8.4f\n", k, r.lambda_star, r.tau,
                    r.lambda_hat_star, r.lambda_hat_prime, r.tau_hat);
    out += buf;
  }
  emit(a.output, out);
}

// ---- check ---------------------------------------------------------------

int run_check(std::uint64_t seed) {
  bool ok = true;
  for (const CheckResult& c : run_invariant_checks(seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : kNumericError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posted-price mechanisms for XOS buyers with multi-unit supply"};
  app.require_subcommand(1);

  EaOptArgs ea;
  auto* c_ea = app.add_subcommand("ea-opt", "Solve the ex-ante relaxation");
  c_ea->add_option("--instance", ea.instance, "Instance JSON")->required();
  c_ea->add_option("--output", ea.output, "Output file (default stdout)");

  HoptArgs ho;
  std::uint64_t ho_seed = 0;
  auto* c_ho = app.add_subcommand("hopt", "Hindsight optimum for a profile, or its expectation");
  c_ho->add_option("--instance", ho.instance, "Instance JSON")->required();
  c_ho->add_option("--profile", ho.profile, "Comma-separated atom index per buyer");
  c_ho->add_option("--samples", ho.samples, "Profiles to sample");
  auto* o_ho_seed = c_ho->add_option("--seed", ho_seed, "RNG seed");
  c_ho->add_option("--output", ho.output, "Output file");

  SimArgs sim;
  std::uint64_t sim_seed = 0;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo welfare of a mechanism");
  c_sim->add_option("--instance", sim.instance, "Instance JSON")->required();
  c_sim->add_option("--mechanism", sim.mechanism, "supply | static | ladder | dynamic | magician")
      ->check(CLI::IsMember({"supply", "static", "ladder", "dynamic", "magician"}));
  c_sim->add_option("--orders", sim.orders, "fixed | reversed | random | adversarial")
      ->check(CLI::IsMember({"fixed", "reversed", "random", "adversarial"}));
  c_sim->add_option("--runs", sim.runs, "Replications");
  auto* o_sim_seed = c_sim->add_option("--seed", sim_seed, "RNG seed")->required();
  c_sim->add_option("--threads", sim.threads, "Worker threads");
  c_sim->add_option("--C", sim.C, "Dynamic-pricing scaling constant");
  c_sim->add_option("--gamma", sim.gamma, "Magician gamma override (0 = default per item)");
  c_sim->add_option("--prices", sim.prices, "Static prices per item, or the copy ladder, comma-separated");
  c_sim->add_option("--benchmark", sim.benchmark, "auto | ex-ante | prophet");
  c_sim->add_option("--prophet-samples", sim.prophet_samples, "Profiles for the prophet benchmark");
  c_sim->add_flag("--no-exact-tail", sim.no_exact_tail, "Sample large buyers instead of enumerating them");
  c_sim->add_option("--output", sim.output, "Output file");

  MakeArgs mk;
  auto* c_mk = app.add_subcommand("make-instance", "Generate a hard-instance family member");
  c_mk->add_option("--family", mk.family, "single-hard | two-item | supply-tight")
      ->required()
      ->check(CLI::IsMember({"single-hard", "two-item", "supply-tight"}));
  c_mk->add_option("--k", mk.k, "Copies per item");
  c_mk->add_option("--n", mk.n, "Small buyers");
  c_mk->add_option("--eps", mk.eps, "Epsilon");
  c_mk->add_option("--U", mk.U, "Large-buyer scale (default: minimax choice)");
  c_mk->add_option("--grid", mk.grid, "Atoms per small buyer");
  c_mk->add_option("--prices", mk.prices, "Ladder for supply-tight, comma-separated");
  c_mk->add_option("--delta", mk.delta, "Offset for supply-tight (default eps/10)");
  c_mk->add_option("--output", mk.output, "Output file");

  RatioArgs ra;
  auto* c_ra = app.add_subcommand("ratio", "Tabulate the single- and two-item ratios");
  c_ra->add_option("--k-min", ra.k_min, "Smallest k");
  c_ra->add_option("--k-max", ra.k_max, "Largest k");
  c_ra->add_option("--format", ra.format, "csv | table");
  c_ra->add_option("--output", ra.output, "Output file");

  std::uint64_t check_seed = 20261014;
  auto* c_ck = app.add_subcommand("check", "Run the invariant self-check");
  c_ck->add_option("--seed", check_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*c_ea) run_ea_opt(ea);
    if (*c_ho) {
      if (*o_ho_seed) ho.seed = ho_seed;
      run_hopt(ho);
    }
    if (*c_sim) {
      if (*o_sim_seed) sim.seed = sim_seed;
      run_simulate(sim);
    }
    if (*c_mk) run_make(mk);
    if (*c_ra) run_ratio(ra);
    if (*c_ck) return run_check(check_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const CapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return 0;
}
