#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xosp/core_model.hpp"
#include "xosp/mechanisms.hpp"
#include "xosp/random.hpp"

namespace xosp {

class ArrivalOrder {
 public:
  using Script = std::function<std::vector<int>(const Instance&, const Profile&)>;

  static ArrivalOrder identity();
  static ArrivalOrder fixed(std::vector<int> perm);
  static ArrivalOrder reversed();
  static ArrivalOrder uniform_random();
  // Adversary that sees the realized profile before fixing the order.
  static ArrivalOrder scripted(std::string name, Script script);

  // Validated permutation of all buyers.
  std::vector<int> produce(const Instance& inst, const Profile& profile, Rng& rng) const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { Identity, Fixed, Reversed, Random, Scripted };
  Kind kind_ = Kind::Identity;
  std::string name_ = "fixed";
  std::vector<int> perm_;
  Script script_;
};

// Generic adversaries: buyers sorted by realized grand-bundle value.
std::vector<int> low_value_first(const Instance& inst, const Profile& profile);
std::vector<int> high_value_first(const Instance& inst, const Profile& profile);

struct Benchmark {
  std::string name = "ex-ante";
  double value = 0;
  double std_error = 0;
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  double welfare = 0, revenue = 0, utility = 0;
  std::vector<double> sold;
};

struct RatioEstimate {
  int runs = 0;
  double mean = 0, std_error = 0;
  double revenue = 0, utility = 0;
  Benchmark benchmark;
  double ratio = 0, ratio_std_error = 0;
  std::vector<double> mean_sold;
  // sellout[j][c] = Pr[exactly c copies of item j sold by the end].
  std::vector<std::vector<double>> sellout;
  double worst_certificate = 0;
  long demand_violations = 0;
  std::vector<RunRecord> records;
};

struct EstimateOptions {
  int runs = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  // Buyers whose atoms are enumerated exactly instead of sampled; the order
  // must place them last and must not depend on their atoms.
  std::vector<int> enumerated_buyers;
  bool keep_records = true;
};

RatioEstimate estimate_ratio(const Instance& inst, const Mechanism& mech, const ArrivalOrder& order,
                             const Benchmark& benchmark, const EstimateOptions& opts);

// Per-run CSV followed by a one-line summary.
std::string to_csv(const RatioEstimate& est);

}  // namespace xosp
