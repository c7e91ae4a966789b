#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cmabsm/action.hpp"
#include "cmabsm/core.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/ucb.hpp"

namespace cmabsm {

enum class AlgoSelection { kCmabSm, kUcb, kBoth };
enum class Algo { kCmabSm, kUcb };

std::string_view to_string(Algo algo) noexcept;

struct EvenlySpaced {
  double lo;
  double hi;
};

// Either a grid lo + (hi - lo) i / (N - 1) or N explicit parameters.
using ParamSpec = std::variant<EvenlySpaced, std::vector<double>>;

struct ExperimentConfig {
  std::size_t n_arms = 0;
  std::size_t slate_size = 0;
  std::uint64_t horizon = 0;
  std::size_t reps = 30;
  AlgoSelection algo = AlgoSelection::kBoth;
  Family dist = Family::kBernoulli;
  RewardFunction reward_fn = RewardFunction::kNormalizedSum;
  double lipschitz_u = 1.0;
  std::uint64_t master_seed = 0;
  std::uint64_t checkpoint_interval = 20000;
  std::optional<ParamSpec> params;  // unset: family default grid
  std::string out_path = "regret.csv";
  std::uint64_t enum_cap = kDefaultEnumerationCap;
  PullTargetFormula nr_formula = PullTargetFormula::kTwoLogTNK;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// (0.05, 0.95) for Bernoulli, (1, 9) for the transformed exponential.
ParamSpec default_params(Family dist);
ParamSpec effective_params(const ExperimentConfig& cfg);

// Applies one `key = value` setting. Keys are the long flag names without
// dashes (n, k, t, reps, algo, dist, reward-fn, u, seed, checkpoint-interval,
// out, enum-cap, nr-formula, params, threads); underscores are accepted in
// place of dashes. Throws ParseError naming `where` on bad keys or values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   std::string_view where);

// Parses a flat `key = value` file body ('#' starts a comment).
ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   ExperimentConfig base = {});

// Throws ValidationError naming the violated invariant.
void validate(const ExperimentConfig& cfg);

// File values first, then overrides in order, then validation.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

std::string describe(const ExperimentConfig& cfg);

// Seed for the environment's parameter shuffle.
std::uint64_t environment_seed(std::uint64_t master_seed) noexcept;
// Seed for one (algorithm, repetition) run.
std::uint64_t repetition_seed(std::uint64_t master_seed, Algo algo, std::size_t rep) noexcept;

// Grid or explicit parameters, shuffled onto arm indices by `env_seed` (grids
// only), then checked for a strict dominance order.
Environment build_environment(const ExperimentConfig& cfg, std::uint64_t env_seed);

struct RepOutcome {
  std::size_t rep = 0;
  std::vector<Checkpoint> checkpoints;
  Action final_action;
  double final_gap = 0.0;
  double cum_regret = 0.0;
  std::uint64_t total_pulls = 0;
  std::uint64_t exploration_pulls = 0;
  std::size_t peak_live_estimators = 0;  // CMAB-SM only
  double lambda = 0.0;                   // CMAB-SM only
};

struct CurvePoint {
  std::uint64_t t;
  double mean;
  double std;  // sample standard deviation; 0 for one repetition
};

struct AlgoReport {
  Algo algo;
  bool skipped = false;
  std::string skip_reason;
  std::vector<RepOutcome> reps;  // sorted by rep
  std::vector<CurvePoint> curve;
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<double> arm_parameters;  // by arm index
  Action optimal_action;
  double optimal_mean = 0.0;
  std::vector<AlgoReport> algos;  // cmab_sm before ucb
  double wall_seconds = 0.0;
};

std::vector<CurvePoint> aggregate_curve(const std::vector<RepOutcome>& reps);

// Runs every (algorithm, repetition) pair on a bounded worker pool. Results
// are placed by index, so output does not depend on scheduling.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// `<stem>_agg<ext>` next to `path`.
std::filesystem::path aggregate_path(const std::filesystem::path& path);

// Writes `t,algo,rep,cum_regret` rows to `path` and
// `t,algo,mean_cum_regret,std_cum_regret` rows to aggregate_path(path).
// Throws IoError.
void write_csv(const ExperimentReport& report, const std::filesystem::path& path);

// Six significant digits, as written to the CSV files.
std::string format_value(double v);

// `algo=<> W(T)_mean=<> W(T)_std=<> final_gap_max=<> explore_pulls_max=<>`
std::string summary_line(const AlgoReport& algo);

}  // namespace cmabsm
