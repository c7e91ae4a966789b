#include "cmabsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "cmabsm/cmab_sm.hpp"
#include "cmabsm/errors.hpp"
#include "cmabsm/ucb.hpp"

namespace cmabsm {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string_view key) {
  std::string k(trim(key));
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view where,
                            std::string_view expected) {
  throw ParseError(std::string(where) + ": invalid value '" + std::string(value) + "' for '" +
                   std::string(key) + "' (expected " + std::string(expected) + ")");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view where,
               std::string_view expected) {
  T out{};
  const auto v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, value, where, expected);
  }
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value, std::string_view where) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = value.substr(start, comma == std::string_view::npos ? value.npos : comma - start);
    out.push_back(parse_number<double>(key, item, where, "comma-separated numbers"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ParamSpec parse_params(std::string_view key, std::string_view value, std::string_view where) {
  const auto v = trim(value);
  constexpr std::string_view kGrid = "evenly_spaced(";
  if (v.starts_with(kGrid)) {
    if (!v.ends_with(')')) bad_value(key, value, where, "evenly_spaced(lo,hi)");
    const auto inner = v.substr(kGrid.size(), v.size() - kGrid.size() - 1);
    const auto bounds = parse_list(key, inner, where);
    if (bounds.size() != 2) bad_value(key, value, where, "evenly_spaced(lo,hi)");
    return EvenlySpaced{bounds[0], bounds[1]};
  }
  return parse_list(key, v, where);
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string_view to_string(Algo algo) noexcept {
  return algo == Algo::kCmabSm ? "cmab_sm" : "ucb";
}

ParamSpec default_params(Family dist) {
  return dist == Family::kBernoulli ? EvenlySpaced{0.05, 0.95} : EvenlySpaced{1.0, 9.0};
}

ParamSpec effective_params(const ExperimentConfig& cfg) {
  return cfg.params.value_or(default_params(cfg.dist));
}

void apply_setting(ExperimentConfig& cfg, std::string_view raw_key, std::string_view raw_value,
                   std::string_view where) {
  const std::string key = normalize_key(raw_key);
  const std::string_view value = trim(raw_value);

  if (key == "n") {
    cfg.n_arms = parse_number<std::size_t>(key, value, where, "a positive integer");
  } else if (key == "k") {
    cfg.slate_size = parse_number<std::size_t>(key, value, where, "a positive integer");
  } else if (key == "t") {
    cfg.horizon = parse_number<std::uint64_t>(key, value, where, "a positive integer");
  } else if (key == "reps") {
    cfg.reps = parse_number<std::size_t>(key, value, where, "a positive integer");
  } else if (key == "algo") {
    if (value == "cmab_sm") cfg.algo = AlgoSelection::kCmabSm;
    else if (value == "ucb") cfg.algo = AlgoSelection::kUcb;
    else if (value == "both") cfg.algo = AlgoSelection::kBoth;
    else bad_value(key, value, where, "cmab_sm|ucb|both");
  } else if (key == "dist") {
    if (value == "bernoulli") cfg.dist = Family::kBernoulli;
    else if (value == "texp") cfg.dist = Family::kTransformedExponential;
    else bad_value(key, value, where, "bernoulli|texp");
  } else if (key == "reward-fn") {
    if (value == "sum") cfg.reward_fn = RewardFunction::kNormalizedSum;
    else if (value == "max") cfg.reward_fn = RewardFunction::kMax;
    else if (value == "pairwise") cfg.reward_fn = RewardFunction::kPairwisePosProduct;
    else bad_value(key, value, where, "sum|max|pairwise");
  } else if (key == "u") {
    cfg.lipschitz_u = parse_number<double>(key, value, where, "a positive number");
  } else if (key == "seed") {
    cfg.master_seed = parse_number<std::uint64_t>(key, value, where, "a 64-bit unsigned integer");
  } else if (key == "checkpoint-interval") {
    cfg.checkpoint_interval = parse_number<std::uint64_t>(key, value, where, "a positive integer");
  } else if (key == "out") {
    if (value.empty()) bad_value(key, value, where, "a file path");
    cfg.out_path = std::string(value);
  } else if (key == "enum-cap") {
    cfg.enum_cap = parse_number<std::uint64_t>(key, value, where, "a positive integer");
  } else if (key == "nr-formula") {
    if (value == "alg5") cfg.nr_formula = PullTargetFormula::kTwoLogTNK;
    else if (value == "lemma5") cfg.nr_formula = PullTargetFormula::kLog2NT;
    else bad_value(key, value, where, "alg5|lemma5");
  } else if (key == "params") {
    cfg.params = parse_params(key, value, where);
  } else if (key == "threads") {
    cfg.threads = parse_number<std::size_t>(key, value, where, "a non-negative integer");
  } else {
    throw ParseError(std::string(where) + ": unknown key '" + std::string(raw_key) + "'");
  }
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   ExperimentConfig base) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    start = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(where + ": expected 'key = value', got '" + std::string(line) + "'");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1), where);
  }
  return base;
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (cfg.n_arms < 2) fail("n must be at least 2");
  if (cfg.slate_size < 1) fail("k must be at least 1");
  if (cfg.slate_size >= cfg.n_arms) {
    fail("k must be smaller than n (k=" + std::to_string(cfg.slate_size) +
         ", n=" + std::to_string(cfg.n_arms) + ")");
  }
  if (cfg.horizon < 1) fail("t must be at least 1");
  if (cfg.reps < 1) fail("reps must be at least 1");
  if (!(cfg.lipschitz_u > 0.0) || !std::isfinite(cfg.lipschitz_u)) fail("u must be positive");
  if (cfg.checkpoint_interval < 1) fail("checkpoint-interval must be positive");
  if (cfg.enum_cap < 1) fail("enum-cap must be positive");

  const auto in_range = [&](double p) {
    return cfg.dist == Family::kBernoulli ? (p > 0.0 && p < 1.0) : (p > 0.0 && std::isfinite(p));
  };
  const std::string range = cfg.dist == Family::kBernoulli ? "(0,1)" : "(0,inf)";
  const ParamSpec spec = effective_params(cfg);
  if (const auto* grid = std::get_if<EvenlySpaced>(&spec)) {
    if (!(grid->lo < grid->hi)) fail("evenly_spaced needs lo < hi");
    if (!in_range(grid->lo) || !in_range(grid->hi)) fail("evenly_spaced bounds must lie in " + range);
  } else {
    auto values = std::get<std::vector<double>>(spec);
    if (values.size() != cfg.n_arms) {
      fail("params lists " + std::to_string(values.size()) + " values for n=" +
           std::to_string(cfg.n_arms) + " arms");
    }
    for (double p : values) {
      if (!in_range(p)) fail("parameter " + format_value(p) + " outside " + range);
    }
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
      fail("params must be pairwise distinct (strict dominance order between arms)");
    }
  }
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ParseError("cannot read config file " + file->string());
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config_text(buf.str(), file->string());
  }
  for (const auto& [key, value] : overrides) apply_setting(cfg, key, value, "--" + key);
  validate(cfg);
  return cfg;
}

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "n=" << cfg.n_arms << " k=" << cfg.slate_size << " t=" << cfg.horizon
     << " reps=" << cfg.reps << " dist=" << to_string(cfg.dist)
     << " reward-fn=" << to_string(cfg.reward_fn) << " u=" << cfg.lipschitz_u
     << " seed=" << cfg.master_seed;
  return os.str();
}

std::uint64_t environment_seed(std::uint64_t master_seed) noexcept {
  return mix_seed(master_seed, ~std::uint64_t{0});
}

std::uint64_t repetition_seed(std::uint64_t master_seed, Algo algo, std::size_t rep) noexcept {
  return mix_seed(mix_seed(master_seed, rep), static_cast<std::uint64_t>(algo));
}

Environment build_environment(const ExperimentConfig& cfg, std::uint64_t env_seed) {
  const std::size_t n = cfg.n_arms;
  std::vector<double> params;
  const ParamSpec spec = effective_params(cfg);
  if (const auto* grid = std::get_if<EvenlySpaced>(&spec)) {
    params.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      params[i] = grid->lo + (grid->hi - grid->lo) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    }
    // Fisher-Yates with our own index draw so the permutation is portable.
    Rng rng(env_seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(params[i], params[rng() % (i + 1)]);
  } else {
    params = std::get<std::vector<double>>(spec);
  }

  std::vector<ArmDistribution> arms;
  arms.reserve(n);
  for (double p : params) {
    arms.push_back(cfg.dist == Family::kBernoulli ? ArmDistribution::bernoulli(p)
                                                  : ArmDistribution::transformed_exponential(p));
  }
  Environment env(std::move(arms), cfg.reward_fn, cfg.slate_size);
  const FsdReport fsd = env.verify_fsd_ordering();
  if (!fsd.ok()) {
    throw DominanceViolation("arms " + std::to_string(fsd.violation->first) + " and " +
                             std::to_string(fsd.violation->second) +
                             " are not strictly ordered (x=" + format_value(fsd.violation->x) + ")");
  }
  return env;
}

std::vector<CurvePoint> aggregate_curve(const std::vector<RepOutcome>& reps) {
  std::vector<CurvePoint> curve;
  if (reps.empty()) return curve;
  const std::size_t points = reps.front().checkpoints.size();
  std::vector<double> column(reps.size());
  for (std::size_t c = 0; c < points; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      column[r] = reps[r].checkpoints.at(c).cum_regret;
      sum += column[r];
    }
    const double mean = sum / static_cast<double>(reps.size());
    curve.push_back({reps.front().checkpoints[c].t, mean, sample_std(column, mean)});
  }
  return curve;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.config = cfg;
  const Environment env = build_environment(cfg, environment_seed(cfg.master_seed));
  for (const auto& arm : env.arms()) report.arm_parameters.push_back(arm.parameter());
  report.optimal_action = env.dominance_optimal_action();
  report.optimal_mean = env.exact_action_mean(report.optimal_action);

  std::vector<Algo> algos;
  if (cfg.algo != AlgoSelection::kUcb) algos.push_back(Algo::kCmabSm);
  if (cfg.algo != AlgoSelection::kCmabSm) algos.push_back(Algo::kUcb);

  for (Algo algo : algos) {
    AlgoReport ar;
    ar.algo = algo;
    if (algo == Algo::kUcb) {
      const std::uint64_t count = binomial(cfg.n_arms, cfg.slate_size);
      if (count > cfg.enum_cap) {
        ar.skipped = true;
        ar.skip_reason = "C(" + std::to_string(cfg.n_arms) + "," + std::to_string(cfg.slate_size) +
                         ") = " + std::to_string(count) + " exceeds enum-cap " +
                         std::to_string(cfg.enum_cap);
      }
    }
    if (!ar.skipped) ar.reps.resize(cfg.reps);
    report.algos.push_back(std::move(ar));
  }

  struct WorkItem {
    std::size_t algo_slot;
    std::size_t rep;
  };
  std::vector<WorkItem> items;
  for (std::size_t s = 0; s < report.algos.size(); ++s) {
    if (report.algos[s].skipped) continue;
    for (std::size_t r = 0; r < cfg.reps; ++r) items.push_back({s, r});
  }
  std::vector<double> item_seconds(items.size(), 0.0);

  auto run_item = [&](std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    const WorkItem& item = items[idx];
    AlgoReport& ar = report.algos[item.algo_slot];
    Rng rng(repetition_seed(cfg.master_seed, ar.algo, item.rep));
    RegretLedger ledger(cfg.horizon, report.optimal_mean, cfg.checkpoint_interval);

    RepOutcome out;
    out.rep = item.rep;
    if (ar.algo == Algo::kCmabSm) {
      CmabSmOptions opts;
      opts.lipschitz = cfg.lipschitz_u;
      opts.formula = cfg.nr_formula;
      const CmabSmResult res = run_cmab_sm(env, ledger, rng, opts);
      out.final_action = res.final_action;
      out.exploration_pulls = res.exploration_pulls;
      out.peak_live_estimators = res.peak_live_estimators;
      out.lambda = res.lambda;
    } else {
      const UcbResult res = run_ucb(env, ledger, rng, cfg.enum_cap);
      out.final_action = res.final_action;
      out.exploration_pulls = res.exploration_pulls;
    }
    out.final_gap = std::max(0.0, report.optimal_mean - env.exact_action_mean(out.final_action));
    out.cum_regret = ledger.cum_regret();
    out.total_pulls = ledger.total_pulls();
    out.checkpoints = ledger.checkpoints();
    ar.reps[item.rep] = std::move(out);
    item_seconds[idx] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, items.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1)) run_item(i);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    report.algos[items[i].algo_slot].wall_seconds += item_seconds[i];
  }
  for (auto& ar : report.algos) ar.curve = aggregate_curve(ar.reps);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::filesystem::path aggregate_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + "_agg" + path.extension().string());
  return out;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  // Algorithms are already in (cmab_sm, ucb) order and reps by index, which is
  // the required (algo, rep, t) row order.
  std::string per_rep = "t,algo,rep,cum_regret\n";
  std::string agg = "t,algo,mean_cum_regret,std_cum_regret\n";
  for (const auto& ar : report.algos) {
    const std::string name(to_string(ar.algo));
    for (const auto& rep : ar.reps) {
      for (const auto& cp : rep.checkpoints) {
        per_rep += std::to_string(cp.t) + "," + name + "," + std::to_string(rep.rep) + "," +
                   format_value(cp.cum_regret) + "\n";
      }
    }
    for (const auto& pt : ar.curve) {
      agg += std::to_string(pt.t) + "," + name + "," + format_value(pt.mean) + "," +
             format_value(pt.std) + "\n";
    }
  }

  auto write = [](const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << body;
    out.flush();
    if (!out) throw IoError("failed writing " + p.string());
  };
  write(path, per_rep);
  write(aggregate_path(path), agg);
}

std::string summary_line(const AlgoReport& ar) {
  std::vector<double> finals;
  double gap_max = 0.0;
  std::uint64_t explore_max = 0;
  for (const auto& rep : ar.reps) {
    finals.push_back(rep.cum_regret);
    gap_max = std::max(gap_max, rep.final_gap);
    explore_max = std::max(explore_max, rep.exploration_pulls);
  }
  double mean = 0.0;
  for (double f : finals) mean += f;
  if (!finals.empty()) mean /= static_cast<double>(finals.size());

  std::string line = "algo=" + std::string(to_string(ar.algo));
  if (ar.skipped) return line + " skipped=\"" + ar.skip_reason + "\"";
  line += " W(T)_mean=" + format_value(mean);
  line += " W(T)_std=" + format_value(sample_std(finals, mean));
  line += " final_gap_max=" + format_value(gap_max);
  line += " explore_pulls_max=" + std::to_string(explore_max);
  return line;
}

}  // namespace cmabsm
