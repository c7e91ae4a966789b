#include "cmabsm/core.hpp"

#include <algorithm>
#include <cmath>

#include "cmabsm/errors.hpp"

namespace cmabsm {

double compute_lambda(std::size_t n_arms, std::uint64_t horizon, double lipschitz) {
  if (n_arms < 2 || horizon < 1 || !(lipschitz > 0.0)) {
    throw InvalidArgument("compute_lambda needs N >= 2, T >= 1, U > 0");
  }
  const double n = static_cast<double>(n_arms);
  const double t = static_cast<double>(horizon);
  return std::cbrt(256.0 * lipschitz * lipschitz * n * std::log(2.0 * n * t) / t);
}

std::uint64_t pull_target(const RoundSchedule& s, double delta) {
  const double t = static_cast<double>(s.horizon);
  const double n = static_cast<double>(s.n_arms);
  const double k = static_cast<double>(s.slate_size);
  const double numerator = s.formula == PullTargetFormula::kTwoLogTNK
                               ? 2.0 * std::log(t * n * k)
                               : std::log(2.0 * n * t);
  return static_cast<std::uint64_t>(std::ceil(std::max(numerator, 0.0) / (delta * delta)));
}

RoundSchedule RoundSchedule::initial(std::uint64_t horizon, std::size_t n_arms,
                                     std::size_t slate_size, PullTargetFormula formula) {
  RoundSchedule s;
  s.horizon = horizon;
  s.n_arms = n_arms;
  s.slate_size = slate_size;
  s.formula = formula;
  s.n_r = pull_target(s, s.delta);
  return s;
}

RoundSchedule update_round(const RoundSchedule& s) {
  RoundSchedule next = s;
  next.r = s.r + 1;
  next.delta = std::ldexp(1.0, -next.r);
  next.n_r = pull_target(next, next.delta);
  return next;
}

namespace {

struct ProbeCounters {
  std::size_t live = 0;
  std::size_t peak = 0;
};

thread_local ProbeCounters probe;

void probe_acquire() noexcept {
  ++probe.live;
  probe.peak = std::max(probe.peak, probe.live);
}

}  // namespace

std::size_t EstimatorProbe::live() noexcept { return probe.live; }
std::size_t EstimatorProbe::peak() noexcept { return probe.peak; }
void EstimatorProbe::reset_peak() noexcept { probe.peak = probe.live; }

MeanEstimator::MeanEstimator() noexcept { probe_acquire(); }
MeanEstimator::MeanEstimator(const MeanEstimator& other) noexcept
    : sum_(other.sum_), pulls_(other.pulls_) {
  probe_acquire();
}
MeanEstimator::~MeanEstimator() { --probe.live; }

RegretLedger::RegretLedger(std::uint64_t horizon, double optimal_mean,
                           std::uint64_t checkpoint_interval)
    : horizon_(horizon), optimal_mean_(optimal_mean), interval_(checkpoint_interval) {
  if (checkpoint_interval == 0) throw InvalidArgument("checkpoint interval must be positive");
  checkpoints_.push_back({0, 0.0});
}

std::uint64_t RegretLedger::credit(double gap, std::uint64_t count) {
  gap = std::max(gap, 0.0);
  const std::uint64_t granted = std::min(count, remaining());
  const std::uint64_t before = total_pulls_;
  const double base = cum_regret_;
  const std::uint64_t after = before + granted;

  for (std::uint64_t t = (before / interval_ + 1) * interval_; t <= after; t += interval_) {
    checkpoints_.push_back({t, base + gap * static_cast<double>(t - before)});
  }
  total_pulls_ = after;
  cum_regret_ = base + gap * static_cast<double>(granted);
  return granted;
}

void RegretLedger::finalize() {
  if (checkpoints_.back().t != total_pulls_) checkpoints_.push_back({total_pulls_, cum_regret_});
}

PullStatus update_mean(MeanEstimator& est, const Action& action, const Environment& env,
                       std::uint64_t target_pulls, Rng& rng, RegretLedger& ledger, double gap) {
  if (est.pulls() >= target_pulls) return PullStatus::kComplete;
  const std::uint64_t wanted = target_pulls - est.pulls();
  const std::uint64_t granted = std::min(wanted, ledger.remaining());
  for (std::uint64_t i = 0; i < granted; ++i) est.add(env.sample_action_reward(action, rng));
  ledger.credit(gap, granted);
  return granted == wanted ? PullStatus::kComplete : PullStatus::kHorizonExhausted;
}

PullStatus update_mean(MeanEstimator& est, const Action& action, const Environment& env,
                       std::uint64_t target_pulls, Rng& rng, RegretLedger& ledger) {
  const double gap = ledger.optimal_mean() - env.exact_action_mean(action);
  return update_mean(est, action, env, target_pulls, rng, ledger, gap);
}

}  // namespace cmabsm
