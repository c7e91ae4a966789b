#include "cmabsm/oracle.hpp"

#include <cmath>

#include "cmabsm/errors.hpp"

namespace cmabsm {

BestAction best_action_exact(const Environment& env, std::uint64_t enum_cap) {
  const ActionTable table = enumerate_actions(env.n_arms(), env.slate_size(), enum_cap);
  std::size_t best_rank = 0;
  double best_mean = env.exact_action_mean(table.row(0));
  for (std::size_t a = 1; a < table.size(); ++a) {
    const double m = env.exact_action_mean(table.row(a));
    if (m > best_mean) {
      best_mean = m;
      best_rank = a;
    }
  }
  return {table.action(best_rank), best_mean};
}

double action_gap(const Environment& env, const Action& action, std::uint64_t enum_cap) {
  return best_action_exact(env, enum_cap).mean - env.exact_action_mean(action);
}

MonteCarloEstimate mc_action_mean(const Environment& env, const Action& action,
                                  std::uint64_t n_samples, Rng& rng) {
  if (n_samples == 0) throw InvalidArgument("mc_action_mean needs at least one sample");
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n_samples; ++i) sum += env.sample_action_reward(action, rng);
  const double n = static_cast<double>(n_samples);
  return {sum / n, std::sqrt(std::log(2.0e3) / (2.0 * n))};
}

double log_crossover_horizon(std::size_t n_arms, std::size_t slate_size) {
  if (slate_size < 1 || n_arms < slate_size) {
    throw InvalidDimensions("crossover horizon needs N >= K >= 1");
  }
  const double n = static_cast<double>(n_arms);
  const double k = static_cast<double>(slate_size);
  return 3.0 * k + (3.0 * k - 2.0) * std::log(n) - (3.0 * k + 3.0) * std::log(k);
}

double crossover_horizon(std::size_t n_arms, std::size_t slate_size) {
  return std::exp(log_crossover_horizon(n_arms, slate_size));
}

}  // namespace cmabsm
