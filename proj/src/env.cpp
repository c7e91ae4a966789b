#include "cmabsm/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmabsm/errors.hpp"

namespace cmabsm {
namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr unsigned kQuadratureMaxDepth = 20;

template <typename F>
double integrate_unit_interval(F&& f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      std::forward<F>(f), 0.0, 1.0, kQuadratureMaxDepth, kQuadratureTolerance);
}

double texp_survival(double theta, double x) noexcept {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return std::exp(-std::tan(std::numbers::pi * x / 2.0) / theta);
}

// Small stack buffer for the per-pull reward vector; heap only for huge K.
class RewardBuffer {
 public:
  explicit RewardBuffer(std::size_t n) : size_(n) {
    if (n > inline_.size()) heap_.resize(n);
  }
  double* data() noexcept { return heap_.empty() ? inline_.data() : heap_.data(); }
  std::span<double> span() noexcept { return {data(), size_}; }

 private:
  std::array<double, 32> inline_{};
  std::vector<double> heap_;
  std::size_t size_;
};

}  // namespace

double arctan_transform(double y) noexcept { return 2.0 / std::numbers::pi * std::atan(y); }

ArmDistribution::ArmDistribution(std::variant<Bernoulli, TransformedExponential> law)
    : law_(law) {
  if (const auto* b = std::get_if<Bernoulli>(&law_)) {
    mean_ = b->p;
    second_moment_ = b->p;  // X in {0,1}
  } else {
    const double theta = std::get<TransformedExponential>(law_).theta;
    // E[X^m] = integral over [0,1] of m x^{m-1} P(X >= x) dx.
    mean_ = integrate_unit_interval([theta](double x) { return texp_survival(theta, x); });
    second_moment_ = integrate_unit_interval(
        [theta](double x) { return 2.0 * x * texp_survival(theta, x); });
  }
}

ArmDistribution ArmDistribution::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("bernoulli parameter must lie in (0,1), got " + std::to_string(p));
  }
  return ArmDistribution(Bernoulli{p});
}

ArmDistribution ArmDistribution::transformed_exponential(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw InvalidArgument("exponential scale must be positive, got " + std::to_string(theta));
  }
  return ArmDistribution(TransformedExponential{theta});
}

Family ArmDistribution::family() const noexcept {
  return std::holds_alternative<Bernoulli>(law_) ? Family::kBernoulli
                                                 : Family::kTransformedExponential;
}

double ArmDistribution::parameter() const noexcept {
  if (const auto* b = std::get_if<Bernoulli>(&law_)) return b->p;
  return std::get<TransformedExponential>(law_).theta;
}

double ArmDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng);
  if (const auto* b = std::get_if<Bernoulli>(&law_)) return u < b->p ? 1.0 : 0.0;
  const double theta = std::get<TransformedExponential>(law_).theta;
  return arctan_transform(-theta * std::log1p(-u));
}

double ArmDistribution::survival(double x) const noexcept {
  if (const auto* b = std::get_if<Bernoulli>(&law_)) {
    if (x <= 0.0) return 1.0;
    if (x <= 1.0) return b->p;
    return 0.0;
  }
  return texp_survival(std::get<TransformedExponential>(law_).theta, x);
}

std::string ArmDistribution::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (family() == Family::kBernoulli) {
    os << "Bernoulli(" << parameter() << ')';
  } else {
    os << "TransformedExponential(" << parameter() << ')';
  }
  return os.str();
}

std::string_view to_string(RewardFunction fn) noexcept {
  switch (fn) {
    case RewardFunction::kNormalizedSum: return "sum";
    case RewardFunction::kMax: return "max";
    case RewardFunction::kPairwisePosProduct: return "pairwise";
  }
  return "?";
}

std::string_view to_string(Family family) noexcept {
  return family == Family::kBernoulli ? "bernoulli" : "texp";
}

double aggregate(RewardFunction fn, std::span<const double> rewards, std::size_t slate_size) {
  if (rewards.size() != slate_size) {
    throw DimensionMismatch("aggregate expects " + std::to_string(slate_size) +
                            " rewards, got " + std::to_string(rewards.size()));
  }
  if (fn == RewardFunction::kMax) return *std::max_element(rewards.begin(), rewards.end());

  // Floating-point sums depend on order; sorting first makes the result a
  // function of the multiset alone.
  RewardBuffer sorted(rewards.size());
  auto d = sorted.span();
  std::copy(rewards.begin(), rewards.end(), d.begin());
  std::sort(d.begin(), d.end());

  const auto k = static_cast<double>(slate_size);
  double sum = 0.0;
  for (double x : d) sum += x;
  if (fn == RewardFunction::kNormalizedSum) return sum / k;

  // sum_{i<=j} d_i d_j = (sum^2 + sum of squares) / 2
  double sum_sq = 0.0;
  for (double x : d) sum_sq += x * x;
  return (sum * sum + sum_sq) / (k * (k + 1.0));
}

double exact_mean(RewardFunction fn, std::span<const ArmDistribution> arms) {
  if (arms.empty()) throw InvalidArgument("exact_mean needs at least one arm");
  const auto k = static_cast<double>(arms.size());

  switch (fn) {
    case RewardFunction::kNormalizedSum: {
      double s = 0.0;
      for (const auto& a : arms) s += a.mean();
      return s / k;
    }
    case RewardFunction::kPairwisePosProduct: {
      double diag = 0.0;
      double cross = 0.0;
      for (std::size_t i = 0; i < arms.size(); ++i) {
        diag += arms[i].second_moment();
        for (std::size_t j = i + 1; j < arms.size(); ++j) cross += arms[i].mean() * arms[j].mean();
      }
      return 2.0 / (k * (k + 1.0)) * (diag + cross);
    }
    case RewardFunction::kMax: {
      const bool all_bernoulli = std::all_of(arms.begin(), arms.end(), [](const auto& a) {
        return a.family() == Family::kBernoulli;
      });
      if (all_bernoulli) {
        double all_zero = 1.0;
        for (const auto& a : arms) all_zero *= 1.0 - a.parameter();
        return 1.0 - all_zero;
      }
      // E[max] = integral over [0,1] of (1 - prod_i P(X_i < x)) dx.
      return integrate_unit_interval([arms](double x) {
        double cdf = 1.0;
        for (const auto& a : arms) cdf *= 1.0 - a.survival(x);
        return 1.0 - cdf;
      });
    }
  }
  return 0.0;
}

Environment::Environment(std::vector<ArmDistribution> arms, RewardFunction reward_fn,
                         std::size_t slate_size)
    : arms_(std::move(arms)), reward_fn_(reward_fn), slate_size_(slate_size) {
  if (arms_.empty()) throw InvalidArgument("environment needs at least one arm");
  if (slate_size_ < 1 || slate_size_ > arms_.size()) {
    throw InvalidDimensions("slate size K=" + std::to_string(slate_size_) +
                            " must satisfy 1 <= K <= N=" + std::to_string(arms_.size()));
  }
  const Family fam = arms_.front().family();
  std::vector<double> params;
  params.reserve(arms_.size());
  for (const auto& a : arms_) {
    if (a.family() != fam) throw InvalidArgument("all arms must share one distribution family");
    params.push_back(a.parameter());
  }
  std::sort(params.begin(), params.end());
  if (auto it = std::adjacent_find(params.begin(), params.end()); it != params.end()) {
    throw InvalidArgument("arm parameters must be pairwise distinct; " + std::to_string(*it) +
                          " repeats");
  }
}

void Environment::check_arms(std::span<const ArmIndex> arms) const {
  if (arms.size() != slate_size_) {
    throw DimensionMismatch("action has " + std::to_string(arms.size()) + " arms, expected " +
                            std::to_string(slate_size_));
  }
  for (ArmIndex a : arms) {
    if (a >= arms_.size()) throw InvalidArgument("arm index " + std::to_string(a) + " out of range");
  }
}

double Environment::sample_action_reward(std::span<const ArmIndex> arms, Rng& rng) const {
  check_arms(arms);
  RewardBuffer d(slate_size_);
  auto rewards = d.span();
  for (std::size_t i = 0; i < slate_size_; ++i) rewards[i] = arms_[arms[i]].sample(rng);
  return aggregate(reward_fn_, rewards, slate_size_);
}

double Environment::sample_action_reward(const Action& action, Rng& rng) const {
  return sample_action_reward(action.arms(), rng);
}

double Environment::exact_action_mean(std::span<const ArmIndex> arms) const {
  check_arms(arms);
  std::vector<ArmDistribution> chosen;
  chosen.reserve(slate_size_);
  for (ArmIndex a : arms) chosen.push_back(arms_[a]);
  return exact_mean(reward_fn_, chosen);
}

double Environment::exact_action_mean(const Action& action) const {
  return exact_action_mean(action.arms());
}

FsdReport Environment::verify_fsd_ordering(std::size_t grid_points) const {
  if (grid_points < 2) throw InvalidArgument("FSD grid needs at least 2 points");
  const std::size_t n = arms_.size();

  std::vector<double> grid(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    grid[g] = static_cast<double>(g + 1) / static_cast<double>(grid_points + 1);
  }
  std::vector<double> surv(n * grid_points);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < grid_points; ++g) surv[i * grid_points + g] = arms_[i].survival(grid[g]);
  }

  // dominates[i*n+j]: arm i weakly above j everywhere and strictly somewhere.
  std::vector<char> dominates(n * n, 0);
  FsdReport report;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool i_above = false;
      bool j_above = false;
      double witness_i = grid.front();
      double witness_j = grid.front();
      for (std::size_t g = 0; g < grid_points; ++g) {
        const double si = surv[i * grid_points + g];
        const double sj = surv[j * grid_points + g];
        if (si > sj && !i_above) {
          i_above = true;
          witness_i = grid[g];
        } else if (sj > si && !j_above) {
          j_above = true;
          witness_j = grid[g];
        }
      }
      if (i_above == j_above) {
        // Crossing survival curves, or indistinguishable on the grid.
        report.violation = FsdViolation{static_cast<ArmIndex>(i), static_cast<ArmIndex>(j),
                                        i_above ? witness_j : witness_i};
        return report;
      }
      dominates[i_above ? i * n + j : j * n + i] = 1;
    }
  }

  // A strict total order: arm rank = number of arms it dominates.
  std::vector<std::size_t> wins(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) wins[i] += dominates[i * n + j];
  }
  report.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.order[i] = static_cast<ArmIndex>(i);
  std::sort(report.order.begin(), report.order.end(),
            [&](ArmIndex a, ArmIndex b) { return wins[a] > wins[b]; });
  return report;
}

Action Environment::dominance_optimal_action() const {
  std::vector<ArmIndex> idx(arms_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<ArmIndex>(i);
  std::sort(idx.begin(), idx.end(), [this](ArmIndex a, ArmIndex b) {
    return arms_[a].parameter() > arms_[b].parameter();
  });
  idx.resize(slate_size_);
  return Action(std::move(idx), arms_.size());
}

}  // namespace cmabsm
