#ifndef RASCH_ASSESS_RATING_SCALE_HPP
#define RASCH_ASSESS_RATING_SCALE_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace rasch_assess {

/// Andrich step thresholds tau_1..tau_M shared by every item (tau_0 = 0 is implicit).
/// The number of thresholds fixes the top category M.
class ThresholdVector {
 public:
  ThresholdVector() = default;
  explicit ThresholdVector(std::vector<double> tau) : tau_(std::move(tau)) {}
  /// M thresholds, all zero.
  static ThresholdVector zeros(int top_category) {
    return ThresholdVector(std::vector<double>(static_cast<std::size_t>(top_category), 0.0));
  }

  [[nodiscard]] int top_category() const noexcept { return static_cast<int>(tau_.size()); }
  [[nodiscard]] std::size_t size() const noexcept { return tau_.size(); }
  /// Threshold for step j, 1-based.
  [[nodiscard]] double step(int j) const { return tau_[static_cast<std::size_t>(j - 1)]; }
  [[nodiscard]] double& step(int j) { return tau_[static_cast<std::size_t>(j - 1)]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return tau_; }
  [[nodiscard]] double sum() const { return std::accumulate(tau_.begin(), tau_.end(), 0.0); }

  /// Subtracts the mean and returns it.
  double center() {
    if (tau_.empty()) return 0.0;
    double mean = sum() / static_cast<double>(tau_.size());
    for (auto& t : tau_) t -= mean;
    return mean;
  }

  friend bool operator==(const ThresholdVector&, const ThresholdVector&) = default;

 private:
  std::vector<double> tau_;
};

/// Fills `probs` (size M+1) with P(X = k | beta - delta, tau). Log-sum-exp
/// normalized so large |beta - delta| cannot overflow.
inline void category_probabilities(double beta, double delta, const ThresholdVector& tau,
                                   std::span<double> probs) {
  const int top = tau.top_category();
  const double eta = beta - delta;
  double cumulative = 0.0;
  probs[0] = 0.0;
  for (int k = 1; k <= top; ++k) {
    cumulative += tau.step(k);
    probs[static_cast<std::size_t>(k)] = k * eta - cumulative;
  }
  const auto used = probs.first(static_cast<std::size_t>(top) + 1);
  const double max_log = *std::ranges::max_element(used);
  double total = 0.0;
  for (auto& p : used) {
    p = std::exp(p - max_log);
    total += p;
  }
  for (auto& p : used) p /= total;
}

inline std::vector<double> category_probabilities(double beta, double delta,
                                                  const ThresholdVector& tau) {
  std::vector<double> probs(static_cast<std::size_t>(tau.top_category()) + 1);
  category_probabilities(beta, delta, tau, probs);
  return probs;
}

inline double category_probability(double beta, double delta, const ThresholdVector& tau, int k) {
  return category_probabilities(beta, delta, tau)[static_cast<std::size_t>(k)];
}

/// Mean and variance of the category score at one person-item pair.
struct ScoreMoments {
  double expected = 0.0;
  double variance = 0.0;
};

inline ScoreMoments score_moments(std::span<const double> probs) {
  double mean = 0.0, second = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double kk = static_cast<double>(k);
    mean += kk * probs[k];
    second += kk * kk * probs[k];
  }
  return {mean, std::max(second - mean * mean, 0.0)};
}

inline double expected_score(double beta, double delta, const ThresholdVector& tau) {
  return score_moments(category_probabilities(beta, delta, tau)).expected;
}

inline double score_variance(double beta, double delta, const ThresholdVector& tau) {
  return score_moments(category_probabilities(beta, delta, tau)).variance;
}

/// Log probability of category k, computed without forming the probability.
inline double log_category_probability(double beta, double delta, const ThresholdVector& tau,
                                       int k) {
  const int top = tau.top_category();
  const double eta = beta - delta;
  double cumulative = 0.0, max_log = 0.0, numerator = 0.0;
  // first pass: max of the unnormalized log weights
  for (int m = 1; m <= top; ++m) {
    cumulative += tau.step(m);
    max_log = std::max(max_log, m * eta - cumulative);
  }
  cumulative = 0.0;
  double total = std::exp(-max_log);
  for (int m = 1; m <= top; ++m) {
    cumulative += tau.step(m);
    const double w = m * eta - cumulative;
    total += std::exp(w - max_log);
    if (m == k) numerator = w;
  }
  return numerator - max_log - std::log(total);
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_RATING_SCALE_HPP
