#ifndef RASCH_ASSESS_CALIBRATION_HPP
#define RASCH_ASSESS_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/rating_scale.hpp"

namespace rasch_assess {

struct CalibrationConfig {
  double tolerance = 1e-4;   // largest absolute logit change per sweep
  int max_iterations = 1000;
  double step_clamp = 1.0;   // largest Newton step per parameter per sweep
  /// Shrink estimable item difficulties by (L-1)/L after convergence, L being
  /// the number of estimable items. Offsets the outward bias of joint
  /// maximum likelihood; off by default because the shrunk values are no
  /// longer a likelihood solution.
  bool bias_correction = false;

  void validate() const {
    if (!(tolerance > 0)) throw ValidationError("tolerance must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (!(step_clamp > 0)) throw ValidationError("step_clamp must be positive");
  }
};

struct ItemParameters {
  std::string item_id;
  double difficulty = 0.0;
  double se = 0.0;
  bool extreme = false;
  Extremity extremity = Extremity::None;
};

struct PersonParameters {
  std::string person_id;
  double measure = 0.0;
  double se = 0.0;
  bool extreme = false;
  Extremity extremity = Extremity::None;
};

struct CalibrationResult {
  std::vector<ItemParameters> items;
  std::vector<PersonParameters> persons;
  ThresholdVector thresholds;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> excluded;  // extreme person ids, then extreme item ids
  /// category_map[k] is the category that coded value k was estimated as,
  /// or -1 when k never occurred among estimated cells.
  std::vector<int> category_map;
  std::vector<double> log_likelihood_trace;  // one entry per sweep, after the sweep
  std::vector<std::string> warnings;
  int skipped_updates = 0;  // Newton steps skipped on a vanishing denominator

  [[nodiscard]] bool category_collapsed() const {
    for (std::size_t k = 0; k < category_map.size(); ++k) {
      if (category_map[k] != static_cast<int>(k)) return true;
    }
    return false;
  }
};

/// Starting values: PROX-style log-odds of the margins.
struct InitialEstimates {
  std::vector<ItemParameters> items;
  std::vector<PersonParameters> persons;
  ThresholdVector thresholds;
};

namespace detail {

inline constexpr double kMinInformation = 1e-10;
inline constexpr double kExtremeAdjustment = 0.25;
inline constexpr double kLikelihoodSlack = 1e-12;

/// Which rows and columns take part in estimation, and how raw categories
/// map onto the consecutive categories actually used.
struct ActiveSet {
  std::vector<bool> person_active;
  std::vector<bool> item_active;
  std::vector<Extremity> person_extremity;
  std::vector<Extremity> item_extremity;
  std::vector<int> category_map;
  int top = 0;
  std::vector<std::string> warnings;
};

/// Repeatedly drops persons and items whose responses over the remaining
/// cells are all at the bottom or top category (or absent), and collapses
/// categories that no remaining cell uses, until nothing changes.
inline ActiveSet prepare_active_set(const CodedMatrix& m) {
  ActiveSet set;
  set.person_active.assign(m.persons(), true);
  set.item_active.assign(m.items(), true);
  set.person_extremity.assign(m.persons(), Extremity::None);
  set.item_extremity.assign(m.items(), Extremity::None);

  auto remap = [&] {
    std::vector<bool> seen(static_cast<std::size_t>(m.top_category()) + 1, false);
    for (std::size_t n = 0; n < m.persons(); ++n) {
      if (!set.person_active[n]) continue;
      for (std::size_t i = 0; i < m.items(); ++i) {
        if (set.item_active[i] && m.observed(n, i)) seen[static_cast<std::size_t>(m.raw(n, i))] = true;
      }
    }
    set.category_map.assign(seen.size(), -1);
    int next = 0;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (seen[k]) set.category_map[k] = next++;
    }
    set.top = next - 1;
  };

  auto classify = [&](std::size_t index, bool by_person) {
    bool any = false, all_min = true, all_max = true;
    const std::size_t len = by_person ? m.items() : m.persons();
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t n = by_person ? index : k;
      const std::size_t i = by_person ? k : index;
      if (!(by_person ? set.item_active[i] : set.person_active[n]) || !m.observed(n, i)) continue;
      const int v = set.category_map[static_cast<std::size_t>(m.raw(n, i))];
      any = true;
      all_min = all_min && v == 0;
      all_max = all_max && v == set.top;
    }
    if (!any) return Extremity::NoData;
    if (all_min) return Extremity::Minimum;
    if (all_max) return Extremity::Maximum;
    return Extremity::None;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    remap();
    if (set.top < 1) {
      throw InsufficientDataError("insufficient data: fewer than 2 distinct categories observed");
    }
    for (std::size_t n = 0; n < m.persons(); ++n) {
      if (!set.person_active[n]) continue;
      if (auto e = classify(n, true); e != Extremity::None) {
        set.person_active[n] = false;
        set.person_extremity[n] = e;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < m.items(); ++i) {
      if (!set.item_active[i]) continue;
      if (auto e = classify(i, false); e != Extremity::None) {
        set.item_active[i] = false;
        set.item_extremity[i] = e;
        changed = true;
      }
    }
  }

  const auto persons = std::count(set.person_active.begin(), set.person_active.end(), true);
  const auto items = std::count(set.item_active.begin(), set.item_active.end(), true);
  if (persons < 2 || items < 2) {
    throw InsufficientDataError("insufficient data: " + std::to_string(persons) +
                                " non-extreme persons and " + std::to_string(items) +
                                " non-extreme items (need at least 2 of each)");
  }
  for (std::size_t k = 1; k + 1 < set.category_map.size(); ++k) {
    if (set.category_map[k] < 0) {
      set.warnings.push_back("category " + std::to_string(k) +
                             " is unobserved; higher categories collapsed downward");
    }
  }
  if (set.category_map.back() < 0) {
    set.warnings.push_back("top category " + std::to_string(set.category_map.size() - 1) +
                           " is unobserved; scale shortened to " + std::to_string(set.top + 1) +
                           " categories");
  }
  if (set.category_map.front() < 0) {
    set.warnings.push_back("category 0 is unobserved; categories shifted down");
  }
  return set;
}

/// Mutable estimation state over one matrix.
class JointEstimator {
 public:
  JointEstimator(const CodedMatrix& m, ActiveSet set, const CalibrationConfig& config)
      : m_(m), set_(std::move(set)), config_(config), probs_(static_cast<std::size_t>(set_.top) + 1) {
    cells_.resize(m.persons() * m.items(), CodedMatrix::kMissing);
    for (std::size_t n = 0; n < m.persons(); ++n) {
      for (std::size_t i = 0; i < m.items(); ++i) {
        if (set_.person_active[n] && set_.item_active[i] && m.observed(n, i)) {
          cells_[n * m.items() + i] = set_.category_map[static_cast<std::size_t>(m.raw(n, i))];
        }
      }
    }
    beta_.assign(m.persons(), 0.0);
    delta_.assign(m.items(), 0.0);
    tau_ = ThresholdVector::zeros(set_.top);
  }

  [[nodiscard]] int cell(std::size_t n, std::size_t i) const { return cells_[n * m_.items() + i]; }

  void initialize() {
    const double top = set_.top;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (!set_.item_active[i]) continue;
      double score = 0, observed = 0;
      for (std::size_t n = 0; n < m_.persons(); ++n) {
        if (int x = cell(n, i); x >= 0) score += x, observed += 1;
      }
      delta_[i] = std::log((observed * top - score) / score);
      sum += delta_[i];
      ++count;
    }
    const double mean = sum / static_cast<double>(count);
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (set_.item_active[i]) delta_[i] -= mean;
    }
    for (std::size_t n = 0; n < m_.persons(); ++n) {
      if (!set_.person_active[n]) continue;
      double score = 0, observed = 0;
      for (std::size_t i = 0; i < m_.items(); ++i) {
        if (int x = cell(n, i); x >= 0) score += x, observed += 1;
      }
      beta_[n] = std::log(score / (observed * top - score));
    }
  }

  /// Runs sweeps until the largest change is below tolerance or the cap is hit.
  void run(CalibrationResult& out) {
    for (int sweep = 1; sweep <= config_.max_iterations; ++sweep) {
      const double change = sweep_once();
      out.iterations = sweep;
      out.log_likelihood_trace.push_back(log_likelihood());
      if (change < config_.tolerance) {
        out.converged = true;
        break;
      }
    }
  }

  [[nodiscard]] double log_likelihood() const {
    double ll = 0.0;
    for (std::size_t n = 0; n < m_.persons(); ++n) {
      for (std::size_t i = 0; i < m_.items(); ++i) {
        if (int x = cell(n, i); x >= 0) ll += log_category_probability(beta_[n], delta_[i], tau_, x);
      }
    }
    return ll;
  }

  /// Solves sum_k E(measure vs k) = target for an excluded person or item,
  /// holding every estimated parameter fixed.
  double solve_location(std::size_t index, bool is_person, double target, double& info_out) {
    auto eval = [&](double location, double& info) {
      double expected = 0.0;
      info = 0.0;
      const std::size_t len = is_person ? m_.items() : m_.persons();
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t n = is_person ? index : k;
        const std::size_t i = is_person ? k : index;
        if (!(is_person ? set_.item_active[i] : set_.person_active[n]) || !m_.observed(n, i)) continue;
        const double b = is_person ? location : beta_[n];
        const double d = is_person ? delta_[i] : location;
        category_probabilities(b, d, tau_, probs_);
        const auto moments = score_moments(probs_);
        expected += moments.expected;
        info += moments.variance;
      }
      return expected;
    };
    // expected score increases with a person measure and decreases with a difficulty
    const double sign = is_person ? 1.0 : -1.0;
    double lo = -50.0, hi = 50.0, x = 0.0, info = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      const double residual = sign * (target - eval(x, info));
      if (std::abs(residual) < 1e-10) break;
      if (residual > 0) lo = x; else hi = x;
      double next = x + (info > kMinInformation ? residual / info : 0.0);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    eval(x, info);
    info_out = info;
    return x;
  }

  const CodedMatrix& m_;
  ActiveSet set_;
  CalibrationConfig config_;
  std::vector<double> probs_;
  std::vector<int> cells_;
  std::vector<double> beta_;
  std::vector<double> delta_;
  ThresholdVector tau_;
  int skipped_ = 0;

 private:
  double clamp(double step) const { return std::clamp(step, -config_.step_clamp, config_.step_clamp); }

  // Row (person) or column (item) log-likelihood at a trial location.
  double line_log_likelihood(std::size_t index, bool is_person, double location) const {
    double ll = 0.0;
    const std::size_t len = is_person ? m_.items() : m_.persons();
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t n = is_person ? index : k;
      const std::size_t i = is_person ? k : index;
      const int x = cell(n, i);
      if (x < 0) continue;
      ll += is_person ? log_category_probability(location, delta_[i], tau_, x)
                      : log_category_probability(beta_[n], location, tau_, x);
    }
    return ll;
  }

  // Guarded Newton step on one person or item; returns the applied change.
  double update_location(std::size_t index, bool is_person) {
    double& param = is_person ? beta_[index] : delta_[index];
    double residual = 0.0, info = 0.0;
    const std::size_t len = is_person ? m_.items() : m_.persons();
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t n = is_person ? index : k;
      const std::size_t i = is_person ? k : index;
      const int x = cell(n, i);
      if (x < 0) continue;
      category_probabilities(beta_[n], delta_[i], tau_, probs_);
      const auto moments = score_moments(probs_);
      residual += x - moments.expected;
      info += moments.variance;
    }
    if (info < kMinInformation) {
      ++skipped_;
      return 0.0;
    }
    // d loglik / d beta = residual, d loglik / d delta = -residual
    double step = clamp((is_person ? residual : -residual) / info);
    const double before = line_log_likelihood(index, is_person, param);
    for (int halving = 0; halving < 40; ++halving) {
      if (line_log_likelihood(index, is_person, param + step) >= before - kLikelihoodSlack) {
        param += step;
        return step;
      }
      step *= 0.5;
    }
    return 0.0;
  }

  double update_threshold(int j) {
    double gradient = 0.0, info = 0.0;
    for (std::size_t n = 0; n < m_.persons(); ++n) {
      for (std::size_t i = 0; i < m_.items(); ++i) {
        const int x = cell(n, i);
        if (x < 0) continue;
        category_probabilities(beta_[n], delta_[i], tau_, probs_);
        double at_least = 0.0;
        for (int k = j; k <= set_.top; ++k) at_least += probs_[static_cast<std::size_t>(k)];
        gradient += at_least - (x >= j ? 1.0 : 0.0);
        info += at_least * (1.0 - at_least);
      }
    }
    if (info < kMinInformation) {
      ++skipped_;
      return 0.0;
    }
    double step = clamp(gradient / info);
    const double original = tau_.step(j);
    const double before = log_likelihood();
    for (int halving = 0; halving < 40; ++halving) {
      tau_.step(j) = original + step;
      if (log_likelihood() >= before - kLikelihoodSlack) return step;
      step *= 0.5;
    }
    tau_.step(j) = original;
    return 0.0;
  }

  double sweep_once() {
    const auto beta_before = beta_;
    const auto delta_before = delta_;
    const auto tau_before = tau_;

    for (std::size_t n = 0; n < m_.persons(); ++n) {
      if (set_.person_active[n]) update_location(n, true);
    }
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (set_.item_active[i]) update_location(i, false);
    }
    if (set_.top >= 2) {
      for (int j = 1; j <= set_.top; ++j) update_threshold(j);
    }
    recenter();

    double change = 0.0;
    for (std::size_t n = 0; n < m_.persons(); ++n) {
      if (set_.person_active[n]) change = std::max(change, std::abs(beta_[n] - beta_before[n]));
    }
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (set_.item_active[i]) change = std::max(change, std::abs(delta_[i] - delta_before[i]));
    }
    for (int j = 1; j <= set_.top; ++j) {
      change = std::max(change, std::abs(tau_.step(j) - tau_before.step(j)));
    }
    return change;
  }

  // Restores sum(tau) = 0 and mean(delta) = 0; persons absorb both shifts so
  // the likelihood is unchanged.
  void recenter() {
    const double tau_shift = tau_.center();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (set_.item_active[i]) sum += delta_[i], ++count;
    }
    const double delta_shift = sum / static_cast<double>(count);
    for (std::size_t i = 0; i < m_.items(); ++i) {
      if (set_.item_active[i]) delta_[i] -= delta_shift;
    }
    for (std::size_t n = 0; n < m_.persons(); ++n) {
      if (set_.person_active[n]) beta_[n] -= tau_shift + delta_shift;
    }
  }
};

}  // namespace detail

/// PROX-style warm start: delta_i = ln((N_i*M - S_i) / S_i) centered to mean
/// zero over estimable items, beta_n = ln(S_n / (N_n*M - S_n)), thresholds 0.
inline InitialEstimates initialize(const CodedMatrix& matrix) {
  auto set = detail::prepare_active_set(matrix);
  detail::JointEstimator est(matrix, set, CalibrationConfig{});
  est.initialize();
  InitialEstimates out;
  for (std::size_t i = 0; i < matrix.items(); ++i) {
    out.items.push_back({matrix.item_ids()[i], est.delta_[i], 0.0, !set.item_active[i],
                         set.item_extremity[i]});
  }
  for (std::size_t n = 0; n < matrix.persons(); ++n) {
    out.persons.push_back({matrix.person_ids()[n], est.beta_[n], 0.0, !set.person_active[n],
                           set.person_extremity[n]});
  }
  out.thresholds = est.tau_;
  return out;
}

/// Model standard errors: 1 / sqrt(sum of score variances) over the observed
/// cells shared with non-extreme counterparts. Coded values are not needed,
/// only the observation pattern and the parameters.
inline std::pair<std::vector<ItemParameters>, std::vector<PersonParameters>> standard_errors(
    const CodedMatrix& matrix, const CalibrationResult& result) {
  auto items = result.items;
  auto persons = result.persons;
  std::vector<double> item_info(items.size(), 0.0), person_info(persons.size(), 0.0);
  std::vector<double> probs(result.thresholds.size() + 1);
  for (std::size_t n = 0; n < persons.size(); ++n) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!matrix.observed(n, i)) continue;
      const auto& p = persons[n];
      const auto& it = items[i];
      if (!std::isfinite(p.measure) || !std::isfinite(it.difficulty)) continue;
      category_probabilities(p.measure, it.difficulty, result.thresholds, probs);
      const double v = score_moments(probs).variance;
      if (!p.extreme) item_info[i] += v;
      if (!it.extreme) person_info[n] += v;
    }
  }
  auto se = [](double info) {
    return info > 0 ? 1.0 / std::sqrt(info) : std::numeric_limits<double>::quiet_NaN();
  };
  for (std::size_t i = 0; i < items.size(); ++i) items[i].se = se(item_info[i]);
  for (std::size_t n = 0; n < persons.size(); ++n) persons[n].se = se(person_info[n]);
  return {std::move(items), std::move(persons)};
}

/// Joint maximum likelihood calibration of the rating scale model.
///
/// Each sweep takes one guarded Newton step per person, then per item, then
/// per threshold, in index order; every step is clamped to the configured
/// limit and halved until the likelihood does not drop. After the sweep the
/// thresholds are re-centered to sum zero and the estimable items to mean
/// zero, with person measures absorbing both shifts. Extreme persons and items
/// are excluded from estimation and afterwards placed by solving for a score
/// 0.25 points inside their extreme score against the fixed estimates.
///
/// Non-convergence is reported through `converged`, not thrown.
inline CalibrationResult calibrate(const CodedMatrix& matrix, const CalibrationConfig& config = {}) {
  config.validate();
  auto set = detail::prepare_active_set(matrix);
  detail::JointEstimator est(matrix, set, config);
  est.initialize();

  CalibrationResult result;
  result.tolerance = config.tolerance;
  result.category_map = set.category_map;
  result.warnings = set.warnings;
  est.run(result);
  result.log_likelihood = est.log_likelihood();
  result.thresholds = est.tau_;

  for (std::size_t n = 0; n < matrix.persons(); ++n) {
    result.persons.push_back({matrix.person_ids()[n], est.beta_[n], 0.0, !set.person_active[n],
                              set.person_extremity[n]});
  }
  for (std::size_t i = 0; i < matrix.items(); ++i) {
    result.items.push_back({matrix.item_ids()[i], est.delta_[i], 0.0, !set.item_active[i],
                            set.item_extremity[i]});
  }

  // place extreme entities against the fixed estimates
  const double top = set.top;
  auto adjusted_target = [&](Extremity e, double observed) {
    return e == Extremity::Minimum ? detail::kExtremeAdjustment
                                   : observed * top - detail::kExtremeAdjustment;
  };
  auto place = [&](std::size_t index, bool is_person, Extremity e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double observed = 0;
    const std::size_t len = is_person ? matrix.items() : matrix.persons();
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t n = is_person ? index : k;
      const std::size_t i = is_person ? k : index;
      if ((is_person ? set.item_active[i] : set.person_active[n]) && matrix.observed(n, i)) observed += 1;
    }
    if (e == Extremity::NoData || observed == 0) return nan;
    double info = 0.0;
    return est.solve_location(index, is_person, adjusted_target(e, observed), info);
  };
  for (std::size_t n = 0; n < matrix.persons(); ++n) {
    if (set.person_active[n]) continue;
    result.persons[n].measure = place(n, true, set.person_extremity[n]);
    result.excluded.push_back(matrix.person_ids()[n]);
  }
  for (std::size_t i = 0; i < matrix.items(); ++i) {
    if (set.item_active[i]) continue;
    result.items[i].difficulty = place(i, false, set.item_extremity[i]);
    result.excluded.push_back(matrix.item_ids()[i]);
  }

  auto [items, persons] = standard_errors(matrix, result);
  result.items = std::move(items);
  result.persons = std::move(persons);

  if (config.bias_correction) {
    const auto estimable = std::count(set.item_active.begin(), set.item_active.end(), true);
    const double factor = static_cast<double>(estimable - 1) / static_cast<double>(estimable);
    for (std::size_t i = 0; i < result.items.size(); ++i) {
      if (set.item_active[i]) result.items[i].difficulty *= factor;
    }
  }

  result.skipped_updates = est.skipped_;
  if (est.skipped_ > 0) {
    result.warnings.push_back(std::to_string(est.skipped_) +
                              " Newton updates skipped on a vanishing denominator");
  }
  if (!result.converged) {
    result.warnings.push_back("did not converge within " + std::to_string(config.max_iterations) +
                              " sweeps");
  }
  return result;
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_CALIBRATION_HPP
