#ifndef RASCH_ASSESS_ORACLE_GRID_SEARCH_HPP
#define RASCH_ASSESS_ORACLE_GRID_SEARCH_HPP

// Brute-force reference estimator for small matrices. Shares no estimation
// code with the Newton engine: probabilities, the likelihood, extremity
// exclusion and the constraint handling are all computed here independently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/errors.hpp"

namespace rasch_assess::oracle {

struct GridSpec {
  double lower = -5.0;
  double upper = 5.0;
  double step = 0.01;

  [[nodiscard]] std::size_t points() const {
    return static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
  }
  [[nodiscard]] double value(std::size_t k) const { return lower + static_cast<double>(k) * step; }

  void validate() const {
    if (!(lower < upper)) throw std::invalid_argument("grid lower bound must be below upper bound");
    if (!(step > 0)) throw std::invalid_argument("grid step must be positive");
    if ((upper - lower) / step > 1e7) throw std::invalid_argument("grid too fine");
  }
};

/// Grid-optimal parameters. Excluded persons and items carry NaN.
struct GridEstimate {
  std::vector<double> difficulties;
  std::vector<double> measures;
  std::vector<double> thresholds;
  std::vector<bool> person_used;
  std::vector<bool> item_used;
  double log_likelihood = 0.0;
  int sweeps = 0;
};

namespace detail {

class GridProblem {
 public:
  GridProblem(const CodedMatrix& m, const GridSpec& grid) : m_(m), grid_(grid), top_(m.top_category()) {
    person_used_.assign(m.persons(), true);
    item_used_.assign(m.items(), true);
    exclude_extremes();
    for (std::size_t i = 0; i < m.items(); ++i) {
      if (item_used_[i]) items_.push_back(i);
    }
    for (std::size_t n = 0; n < m.persons(); ++n) {
      if (person_used_[n]) persons_.push_back(n);
    }
    if (persons_.size() < 2 || items_.size() < 2) {
      throw InsufficientDataError("grid oracle: fewer than 2 usable persons or items");
    }
    std::vector<bool> seen(static_cast<std::size_t>(top_) + 1, false);
    for (auto n : persons_) {
      for (auto i : items_) {
        if (m.observed(n, i)) seen[static_cast<std::size_t>(m.raw(n, i))] = true;
      }
    }
    for (bool s : seen) {
      if (!s) throw InsufficientDataError("grid oracle: every category must be observed");
    }
  }

  // free coordinates: all persons, all items but the last, all thresholds but the last
  struct Point {
    std::vector<double> beta;
    std::vector<double> delta_free;
    std::vector<double> tau_free;
  };

  [[nodiscard]] double delta(const Point& p, std::size_t k) const {
    if (k + 1 < items_.size()) return p.delta_free[k];
    double s = 0;
    for (double d : p.delta_free) s += d;
    return -s;
  }

  [[nodiscard]] std::vector<double> taus(const Point& p) const {
    std::vector<double> tau(static_cast<std::size_t>(top_), 0.0);
    double s = 0;
    for (std::size_t j = 0; j < p.tau_free.size(); ++j) tau[j] = p.tau_free[j], s += p.tau_free[j];
    if (top_ >= 1) tau.back() = top_ == 1 ? 0.0 : -s;
    return tau;
  }

  // log P(X = x) under the rating scale model, written out directly
  [[nodiscard]] double log_prob(double beta, double delta, const std::vector<double>& tau, int x) const {
    double denom = 0.0, cum = 0.0, numer = 0.0;
    for (int k = 0; k <= top_; ++k) {
      if (k > 0) cum += tau[static_cast<std::size_t>(k - 1)];
      const double logit = k * (beta - delta) - cum;
      denom += std::exp(logit);
      if (k == x) numer = logit;
    }
    return numer - std::log(denom);
  }

  [[nodiscard]] double cell_ll(const Point& p, std::size_t pi, std::size_t ii,
                               const std::vector<double>& tau) const {
    const std::size_t n = persons_[pi], i = items_[ii];
    if (!m_.observed(n, i)) return 0.0;
    return log_prob(p.beta[pi], delta(p, ii), tau, m_.raw(n, i));
  }

  [[nodiscard]] double total_ll(const Point& p) const {
    const auto tau = taus(p);
    double ll = 0;
    for (std::size_t pi = 0; pi < persons_.size(); ++pi) {
      for (std::size_t ii = 0; ii < items_.size(); ++ii) ll += cell_ll(p, pi, ii, tau);
    }
    return ll;
  }

  // likelihood of the cells a coordinate touches
  [[nodiscard]] double partial_ll(const Point& p, int kind, std::size_t k) const {
    const auto tau = taus(p);
    double ll = 0;
    if (kind == 0) {
      for (std::size_t ii = 0; ii < items_.size(); ++ii) ll += cell_ll(p, k, ii, tau);
    } else if (kind == 1) {
      for (std::size_t pi = 0; pi < persons_.size(); ++pi) {
        ll += cell_ll(p, pi, k, tau) + cell_ll(p, pi, items_.size() - 1, tau);
      }
    } else {
      return total_ll(p);
    }
    return ll;
  }

  double& coordinate(Point& p, int kind, std::size_t k) const {
    return kind == 0 ? p.beta[k] : kind == 1 ? p.delta_free[k] : p.tau_free[k];
  }

  // exhaustive line search over the grid; moves only on strict improvement
  bool optimize_coordinate(Point& p, int kind, std::size_t k) const {
    double& x = coordinate(p, kind, k);
    const double current = x;
    double best_ll = partial_ll(p, kind, k);
    double best = current;
    for (std::size_t g = 0; g < grid_.points(); ++g) {
      x = grid_.value(g);
      const double ll = partial_ll(p, kind, k);
      if (ll > best_ll + 1e-12) best_ll = ll, best = x;
    }
    x = best;
    return best != current;
  }

  Point start(std::mt19937_64* rng) const {
    Point p;
    p.beta.assign(persons_.size(), 0.0);
    p.delta_free.assign(items_.size() - 1, 0.0);
    p.tau_free.assign(top_ >= 2 ? static_cast<std::size_t>(top_ - 1) : 0, 0.0);
    if (rng) {
      std::uniform_int_distribution<std::size_t> pick(0, grid_.points() - 1);
      auto snap = [&](double& v) {
        // stay well inside the grid so the derived coordinates do too
        v = std::clamp(grid_.value(pick(*rng)) * 0.4, grid_.lower, grid_.upper);
        v = grid_.lower + std::round((v - grid_.lower) / grid_.step) * grid_.step;
      };
      for (auto& v : p.beta) snap(v);
      for (auto& v : p.delta_free) snap(v);
      for (auto& v : p.tau_free) snap(v);
    }
    return p;
  }

  int descend(Point& p, int sweep_cap) const {
    for (int sweep = 1; sweep <= sweep_cap; ++sweep) {
      bool moved = false;
      for (std::size_t k = 0; k < p.beta.size(); ++k) moved |= optimize_coordinate(p, 0, k);
      for (std::size_t k = 0; k < p.delta_free.size(); ++k) moved |= optimize_coordinate(p, 1, k);
      for (std::size_t k = 0; k < p.tau_free.size(); ++k) moved |= optimize_coordinate(p, 2, k);
      if (!moved) return sweep;
    }
    throw std::runtime_error("grid oracle: no coordinate-wise optimum within sweep cap");
  }

  GridEstimate to_estimate(const Point& p, int sweeps) const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    GridEstimate e;
    e.difficulties.assign(m_.items(), nan);
    e.measures.assign(m_.persons(), nan);
    e.person_used = person_used_;
    e.item_used = item_used_;
    for (std::size_t ii = 0; ii < items_.size(); ++ii) e.difficulties[items_[ii]] = delta(p, ii);
    for (std::size_t pi = 0; pi < persons_.size(); ++pi) e.measures[persons_[pi]] = p.beta[pi];
    e.thresholds = taus(p);
    e.log_likelihood = total_ll(p);
    e.sweeps = sweeps;
    return e;
  }

 private:
  void exclude_extremes() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t n = 0; n < m_.persons(); ++n) {
        if (!person_used_[n]) continue;
        int lo = top_ + 1, hi = -1;
        for (std::size_t i = 0; i < m_.items(); ++i) {
          if (item_used_[i] && m_.observed(n, i)) lo = std::min(lo, m_.raw(n, i)), hi = std::max(hi, m_.raw(n, i));
        }
        if (hi < 0 || hi == 0 || lo == top_) person_used_[n] = false, changed = true;
      }
      for (std::size_t i = 0; i < m_.items(); ++i) {
        if (!item_used_[i]) continue;
        int lo = top_ + 1, hi = -1;
        for (std::size_t n = 0; n < m_.persons(); ++n) {
          if (person_used_[n] && m_.observed(n, i)) lo = std::min(lo, m_.raw(n, i)), hi = std::max(hi, m_.raw(n, i));
        }
        if (hi < 0 || hi == 0 || lo == top_) item_used_[i] = false, changed = true;
      }
    }
  }

  const CodedMatrix& m_;
  GridSpec grid_;
  int top_;
  std::vector<bool> person_used_, item_used_;
  std::vector<std::size_t> persons_, items_;
};

}  // namespace detail

/// Coordinate-descent exhaustive grid search for the joint likelihood maximum
/// under sum-zero difficulties and thresholds. Each coordinate sweep scans the
/// full grid for one parameter while the last difficulty and the last
/// threshold absorb the constraints. Runs one start at the origin plus
/// `restarts` seeded random starts and keeps the best.
///
/// Intended for matrices of a handful of persons and items; refuses inputs in
/// which some category is never observed.
inline GridEstimate grid_calibrate(const CodedMatrix& matrix, const GridSpec& grid = {},
                                   int restarts = 3, std::uint64_t seed = 20170101,
                                   int sweep_cap = 100000) {
  grid.validate();
  detail::GridProblem problem(matrix, grid);
  GridEstimate best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  for (int r = 0; r <= restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    auto point = problem.start(r == 0 ? nullptr : &rng);
    const int sweeps = problem.descend(point, sweep_cap);
    auto estimate = problem.to_estimate(point, sweeps);
    if (estimate.log_likelihood > best.log_likelihood) best = std::move(estimate);
  }
  return best;
}

}  // namespace rasch_assess::oracle

#endif  // RASCH_ASSESS_ORACLE_GRID_SEARCH_HPP
