#ifndef RASCH_ASSESS_ORACLE_SIMULATE_HPP
#define RASCH_ASSESS_ORACLE_SIMULATE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/rating_scale.hpp"

namespace rasch_assess::oracle {

/// True parameters for a synthetic data set. Person measures are either given
/// explicitly or drawn uniformly from [person_lower, person_upper].
struct SimulationSpec {
  std::vector<double> difficulties;
  std::vector<std::string> item_ids;  // optional; defaults to i1..iI
  std::vector<double> measures;       // used when non-empty
  std::size_t person_count = 0;       // used when measures is empty
  double person_lower = -2.0;
  double person_upper = 2.0;
  ThresholdVector thresholds;
  std::uint64_t seed = 0;

  void validate() const {
    if (difficulties.empty()) throw ValidationError("simulation needs at least one item");
    if (!item_ids.empty() && item_ids.size() != difficulties.size()) {
      throw ValidationError("item id count does not match difficulty count");
    }
    if (measures.empty() && person_count == 0) throw ValidationError("simulation needs persons");
    if (measures.empty() && !(person_lower <= person_upper)) {
      throw ValidationError("person range is empty");
    }
    if (thresholds.top_category() < 1) throw ValidationError("need at least one threshold");
  }
};

/// Person measures the spec describes, drawn from the same stream simulate uses.
inline std::vector<double> draw_measures(const SimulationSpec& spec, std::mt19937_64& rng) {
  if (!spec.measures.empty()) return spec.measures;
  std::uniform_real_distribution<double> uniform(spec.person_lower, spec.person_upper);
  std::vector<double> out(spec.person_count);
  for (auto& b : out) b = uniform(rng);
  return out;
}

/// Draws every cell independently from the category probabilities at the true
/// parameters. The stream is a 64-bit Mersenne Twister seeded with spec.seed:
/// person measures first (if drawn), then cells in row-major order.
inline CodedMatrix simulate(const SimulationSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto measures = draw_measures(spec, rng);
  const std::size_t n_items = spec.difficulties.size();
  const int top = spec.thresholds.top_category();

  std::vector<double> probs(static_cast<std::size_t>(top) + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> cells;
  cells.reserve(measures.size() * n_items);
  for (double beta : measures) {
    for (double delta : spec.difficulties) {
      category_probabilities(beta, delta, spec.thresholds, probs);
      const double u = unit(rng);
      double cumulative = 0.0;
      int category = top;
      for (int k = 0; k < top; ++k) {
        cumulative += probs[static_cast<std::size_t>(k)];
        if (u < cumulative) {
          category = k;
          break;
        }
      }
      cells.push_back(category);
    }
  }

  std::vector<std::string> person_ids, item_ids = spec.item_ids;
  for (std::size_t n = 0; n < measures.size(); ++n) person_ids.push_back("p" + std::to_string(n + 1));
  if (item_ids.empty()) {
    for (std::size_t i = 0; i < n_items; ++i) item_ids.push_back("i" + std::to_string(i + 1));
  }
  return CodedMatrix(std::move(person_ids), std::move(item_ids), std::move(cells), top);
}

}  // namespace rasch_assess::oracle

#endif  // RASCH_ASSESS_ORACLE_SIMULATE_HPP
