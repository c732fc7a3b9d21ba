#ifndef RASCH_ASSESS_FIT_HPP
#define RASCH_ASSESS_FIT_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rasch_assess/calibration.hpp"
#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/rating_scale.hpp"

namespace rasch_assess {

/// Mean-square acceptability band, inclusive at both ends.
struct FitBand {
  double low = 0.5;
  double high = 2.0;

  static constexpr FitBand standard() { return {0.5, 2.0}; }
  static constexpr FitBand strict() { return {0.5, 1.5}; }

  void validate() const {
    if (!(low < 1.0 && 1.0 < high)) throw ValidationError("fit band must satisfy low < 1 < high");
  }
  friend bool operator==(const FitBand&, const FitBand&) = default;
};

enum class FitClass { Acceptable, Overfit, Misfit };

inline const char* to_string(FitClass c) {
  switch (c) {
    case FitClass::Acceptable: return "acceptable";
    case FitClass::Overfit: return "overfit";
    case FitClass::Misfit: return "misfit";
  }
  return "";
}

inline std::optional<FitClass> parse_fit_class(std::string_view s) {
  if (s == "acceptable") return FitClass::Acceptable;
  if (s == "overfit") return FitClass::Overfit;
  if (s == "misfit") return FitClass::Misfit;
  return std::nullopt;
}

struct FitFlag {
  FitClass classification = FitClass::Acceptable;
  FitBand band;
};

/// Infit and outfit mean squares for one item or person. Both are absent when
/// the entity has no usable cell (it was excluded, or every cell has zero variance).
struct FitStatistic {
  std::string id;
  std::optional<double> infit_mnsq;
  std::optional<double> outfit_mnsq;
  std::size_t cells = 0;

  [[nodiscard]] bool usable() const { return infit_mnsq.has_value() && outfit_mnsq.has_value(); }
};

struct FitStatistics {
  std::vector<FitStatistic> items;
  std::vector<FitStatistic> persons;
};

inline double standardized_residual(double observed, double expected, double variance) {
  if (!(variance > 0)) throw DegenerateCellError("standardized residual needs positive variance");
  return (observed - expected) / std::sqrt(variance);
}

/// Outfit is the plain mean of squared standardized residuals; infit is the
/// variance-weighted mean, sum (x - e)^2 / sum w. Only cells between
/// non-extreme persons and items with positive model variance are used.
/// Sums run in index order.
inline FitStatistics fit_statistics(const CodedMatrix& matrix, const CalibrationResult& result) {
  const std::size_t n_persons = matrix.persons(), n_items = matrix.items();
  if (result.persons.size() != n_persons || result.items.size() != n_items) {
    throw ConsistencyError("calibration result does not match the matrix dimensions");
  }
  struct Acc {
    double squared = 0.0, variance = 0.0, z2 = 0.0;
    std::size_t cells = 0;
  };
  std::vector<Acc> item_acc(n_items), person_acc(n_persons);
  std::vector<double> probs(result.thresholds.size() + 1);

  for (std::size_t n = 0; n < n_persons; ++n) {
    if (result.persons[n].extreme) continue;
    for (std::size_t i = 0; i < n_items; ++i) {
      if (result.items[i].extreme || !matrix.observed(n, i)) continue;
      int x = matrix.raw(n, i);
      if (!result.category_map.empty()) x = result.category_map[static_cast<std::size_t>(x)];
      if (x < 0) continue;
      category_probabilities(result.persons[n].measure, result.items[i].difficulty,
                             result.thresholds, probs);
      const auto moments = score_moments(probs);
      if (!(moments.variance > 0)) continue;
      const double residual = x - moments.expected;
      const double z = standardized_residual(x, moments.expected, moments.variance);
      for (Acc* acc : {&item_acc[i], &person_acc[n]}) {
        acc->squared += residual * residual;
        acc->variance += moments.variance;
        acc->z2 += z * z;
        acc->cells += 1;
      }
    }
  }

  auto finish = [](const std::string& id, const Acc& acc) {
    FitStatistic s{id, std::nullopt, std::nullopt, acc.cells};
    if (acc.cells > 0) {
      s.infit_mnsq = acc.squared / acc.variance;
      s.outfit_mnsq = acc.z2 / static_cast<double>(acc.cells);
    }
    return s;
  };
  FitStatistics out;
  for (std::size_t i = 0; i < n_items; ++i) out.items.push_back(finish(matrix.item_ids()[i], item_acc[i]));
  for (std::size_t n = 0; n < n_persons; ++n) {
    out.persons.push_back(finish(matrix.person_ids()[n], person_acc[n]));
  }
  return out;
}

/// Misfit when either mean square is above the band, overfit when either is
/// below it (and neither above), acceptable otherwise.
inline FitFlag flag_fit(double infit, double outfit, FitBand band = FitBand::standard()) {
  band.validate();
  if (infit > band.high || outfit > band.high) return {FitClass::Misfit, band};
  if (infit < band.low || outfit < band.low) return {FitClass::Overfit, band};
  return {FitClass::Acceptable, band};
}

inline std::optional<FitFlag> flag_fit(const FitStatistic& stat, FitBand band = FitBand::standard()) {
  if (!stat.usable()) return std::nullopt;
  return flag_fit(*stat.infit_mnsq, *stat.outfit_mnsq, band);
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_FIT_HPP
