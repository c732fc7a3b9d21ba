#ifndef RASCH_ASSESS_PIPELINE_HPP
#define RASCH_ASSESS_PIPELINE_HPP

#include <string_view>

#include "rasch_assess/assessment.hpp"
#include "rasch_assess/calibration.hpp"
#include "rasch_assess/factor_catalog.hpp"
#include "rasch_assess/fit.hpp"
#include "rasch_assess/ranking_report.hpp"

namespace rasch_assess {

struct PipelineOutput {
  CodedMatrix matrix;
  CalibrationResult calibration;
  FitStatistics fits;
  RankingReport report;
};

/// Ranking report with the per-factor mean coded delta attached.
inline RankingReport build_report(const CodedMatrix& matrix, const CalibrationResult& result,
                                  const FitStatistics& fits, const FactorCatalog& catalog,
                                  FitBand band, bool bias_correction = false) {
  auto report = rank_items(result, fits, catalog, band);
  report.meta.bias_correction = bias_correction;
  const auto means = mean_coded_delta(matrix);
  for (std::size_t i = 0; i < matrix.items(); ++i) {
    report.delta_summary.push_back({matrix.item_ids()[i], means[i]});
  }
  return report;
}

/// Ingest, code, calibrate, fit and rank in one call.
inline PipelineOutput run_pipeline(const FactorCatalog& catalog, std::string_view responses_csv,
                                   std::string_view targets_csv, const CalibrationConfig& config,
                                   FitBand band = FitBand::standard()) {
  band.validate();
  auto records = parse_responses(responses_csv, catalog);
  auto targets = parse_targets(targets_csv, catalog);
  auto matrix = build_coded_matrix(records, targets, catalog);
  auto calibration = calibrate(matrix, config);
  auto fits = fit_statistics(matrix, calibration);
  auto report = build_report(matrix, calibration, fits, catalog, band, config.bias_correction);
  return {std::move(matrix), std::move(calibration), std::move(fits), std::move(report)};
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_PIPELINE_HPP
