#ifndef RASCH_ASSESS_RANKING_REPORT_HPP
#define RASCH_ASSESS_RANKING_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rasch_assess/calibration.hpp"
#include "rasch_assess/csv.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/factor_catalog.hpp"
#include "rasch_assess/fit.hpp"

namespace rasch_assess {

inline constexpr std::string_view kCodingRule = "coded = max(target - current, 0); categories 0..4";

struct RankedItem {
  int rank = 0;
  SuccessFactor factor;
  double logit = 0.0;  // unrounded; rounding happens on display
  double se = 0.0;
  std::optional<double> infit;
  std::optional<double> outfit;
  std::optional<FitClass> fit_flag;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct PersonRow {
  std::string person_id;
  double measure = 0.0;
  double se = 0.0;
  std::optional<double> infit;
  std::optional<double> outfit;
  bool extreme = false;

  friend bool operator==(const PersonRow&, const PersonRow&) = default;
};

struct DeltaSummary {
  std::string factor_id;
  double mean_coded_delta = 0.0;

  friend bool operator==(const DeltaSummary&, const DeltaSummary&) = default;
};

struct ReportMeta {
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> excluded;
  std::vector<int> category_collapse;  // coded category -> estimated category, -1 if unobserved
  double tolerance = 0.0;
  double log_likelihood = 0.0;
  FitBand fit_band;
  bool bias_correction = false;
  std::string coding_rule{kCodingRule};
  std::vector<std::string> warnings;

  friend bool operator==(const ReportMeta&, const ReportMeta&) = default;
};

/// Items ordered from the highest difficulty to the lowest, plus the person
/// table, thresholds and run metadata.
struct RankingReport {
  std::vector<RankedItem> rows;
  std::vector<PersonRow> persons;
  std::vector<double> thresholds;
  ReportMeta meta;
  std::vector<DeltaSummary> delta_summary;

  friend bool operator==(const RankingReport&, const RankingReport&) = default;
};

/// Sorts non-extreme items by unrounded difficulty, descending. Ties fall back
/// to smaller SE, then group name, factor name and id, all ascending.
inline RankingReport rank_items(const CalibrationResult& result, const FitStatistics& fits,
                                const FactorCatalog& catalog,
                                FitBand band = FitBand::standard()) {
  band.validate();
  if (fits.items.size() != result.items.size() || fits.persons.size() != result.persons.size()) {
    throw ConsistencyError("fit statistics and calibration result describe different matrices");
  }
  RankingReport report;
  for (std::size_t i = 0; i < result.items.size(); ++i) {
    const auto& item = result.items[i];
    const auto* factor = catalog.find(item.item_id);
    if (!factor) throw ConsistencyError("catalog has no factor with id '" + item.item_id + "'");
    if (fits.items[i].id != item.item_id) {
      throw ConsistencyError("fit statistics out of order at item '" + item.item_id + "'");
    }
    if (item.extreme) continue;
    auto flag = flag_fit(fits.items[i], band);
    report.rows.push_back({0, *factor, item.difficulty, item.se, fits.items[i].infit_mnsq,
                           fits.items[i].outfit_mnsq,
                           flag ? std::optional(flag->classification) : std::nullopt});
  }
  std::ranges::stable_sort(report.rows, [](const RankedItem& a, const RankedItem& b) {
    if (a.logit != b.logit) return a.logit > b.logit;
    if (a.se != b.se) return a.se < b.se;
    const auto ga = to_string(a.factor.group), gb = to_string(b.factor.group);
    if (ga != gb) return ga < gb;
    if (a.factor.name != b.factor.name) return a.factor.name < b.factor.name;
    return a.factor.id < b.factor.id;
  });
  for (std::size_t r = 0; r < report.rows.size(); ++r) report.rows[r].rank = static_cast<int>(r + 1);

  for (std::size_t n = 0; n < result.persons.size(); ++n) {
    const auto& p = result.persons[n];
    report.persons.push_back(
        {p.person_id, p.measure, p.se, fits.persons[n].infit_mnsq, fits.persons[n].outfit_mnsq, p.extreme});
  }
  auto tau = result.thresholds.values();
  report.thresholds.assign(tau.begin(), tau.end());
  report.meta.converged = result.converged;
  report.meta.iterations = result.iterations;
  report.meta.excluded = result.excluded;
  report.meta.category_collapse = result.category_map;
  report.meta.tolerance = result.tolerance;
  report.meta.log_likelihood = result.log_likelihood;
  report.meta.fit_band = band;
  report.meta.warnings = result.warnings;
  return report;
}

enum class ReportFormat { Markdown, Csv, Json };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

/// Two decimals, rounding half away from zero; never prints "-0.00".
inline std::string format_2dp(double value) {
  if (!std::isfinite(value)) return "";
  double scaled = std::round(value * 100.0);
  if (scaled == 0.0) scaled = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", scaled / 100.0);
  return buf;
}

namespace detail {

inline std::string format_optional(const std::optional<double>& v, std::string_view missing) {
  return v && std::isfinite(*v) ? format_2dp(*v) : std::string(missing);
}

inline std::string escape_markdown(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

using ordered_json = nlohmann::ordered_json;

inline ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}
inline ordered_json number_or_null(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}
inline double number_from(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}
inline std::optional<double> optional_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline std::string render_markdown(const RankingReport& report) {
  std::string out = "| Rank | Group | Success Factor | Logit | Error | Infit | Outfit |\n";
  out += "|---:|---|---|---:|---:|---:|---:|\n";
  for (const auto& row : report.rows) {
    out += "| " + std::to_string(row.rank) + " | " + std::string(to_string(row.factor.group)) +
           " | " + detail::escape_markdown(row.factor.name) + " | " + format_2dp(row.logit) + " | " +
           format_2dp(row.se) + " | " + detail::format_optional(row.infit, "-") + " | " +
           detail::format_optional(row.outfit, "-") + " |\n";
  }
  return out;
}

inline std::string render_csv(const RankingReport& report) {
  std::string out = "Rank,Group,Success Factor,Logit,Error,Infit,Outfit\n";
  for (const auto& row : report.rows) {
    out += csv::join({std::to_string(row.rank), std::string(to_string(row.factor.group)),
                      row.factor.name, format_2dp(row.logit), format_2dp(row.se),
                      detail::format_optional(row.infit, ""), detail::format_optional(row.outfit, "")});
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json to_json(const RankingReport& report) {
  using detail::number_or_null;
  detail::ordered_json items = detail::ordered_json::array();
  for (const auto& row : report.rows) {
    items.push_back({{"rank", row.rank},
                     {"factor_id", row.factor.id},
                     {"group", to_string(row.factor.group)},
                     {"name", row.factor.name},
                     {"logit", number_or_null(row.logit)},
                     {"se", number_or_null(row.se)},
                     {"infit", number_or_null(row.infit)},
                     {"outfit", number_or_null(row.outfit)},
                     {"fit_flag", row.fit_flag ? detail::ordered_json(to_string(*row.fit_flag))
                                               : detail::ordered_json(nullptr)}});
  }
  detail::ordered_json persons = detail::ordered_json::array();
  for (const auto& p : report.persons) {
    persons.push_back({{"person_id", p.person_id},
                       {"measure", number_or_null(p.measure)},
                       {"se", number_or_null(p.se)},
                       {"infit", number_or_null(p.infit)},
                       {"outfit", number_or_null(p.outfit)},
                       {"extreme", p.extreme}});
  }
  detail::ordered_json collapse = detail::ordered_json::array();
  for (int c : report.meta.category_collapse) {
    collapse.push_back(c < 0 ? detail::ordered_json(nullptr) : detail::ordered_json(c));
  }
  detail::ordered_json deltas = detail::ordered_json::array();
  for (const auto& d : report.delta_summary) {
    deltas.push_back({{"factor_id", d.factor_id}, {"mean_coded_delta", number_or_null(d.mean_coded_delta)}});
  }
  detail::ordered_json meta = {
      {"converged", report.meta.converged},
      {"iterations", report.meta.iterations},
      {"excluded", report.meta.excluded},
      {"category_collapse", collapse},
      {"tolerance", report.meta.tolerance},
      {"log_likelihood", number_or_null(report.meta.log_likelihood)},
      {"fit_band", {report.meta.fit_band.low, report.meta.fit_band.high}},
      {"bias_correction", report.meta.bias_correction},
      {"coding_rule", report.meta.coding_rule},
      {"warnings", report.meta.warnings},
  };
  return {{"items", items},
          {"persons", persons},
          {"thresholds", report.thresholds},
          {"meta", meta},
          {"delta_summary", deltas}};
}

inline std::string render_json(const RankingReport& report) { return to_json(report).dump(2) + "\n"; }

inline std::string render(const RankingReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return render_json(report);
  }
  return {};
}

/// Inverse of render_json. Throws ValidationError on a malformed document.
inline RankingReport parse_report_json(std::string_view text) {
  using detail::number_from;
  using detail::optional_from;
  RankingReport report;
  try {
    const auto j = detail::ordered_json::parse(text);
    for (const auto& it : j.at("items")) {
      RankedItem row;
      row.rank = it.at("rank").get<int>();
      row.factor.id = it.at("factor_id").get<std::string>();
      row.factor.name = it.at("name").get<std::string>();
      auto group = parse_group(it.at("group").get<std::string>());
      if (!group) throw ValidationError("unknown group in report item '" + row.factor.id + "'");
      row.factor.group = *group;
      row.logit = number_from(it.at("logit"));
      row.se = number_from(it.at("se"));
      row.infit = optional_from(it.at("infit"));
      row.outfit = optional_from(it.at("outfit"));
      if (!it.at("fit_flag").is_null()) {
        row.fit_flag = parse_fit_class(it.at("fit_flag").get<std::string>());
        if (!row.fit_flag) throw ValidationError("unknown fit_flag in report item '" + row.factor.id + "'");
      }
      report.rows.push_back(std::move(row));
    }
    for (const auto& p : j.at("persons")) {
      report.persons.push_back({p.at("person_id").get<std::string>(), number_from(p.at("measure")),
                                number_from(p.at("se")), optional_from(p.at("infit")),
                                optional_from(p.at("outfit")), p.at("extreme").get<bool>()});
    }
    for (const auto& t : j.at("thresholds")) report.thresholds.push_back(t.get<double>());
    const auto& meta = j.at("meta");
    report.meta.converged = meta.at("converged").get<bool>();
    report.meta.iterations = meta.at("iterations").get<int>();
    report.meta.excluded = meta.at("excluded").get<std::vector<std::string>>();
    for (const auto& c : meta.at("category_collapse")) {
      report.meta.category_collapse.push_back(c.is_null() ? -1 : c.get<int>());
    }
    report.meta.tolerance = meta.at("tolerance").get<double>();
    report.meta.log_likelihood = number_from(meta.at("log_likelihood"));
    report.meta.fit_band = {meta.at("fit_band").at(0).get<double>(), meta.at("fit_band").at(1).get<double>()};
    report.meta.bias_correction = meta.at("bias_correction").get<bool>();
    report.meta.coding_rule = meta.at("coding_rule").get<std::string>();
    report.meta.warnings = meta.at("warnings").get<std::vector<std::string>>();
    for (const auto& d : j.at("delta_summary")) {
      report.delta_summary.push_back(
          {d.at("factor_id").get<std::string>(), number_from(d.at("mean_coded_delta"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
  return report;
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_RANKING_REPORT_HPP
