#ifndef RASCH_ASSESS_TOOLS_CLI_HPP
#define RASCH_ASSESS_TOOLS_CLI_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "rasch_assess/oracle/simulate.hpp"
#include "rasch_assess/rasch_assess.hpp"

namespace rasch_assess::cli {

enum ExitCode : int {
  kOk = 0,
  kDataError = 1,
  kUsageError = 2,
  kStrictFailure = 3,
};

/// Thrown for unreadable or unwritable files; maps to exit code 1.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw FileError("error while reading '" + path + "'");
  return ss.str();
}

/// Writes to a sibling temporary file and renames it over the target, so the
/// target is either the complete new content or untouched.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw FileError("error while writing '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw FileError("cannot replace '" + path + "'");
  }
}

struct Style {
  bool color = false;
  [[nodiscard]] std::string red(const std::string& s) const { return color ? "\033[31m" + s + "\033[0m" : s; }
  [[nodiscard]] std::string green(const std::string& s) const { return color ? "\033[32m" + s + "\033[0m" : s; }
  [[nodiscard]] std::string yellow(const std::string& s) const { return color ? "\033[33m" + s + "\033[0m" : s; }
};

/// Parses "low,high" into a fit band; "strict" and "standard" name the presets.
inline FitBand parse_band(const std::string& text) {
  if (text == "strict") return FitBand::strict();
  if (text == "standard") return FitBand::standard();
  auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("fit band must be 'low,high'");
  auto lo = csv::parse_double(text.substr(0, comma));
  auto hi = csv::parse_double(text.substr(comma + 1));
  if (!lo || !hi) throw ValidationError("fit band must be two numbers, got '" + text + "'");
  FitBand band{*lo, *hi};
  band.validate();
  return band;
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    auto v = csv::parse_double(text.substr(start, end - start));
    if (!v) throw ValidationError(what + " must be a comma-separated list of numbers");
    out.push_back(*v);
    start = end + 1;
  }
  return out;
}

inline FactorCatalog load_catalog_or_default(const std::string& path) {
  return path.empty() ? default_catalog() : load_catalog(read_file(path));
}

/// Builds a calibration-shaped view of a stored report for the Wright map.
inline CalibrationResult result_from_report(const RankingReport& report) {
  CalibrationResult r;
  for (const auto& row : report.rows) r.items.push_back({row.factor.id, row.logit, row.se, false, Extremity::None});
  for (const auto& p : report.persons) {
    r.persons.push_back({p.person_id, p.measure, p.se, p.extreme, Extremity::None});
  }
  for (const auto& id : report.meta.excluded) {
    bool is_person = std::any_of(report.persons.begin(), report.persons.end(),
                                 [&](const PersonRow& p) { return p.person_id == id; });
    if (!is_person) r.items.push_back({id, std::numeric_limits<double>::quiet_NaN(), 0.0, true, Extremity::None});
  }
  return r;
}

/// Entry point shared by the executable and the tests. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               Style style = {}) {
  CLI::App app{"Rasch rating-scale calibration of success-factor assessments", "rasch_assess"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string factors, responses, targets, out_path, input, format = "markdown", band_text = "0.5,2.0";
  std::string true_logits, thresholds_text = "-1,-0.3,0.3,1", person_range = "-2,2";
  double tol = 1e-4;
  int max_iter = 1000;
  bool strict = false, bias_correction = false;
  std::size_t persons = 0;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "Check factor, response and target files");
  validate->add_option("--factors", factors, "Catalog CSV (id,group,name); built-in catalog if omitted");
  validate->add_option("--responses", responses, "Responses CSV (respondent_id,factor_id,score)")->required();
  validate->add_option("--targets", targets, "Targets CSV (factor_id,target)")->required();

  auto* cal = app.add_subcommand("calibrate", "Run the full pipeline and write the JSON report");
  cal->add_option("--factors", factors, "Catalog CSV; built-in catalog if omitted");
  cal->add_option("--responses", responses, "Responses CSV")->required();
  cal->add_option("--targets", targets, "Targets CSV")->required();
  cal->add_option("--tol", tol, "Convergence tolerance in logits")->capture_default_str();
  cal->add_option("--max-iter", max_iter, "Maximum number of sweeps")->capture_default_str();
  cal->add_option("--fit-band", band_text, "Acceptable mean-square band 'low,high' or 'strict'")
      ->capture_default_str();
  cal->add_flag("--strict", strict, "Exit 3 on non-convergence or any misfitting item");
  cal->add_flag("--bias-correction", bias_correction, "Shrink difficulties by (L-1)/L");
  cal->add_option("--out", out_path, "Output JSON report")->required();

  auto* rep = app.add_subcommand("report", "Render a stored JSON report");
  rep->add_option("--input", input, "JSON report written by calibrate")->required();
  rep->add_option("--format", format, "markdown, csv, json or wright")
      ->check(CLI::IsMember({"markdown", "csv", "json", "wright"}))
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Write a synthetic responses CSV (targets all 5)");
  sim->add_option("--factors", factors, "Catalog CSV; built-in catalog if omitted");
  sim->add_option("--true-logits", true_logits, "CSV factor_id,logit with the true difficulties")->required();
  sim->add_option("--persons", persons, "Number of simulated respondents")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Random seed")->required();
  sim->add_option("--thresholds", thresholds_text, "True thresholds, comma-separated")->capture_default_str();
  sim->add_option("--person-range", person_range, "Uniform person range 'low,high'")->capture_default_str();
  sim->add_option("--out", out_path, "Output responses CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (validate->parsed()) {
      std::vector<std::string> problems;
      auto collect = [&](const std::string& path, const ValidationError& e) {
        for (const auto& f : e.findings()) problems.push_back(path + ": " + f.to_string());
      };
      std::optional<FactorCatalog> catalog;
      try {
        catalog = load_catalog_or_default(factors);
      } catch (const ValidationError& e) {
        collect(factors, e);
      }
      if (catalog) {
        std::optional<std::vector<RespondentRecord>> records;
        std::optional<TargetProfile> profile;
        try {
          records = parse_responses(read_file(responses), *catalog);
        } catch (const ValidationError& e) {
          collect(responses, e);
        }
        try {
          profile = parse_targets(read_file(targets), *catalog);
        } catch (const ValidationError& e) {
          collect(targets, e);
        }
        if (records && profile) {
          try {
            auto matrix = build_coded_matrix(*records, *profile, *catalog);
            std::size_t extreme_persons = 0, extreme_items = 0;
            for (std::size_t n = 0; n < matrix.persons(); ++n) extreme_persons += matrix.person_extreme(n);
            for (std::size_t i = 0; i < matrix.items(); ++i) extreme_items += matrix.item_extreme(i);
            out << style.green("ok") << ": " << matrix.persons() << " respondents x " << matrix.items()
                << " factors, " << matrix.missing_count() << " missing cells, " << extreme_persons
                << " extreme respondents, " << extreme_items << " extreme factors\n";
          } catch (const InsufficientDataError& e) {
            problems.push_back(e.what());
          }
        }
      }
      for (const auto& p : problems) out << style.red("error") << ": " << p << "\n";
      return problems.empty() ? kOk : kDataError;
    }

    if (cal->parsed()) {
      const auto band = parse_band(band_text);
      CalibrationConfig config{tol, max_iter, 1.0, bias_correction};
      config.validate();
      const auto catalog = load_catalog_or_default(factors);
      const auto result = run_pipeline(catalog, read_file(responses), read_file(targets), config, band);
      write_file_atomic(out_path, render_json(result.report));

      std::size_t misfits = 0;
      for (const auto& row : result.report.rows) misfits += row.fit_flag == FitClass::Misfit;
      out << (result.calibration.converged ? style.green("converged") : style.yellow("not converged"))
          << " after " << result.calibration.iterations << " sweeps; " << result.report.rows.size()
          << " items ranked, " << result.calibration.excluded.size() << " excluded, " << misfits
          << " misfitting; report written to " << out_path << "\n";
      for (const auto& w : result.calibration.warnings) err << style.yellow("warning") << ": " << w << "\n";
      if (strict && (!result.calibration.converged || misfits > 0)) return kStrictFailure;
      return kOk;
    }

    if (rep->parsed()) {
      const auto report = parse_report_json(read_file(input));
      if (format == "wright") {
        out << wright_map(result_from_report(report));
      } else {
        out << render(report, *parse_report_format(format));
      }
      return kOk;
    }

    if (sim->parsed()) {
      const auto catalog = load_catalog_or_default(factors);
      auto rows = csv::parse_with_header(read_file(true_logits), {"factor_id", "logit"});
      oracle::SimulationSpec spec;
      std::vector<Finding> findings;
      for (const auto& row : rows) {
        if (row.fields.size() != 2) {
          findings.push_back({row.line, "expected 2 fields"});
          continue;
        }
        auto logit = csv::parse_double(row.fields[1]);
        if (!catalog.contains(row.fields[0])) findings.push_back({row.line, "unknown factor id '" + row.fields[0] + "'"});
        if (!logit) findings.push_back({row.line, "logit '" + row.fields[1] + "' is not a number"});
        if (logit && catalog.contains(row.fields[0])) {
          spec.item_ids.push_back(row.fields[0]);
          spec.difficulties.push_back(*logit);
        }
      }
      if (!findings.empty()) throw ValidationError(std::move(findings));
      const auto range = parse_number_list(person_range, "--person-range");
      if (range.size() != 2) throw ValidationError("--person-range needs two numbers");
      spec.person_count = persons;
      spec.person_lower = range[0];
      spec.person_upper = range[1];
      spec.thresholds = ThresholdVector(parse_number_list(thresholds_text, "--thresholds"));
      if (spec.thresholds.top_category() != kTopCategory) {
        throw ValidationError("--thresholds needs exactly 4 values for the 5-point scale");
      }
      spec.seed = seed;
      const auto matrix = oracle::simulate(spec);

      const int width = static_cast<int>(std::to_string(persons).size());
      std::string text = "respondent_id,factor_id,score\n";
      for (std::size_t n = 0; n < matrix.persons(); ++n) {
        std::string id = std::to_string(n + 1);
        id = "s" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
        for (std::size_t i = 0; i < matrix.items(); ++i) {
          text += id + "," + matrix.item_ids()[i] + "," + std::to_string(kLikertMax - matrix.raw(n, i)) + "\n";
        }
      }
      write_file_atomic(out_path, text);
      out << "wrote " << matrix.persons() << " respondents x " << matrix.items() << " factors to " << out_path
          << " (targets: every factor at " << kLikertMax << ")\n";
      return kOk;
    }
  } catch (const ValidationError& e) {
    for (const auto& f : e.findings()) err << style.red("error") << ": " << f.to_string() << "\n";
    return kDataError;
  } catch (const FileError& e) {
    err << style.red("error") << ": " << e.what() << "\n";
    return kDataError;
  } catch (const InsufficientDataError& e) {
    err << style.red("error") << ": " << e.what() << "\n";
    return kDataError;
  } catch (const ConsistencyError& e) {
    err << style.red("error") << ": " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace rasch_assess::cli

#endif  // RASCH_ASSESS_TOOLS_CLI_HPP
