#ifndef RASCH_ASSESS_ASSESSMENT_HPP
#define RASCH_ASSESS_ASSESSMENT_HPP

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/csv.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/factor_catalog.hpp"

namespace rasch_assess {

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 5;
/// Highest coded category: the largest possible target-minus-current gap.
inline constexpr int kTopCategory = kLikertMax - kLikertMin;

/// A 5-point Likert agreement level.
class LikertScore {
 public:
  explicit LikertScore(int value) : value_(value) {
    if (value < kLikertMin || value > kLikertMax) {
      throw ValidationError("Likert score " + std::to_string(value) + " outside 1..5");
    }
  }
  [[nodiscard]] int value() const noexcept { return value_; }
  friend auto operator<=>(const LikertScore&, const LikertScore&) = default;

 private:
  int value_;
};

/// Target minus current, in Likert points.
class DeltaValue {
 public:
  explicit DeltaValue(int value) : value_(value) {
    if (value < -kTopCategory || value > kTopCategory) {
      throw ValidationError("delta " + std::to_string(value) + " outside -4..4");
    }
  }
  [[nodiscard]] int value() const noexcept { return value_; }
  friend auto operator<=>(const DeltaValue&, const DeltaValue&) = default;

 private:
  int value_;
};

/// Improvement-potential category in 0..4; 0 means the target is already met.
class CodedCategory {
 public:
  explicit CodedCategory(int value) : value_(value) {
    if (value < 0 || value > kTopCategory) {
      throw ValidationError("coded category " + std::to_string(value) + " outside 0..4");
    }
  }
  [[nodiscard]] int value() const noexcept { return value_; }
  friend auto operator<=>(const CodedCategory&, const CodedCategory&) = default;

 private:
  int value_;
};

inline DeltaValue compute_delta(LikertScore current, LikertScore target) {
  return DeltaValue(target.value() - current.value());
}

/// Non-positive gaps (target met or exceeded) collapse into category 0.
inline CodedCategory code_delta(DeltaValue d) { return CodedCategory(std::max(d.value(), 0)); }

struct RespondentRecord {
  std::string respondent_id;
  std::map<std::string, LikertScore> answers;  // absent factor = unanswered
};

struct TargetProfile {
  std::map<std::string, LikertScore> targets;
};

namespace detail {

inline std::optional<LikertScore> parse_likert(const csv::Row& row, const std::string& field,
                                               std::string_view what,
                                               std::vector<Finding>& findings) {
  auto value = csv::parse_int(field);
  if (!value) {
    findings.push_back({row.line, std::string(what) + " '" + field + "' is not an integer"});
    return std::nullopt;
  }
  if (*value < kLikertMin || *value > kLikertMax) {
    findings.push_back(
        {row.line, std::string(what) + " " + std::to_string(*value) + " is outside 1..5"});
    return std::nullopt;
  }
  return LikertScore(*value);
}

}  // namespace detail

/// Parses long-format current-state responses (`respondent_id,factor_id,score`).
/// Respondents keep the order of their first row.
inline std::vector<RespondentRecord> parse_responses(std::string_view source,
                                                     const FactorCatalog& catalog) {
  auto rows = csv::parse_with_header(source, {"respondent_id", "factor_id", "score"});
  std::vector<Finding> findings;
  std::vector<RespondentRecord> records;
  std::unordered_map<std::string, std::size_t> record_index;
  std::map<std::pair<std::string, std::string>, std::size_t> seen_pairs;

  for (const auto& row : rows) {
    if (row.fields.size() != 3) {
      findings.push_back({row.line, "expected 3 fields, found " + std::to_string(row.fields.size())});
      continue;
    }
    const auto& rid = row.fields[0];
    const auto& fid = row.fields[1];
    bool ok = true;
    if (rid.empty()) findings.push_back({row.line, "blank respondent_id"}), ok = false;
    if (!catalog.contains(fid)) {
      findings.push_back({row.line, "unknown factor id '" + fid + "'"});
      ok = false;
    }
    auto score = detail::parse_likert(row, row.fields[2], "score", findings);
    ok = ok && score.has_value();
    if (!rid.empty() && !fid.empty()) {
      auto [it, inserted] = seen_pairs.emplace(std::pair{rid, fid}, row.line);
      if (!inserted) {
        findings.push_back({row.line, "duplicate response for respondent '" + rid + "' and factor '" +
                                          fid + "' (first on line " + std::to_string(it->second) +
                                          ")"});
        ok = false;
      }
    }
    if (!ok) continue;
    auto [it, inserted] = record_index.emplace(rid, records.size());
    if (inserted) records.push_back({rid, {}});
    records[it->second].answers.emplace(fid, *score);
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return records;
}

/// Parses the organization's target profile (`factor_id,target`); every catalog factor is required.
inline TargetProfile parse_targets(std::string_view source, const FactorCatalog& catalog) {
  auto rows = csv::parse_with_header(source, {"factor_id", "target"});
  std::vector<Finding> findings;
  TargetProfile profile;
  std::unordered_map<std::string, std::size_t> seen;

  for (const auto& row : rows) {
    if (row.fields.size() != 2) {
      findings.push_back({row.line, "expected 2 fields, found " + std::to_string(row.fields.size())});
      continue;
    }
    const auto& fid = row.fields[0];
    bool ok = true;
    if (!catalog.contains(fid)) {
      findings.push_back({row.line, "unknown factor id '" + fid + "'"});
      ok = false;
    }
    auto [it, inserted] = seen.emplace(fid, row.line);
    if (!inserted) {
      findings.push_back({row.line, "duplicate target for factor '" + fid + "' (first on line " +
                                        std::to_string(it->second) + ")"});
      ok = false;
    }
    auto target = detail::parse_likert(row, row.fields[1], "target", findings);
    if (ok && target) profile.targets.emplace(fid, *target);
  }

  std::string uncovered;
  for (const auto& f : catalog) {
    if (!seen.contains(f.id)) uncovered += (uncovered.empty() ? "" : ", ") + f.id;
  }
  if (!uncovered.empty()) findings.push_back({0, "targets missing for factors: " + uncovered});
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return profile;
}

/// Codes every answer as max(target - current, 0). Rows follow record order,
/// columns follow catalog order, unanswered factors become missing cells.
/// Throws InsufficientDataError when fewer than two persons or two items have
/// a non-extreme response pattern.
inline CodedMatrix build_coded_matrix(const std::vector<RespondentRecord>& records,
                                      const TargetProfile& targets, const FactorCatalog& catalog) {
  std::vector<std::string> person_ids;
  std::vector<std::string> item_ids;
  std::vector<const LikertScore*> item_targets;
  for (const auto& f : catalog) {
    auto it = targets.targets.find(f.id);
    if (it == targets.targets.end()) {
      throw ConsistencyError("target profile does not cover factor '" + f.id + "'");
    }
    item_ids.push_back(f.id);
    item_targets.push_back(&it->second);
  }

  std::vector<int> cells(records.size() * catalog.size(), CodedMatrix::kMissing);
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& rec = records[n];
    person_ids.push_back(rec.respondent_id);
    for (const auto& [fid, score] : rec.answers) {
      auto i = catalog.index_of(fid);
      if (!i) {
        throw ConsistencyError("respondent '" + rec.respondent_id + "' answered unknown factor '" +
                               fid + "'");
      }
      cells[n * catalog.size() + *i] = code_delta(compute_delta(score, *item_targets[*i])).value();
    }
  }
  CodedMatrix matrix(std::move(person_ids), std::move(item_ids), std::move(cells), kTopCategory);
  matrix.require_calibratable();
  return matrix;
}

/// Mean coded category per item over observed cells; NaN for an item nobody answered.
inline std::vector<double> mean_coded_delta(const CodedMatrix& matrix) {
  std::vector<double> means(matrix.items());
  for (std::size_t i = 0; i < matrix.items(); ++i) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < matrix.persons(); ++n) {
      if (auto v = matrix.at(n, i)) sum += *v, ++count;
    }
    means[i] = count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  }
  return means;
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_ASSESSMENT_HPP
