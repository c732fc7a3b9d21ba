#ifndef RASCH_ASSESS_CODED_MATRIX_HPP
#define RASCH_ASSESS_CODED_MATRIX_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rasch_assess/errors.hpp"

namespace rasch_assess {

/// Where an observed response vector sits relative to the category range.
enum class Extremity {
  None,     // at least one interior observation
  Minimum,  // every observed cell is 0
  Maximum,  // every observed cell is the top category
  NoData,   // no observed cells
};

inline const char* to_string(Extremity e) {
  switch (e) {
    case Extremity::None: return "none";
    case Extremity::Minimum: return "minimum";
    case Extremity::Maximum: return "maximum";
    case Extremity::NoData: return "no-data";
  }
  return "";
}

/// Persons x items grid of ordinal categories in [0, top_category], with
/// missing cells. Immutable after construction. Extremity of every row and
/// column is computed on construction.
class CodedMatrix {
 public:
  static constexpr int kMissing = -1;

  CodedMatrix(std::vector<std::string> person_ids, std::vector<std::string> item_ids,
              std::vector<int> cells, int top_category)
      : person_ids_(std::move(person_ids)),
        item_ids_(std::move(item_ids)),
        cells_(std::move(cells)),
        top_(top_category) {
    if (top_ < 1) throw ValidationError("top category must be at least 1");
    if (cells_.size() != person_ids_.size() * item_ids_.size()) {
      throw ValidationError("cell count " + std::to_string(cells_.size()) +
                            " does not match " + std::to_string(person_ids_.size()) + " persons x " +
                            std::to_string(item_ids_.size()) + " items");
    }
    for (int v : cells_) {
      if (v != kMissing && (v < 0 || v > top_)) {
        throw ValidationError("cell value " + std::to_string(v) + " outside 0.." +
                              std::to_string(top_));
      }
    }
    person_extremity_.resize(persons());
    item_extremity_.resize(items());
    for (std::size_t n = 0; n < persons(); ++n) person_extremity_[n] = classify(n, true);
    for (std::size_t i = 0; i < items(); ++i) item_extremity_[i] = classify(i, false);
  }

  /// Builds from nested rows; std::nullopt marks a missing cell.
  static CodedMatrix from_rows(const std::vector<std::vector<std::optional<int>>>& rows,
                               int top_category) {
    const std::size_t n_items = rows.empty() ? 0 : rows.front().size();
    std::vector<std::string> pids, iids;
    std::vector<int> cells;
    for (std::size_t n = 0; n < rows.size(); ++n) {
      if (rows[n].size() != n_items) throw ValidationError("ragged rows");
      pids.push_back("p" + std::to_string(n + 1));
      for (const auto& c : rows[n]) cells.push_back(c.value_or(kMissing));
    }
    for (std::size_t i = 0; i < n_items; ++i) iids.push_back("i" + std::to_string(i + 1));
    return CodedMatrix(std::move(pids), std::move(iids), std::move(cells), top_category);
  }

  [[nodiscard]] std::size_t persons() const noexcept { return person_ids_.size(); }
  [[nodiscard]] std::size_t items() const noexcept { return item_ids_.size(); }
  [[nodiscard]] int top_category() const noexcept { return top_; }
  [[nodiscard]] const std::vector<std::string>& person_ids() const noexcept { return person_ids_; }
  [[nodiscard]] const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }

  /// Raw cell value, kMissing when absent.
  [[nodiscard]] int raw(std::size_t person, std::size_t item) const {
    return cells_[person * items() + item];
  }
  [[nodiscard]] std::optional<int> at(std::size_t person, std::size_t item) const {
    int v = raw(person, item);
    if (v == kMissing) return std::nullopt;
    return v;
  }
  [[nodiscard]] bool observed(std::size_t person, std::size_t item) const {
    return raw(person, item) != kMissing;
  }

  [[nodiscard]] Extremity person_extremity(std::size_t n) const { return person_extremity_[n]; }
  [[nodiscard]] Extremity item_extremity(std::size_t i) const { return item_extremity_[i]; }
  [[nodiscard]] bool person_extreme(std::size_t n) const {
    return person_extremity_[n] != Extremity::None;
  }
  [[nodiscard]] bool item_extreme(std::size_t i) const {
    return item_extremity_[i] != Extremity::None;
  }

  [[nodiscard]] std::size_t missing_count() const {
    std::size_t count = 0;
    for (int v : cells_) count += v == kMissing;
    return count;
  }

  /// True when at least two persons and two items have an interior response pattern.
  [[nodiscard]] bool calibratable() const {
    std::size_t p = 0, i = 0;
    for (auto e : person_extremity_) p += e == Extremity::None;
    for (auto e : item_extremity_) i += e == Extremity::None;
    return p >= 2 && i >= 2;
  }

  void require_calibratable() const {
    std::size_t p = 0, i = 0;
    for (auto e : person_extremity_) p += e == Extremity::None;
    for (auto e : item_extremity_) i += e == Extremity::None;
    if (p < 2 || i < 2) {
      throw InsufficientDataError("insufficient data: " + std::to_string(p) +
                                  " non-extreme persons and " + std::to_string(i) +
                                  " non-extreme items (need at least 2 of each)");
    }
  }

  friend bool operator==(const CodedMatrix& a, const CodedMatrix& b) {
    return a.person_ids_ == b.person_ids_ && a.item_ids_ == b.item_ids_ && a.cells_ == b.cells_ &&
           a.top_ == b.top_;
  }

 private:
  Extremity classify(std::size_t index, bool by_person) const {
    bool any = false, all_min = true, all_max = true;
    const std::size_t len = by_person ? items() : persons();
    for (std::size_t k = 0; k < len; ++k) {
      int v = by_person ? raw(index, k) : raw(k, index);
      if (v == kMissing) continue;
      any = true;
      all_min = all_min && v == 0;
      all_max = all_max && v == top_;
    }
    if (!any) return Extremity::NoData;
    if (all_min) return Extremity::Minimum;
    if (all_max) return Extremity::Maximum;
    return Extremity::None;
  }

  std::vector<std::string> person_ids_;
  std::vector<std::string> item_ids_;
  std::vector<int> cells_;
  int top_;
  std::vector<Extremity> person_extremity_;
  std::vector<Extremity> item_extremity_;
};

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_CODED_MATRIX_HPP
