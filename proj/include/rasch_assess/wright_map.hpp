#ifndef RASCH_ASSESS_WRIGHT_MAP_HPP
#define RASCH_ASSESS_WRIGHT_MAP_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "rasch_assess/calibration.hpp"

namespace rasch_assess {

inline constexpr double kWrightBinWidth = 0.25;
inline constexpr std::size_t kWrightMaxMarks = 40;

/// Bin holding a logit: the nearest multiple of the bin width.
inline long wright_bin(double logit) { return std::lround(logit / kWrightBinWidth); }

/// Person-item map on a shared logit axis, highest logits first. Each row is a
/// 0.25-logit bin: person counts as '#' marks on the left, item ids on the
/// right. Extreme persons and items are listed under the axis.
inline std::string wright_map(const CalibrationResult& result) {
  std::map<long, std::size_t, std::greater<>> person_bins;
  std::map<long, std::vector<std::string>, std::greater<>> item_bins;
  std::vector<std::string> extreme_persons, extreme_items;

  for (const auto& p : result.persons) {
    if (p.extreme || !std::isfinite(p.measure)) {
      extreme_persons.push_back(p.person_id);
    } else {
      ++person_bins[wright_bin(p.measure)];
    }
  }
  for (const auto& it : result.items) {
    if (it.extreme || !std::isfinite(it.difficulty)) {
      extreme_items.push_back(it.item_id);
    } else {
      item_bins[wright_bin(it.difficulty)].push_back(it.item_id);
    }
  }

  std::string out;
  if (person_bins.empty() && item_bins.empty()) {
    out += "(nothing to plot)\n";
  } else {
    long hi = std::numeric_limits<long>::min(), lo = std::numeric_limits<long>::max();
    std::size_t max_count = 1;
    for (const auto& [bin, count] : person_bins) {
      hi = std::max(hi, bin), lo = std::min(lo, bin), max_count = std::max(max_count, count);
    }
    for (const auto& [bin, ids] : item_bins) hi = std::max(hi, bin), lo = std::min(lo, bin);
    const std::size_t per_mark = (max_count + kWrightMaxMarks - 1) / kWrightMaxMarks;
    const std::size_t width = std::max<std::size_t>((max_count + per_mark - 1) / per_mark, 7);

    char buf[64];
    std::snprintf(buf, sizeof buf, "%7s %*s | %s\n", "logit", static_cast<int>(width), "persons", "items");
    out += buf;
    out += std::string(8 + width, '-') + "-+-" + std::string(10, '-') + "\n";
    for (long bin = hi; bin >= lo; --bin) {
      std::string marks;
      if (auto it = person_bins.find(bin); it != person_bins.end()) {
        marks.assign((it->second + per_mark - 1) / per_mark, '#');
      }
      std::string items;
      if (auto it = item_bins.find(bin); it != item_bins.end()) {
        for (const auto& id : it->second) items += (items.empty() ? "" : " ") + id;
      }
      double label = static_cast<double>(bin) * kWrightBinWidth;
      if (label == 0.0) label = 0.0;
      std::snprintf(buf, sizeof buf, "%7.2f %*s | ", label, static_cast<int>(width), marks.c_str());
      out += buf + items;
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '\n';
    }
    out += "each '#' is " + std::to_string(per_mark) + (per_mark == 1 ? " person" : " persons") + "\n";
  }
  if (person_bins.empty()) out += "no non-extreme persons to plot\n";

  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
    return s;
  };
  if (!extreme_persons.empty()) out += "excluded persons (extreme): " + list(extreme_persons) + "\n";
  if (!extreme_items.empty()) out += "excluded items (extreme): " + list(extreme_items) + "\n";
  return out;
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_WRIGHT_MAP_HPP
