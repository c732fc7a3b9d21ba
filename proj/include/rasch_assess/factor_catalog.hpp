#ifndef RASCH_ASSESS_FACTOR_CATALOG_HPP
#define RASCH_ASSESS_FACTOR_CATALOG_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rasch_assess/csv.hpp"
#include "rasch_assess/errors.hpp"

namespace rasch_assess {

enum class FactorGroup { Customer, Management, Organization, Process, Team, Tools };

inline constexpr std::array<FactorGroup, 6> kAllGroups = {
    FactorGroup::Customer, FactorGroup::Management, FactorGroup::Organization,
    FactorGroup::Process,  FactorGroup::Team,       FactorGroup::Tools};

inline std::string_view to_string(FactorGroup g) {
  switch (g) {
    case FactorGroup::Customer: return "Customer";
    case FactorGroup::Management: return "Management";
    case FactorGroup::Organization: return "Organization";
    case FactorGroup::Process: return "Process";
    case FactorGroup::Team: return "Team";
    case FactorGroup::Tools: return "Tools";
  }
  return "";
}

/// Case-insensitive lookup against the six group names.
inline std::optional<FactorGroup> parse_group(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::ranges::transform(out, out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string needle = lower(text);
  for (FactorGroup g : kAllGroups) {
    if (lower(to_string(g)) == needle) return g;
  }
  return std::nullopt;
}

/// Lowercases ASCII letters and collapses every run of other characters into
/// one hyphen, trimming hyphens at both ends: "New mindset/roles" -> "new-mindset-roles".
inline std::string slugify(std::string_view name) {
  std::string out;
  bool pending_hyphen = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending_hyphen && !out.empty()) out += '-';
      pending_hyphen = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_hyphen = true;
    }
  }
  return out;
}

struct SuccessFactor {
  std::string id;
  std::string name;
  FactorGroup group;

  friend bool operator==(const SuccessFactor&, const SuccessFactor&) = default;
};

/// Ordered, immutable set of success factors with unique ids.
class FactorCatalog {
 public:
  FactorCatalog() = default;

  explicit FactorCatalog(std::vector<SuccessFactor> factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const auto& f = factors_[i];
      if (f.id.empty()) throw ValidationError("factor " + std::to_string(i + 1) + " has an empty id");
      if (f.name.empty()) throw ValidationError("factor '" + f.id + "' has an empty name");
      if (!index_.emplace(f.id, i).second) throw ValidationError("duplicate factor id '" + f.id + "'");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return factors_.size(); }
  [[nodiscard]] bool empty() const noexcept { return factors_.empty(); }
  [[nodiscard]] const SuccessFactor& operator[](std::size_t i) const { return factors_.at(i); }
  [[nodiscard]] auto begin() const noexcept { return factors_.begin(); }
  [[nodiscard]] auto end() const noexcept { return factors_.end(); }
  [[nodiscard]] const std::vector<SuccessFactor>& factors() const noexcept { return factors_; }

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] bool contains(std::string_view id) const { return index_of(id).has_value(); }
  [[nodiscard]] const SuccessFactor* find(std::string_view id) const {
    auto i = index_of(id);
    return i ? &factors_[*i] : nullptr;
  }

  friend bool operator==(const FactorCatalog& a, const FactorCatalog& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<SuccessFactor> factors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The 23 assessed success factors, declared in the published difficulty order.
inline FactorCatalog default_catalog() {
  using G = FactorGroup;
  static constexpr std::pair<G, std::string_view> kFactors[] = {
      {G::Process, "Measurement model"},
      {G::Organization, "Training"},
      {G::Organization, "Agile champions"},
      {G::Organization, "New mindset/roles"},
      {G::Management, "Changes in management style and decentralized decision making"},
      {G::Team, "Distributed teams"},
      {G::Organization, "Knowledge sharing"},
      {G::Team, "Technical activities/skills"},
      {G::Organization, "Business goals"},
      {G::Process, "Lightweight documentation"},
      {G::Process, "Process is compatible with the organizational context"},
      {G::Team, "Ability to build trustworthy relationships"},
      {G::Team, "Team involvement"},
      {G::Organization, "Incentives/motivation to adopt agile methods"},
      {G::Organization, "Communication flow in the organization"},
      {G::Management, "Management buy-in"},
      {G::Organization, "Coaching/mentoring"},
      {G::Team, "Collaboration"},
      {G::Tools, "Tool set"},
      {G::Organization, "Cultural changes"},
      {G::Management, "Changes in mind set of project managers"},
      {G::Team, "Self-organized teams"},
      {G::Customer, "Customer involvement"},
  };
  std::vector<SuccessFactor> factors;
  factors.reserve(std::size(kFactors));
  for (const auto& [group, name] : kFactors) {
    factors.push_back({slugify(name), std::string(name), group});
  }
  return FactorCatalog(std::move(factors));
}

/// Parses catalog CSV (`id,group,name`). All row problems are collected before throwing.
inline FactorCatalog load_catalog(std::string_view source) {
  auto rows = csv::parse_with_header(source, {"id", "group", "name"});
  std::vector<Finding> findings;
  std::vector<SuccessFactor> factors;
  std::unordered_map<std::string, std::size_t> seen;

  for (const auto& row : rows) {
    if (row.fields.size() != 3) {
      findings.push_back({row.line, "expected 3 fields, found " + std::to_string(row.fields.size())});
      continue;
    }
    const auto& id = row.fields[0];
    const auto& group_text = row.fields[1];
    const auto& name = row.fields[2];
    bool ok = true;
    if (id.empty()) findings.push_back({row.line, "blank id"}), ok = false;
    if (name.empty()) findings.push_back({row.line, "blank name"}), ok = false;
    auto group = parse_group(group_text);
    if (!group) {
      findings.push_back({row.line, group_text.empty() ? "blank group"
                                                       : "unknown group '" + group_text + "'"});
      ok = false;
    }
    if (!id.empty()) {
      auto [it, inserted] = seen.emplace(id, row.line);
      if (!inserted) {
        findings.push_back({row.line, "duplicate id '" + id + "' (first seen on line " +
                                          std::to_string(it->second) + ")"});
        ok = false;
      }
    }
    if (ok) factors.push_back({id, name, *group});
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return FactorCatalog(std::move(factors));
}

inline std::string serialize_catalog(const FactorCatalog& catalog) {
  std::string out = "id,group,name\n";
  for (const auto& f : catalog) {
    out += csv::join({f.id, std::string(to_string(f.group)), f.name});
    out += '\n';
  }
  return out;
}

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_FACTOR_CATALOG_HPP
