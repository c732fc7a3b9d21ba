#ifndef RASCH_ASSESS_ERRORS_HPP
#define RASCH_ASSESS_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rasch_assess {

/// One problem found while validating an input, e.g. "line 4: score 6 is outside 1..5".
struct Finding {
  std::size_t line = 0;  // 1-based source line, 0 when not tied to a line
  std::string message;

  [[nodiscard]] std::string to_string() const {
    return line == 0 ? message : "line " + std::to_string(line) + ": " + message;
  }
};

/// Input failed validation. Carries every finding collected before giving up.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Finding> findings)
      : std::runtime_error(join(findings)), findings_(std::move(findings)) {}
  explicit ValidationError(const std::string& message)
      : ValidationError(std::vector<Finding>{Finding{0, message}}) {}

  [[nodiscard]] const std::vector<Finding>& findings() const noexcept { return findings_; }

 private:
  static std::string join(const std::vector<Finding>& findings) {
    std::string out;
    for (const auto& f : findings) {
      if (!out.empty()) out += "; ";
      out += f.to_string();
    }
    return out;
  }

  std::vector<Finding> findings_;
};

/// Too few estimable persons, items or categories to calibrate.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two inputs that must describe the same items disagree.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A residual was requested for a cell with zero model variance.
class DegenerateCellError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace rasch_assess

#endif  // RASCH_ASSESS_ERRORS_HPP
