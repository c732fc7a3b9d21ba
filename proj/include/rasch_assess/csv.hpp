#ifndef RASCH_ASSESS_CSV_HPP
#define RASCH_ASSESS_CSV_HPP

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rasch_assess/errors.hpp"

namespace rasch_assess::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Splits comma-separated text into records. Double-quoted fields may contain
/// commas, doubled quotes and line breaks. LF and CRLF are both accepted and a
/// leading UTF-8 byte order mark is skipped. Blank lines are dropped.
inline std::vector<Row> parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    bool blank = row.fields.empty() && field.empty() && !field_started;
    if (!blank) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = Row{};
    row.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field += c;
        }
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
    }
  }
  if (in_quotes) {
    throw ValidationError({Finding{row.line, "unterminated quoted field"}});
  }
  end_record();
  return rows;
}

/// Quotes a field when it contains a comma, quote or line break.
inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

/// Strict base-10 integer: optional leading minus, digits only, no padding or spaces.
inline std::optional<int> parse_int(std::string_view s) {
  if (s.empty() || s.front() == '+') return std::nullopt;
  std::string_view digits = s.front() == '-' ? s.substr(1) : s;
  if (digits.empty() || (digits.size() > 1 && digits.front() == '0')) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Checks the header row exactly (after trimming nothing) and returns the data rows.
inline std::vector<Row> parse_with_header(std::string_view text,
                                          const std::vector<std::string>& header) {
  auto rows = parse(text);
  if (rows.empty()) {
    throw ValidationError({Finding{1, "missing header, expected '" + join(header) + "'"}});
  }
  if (rows.front().fields != header) {
    throw ValidationError({Finding{rows.front().line, "bad header '" + join(rows.front().fields) +
                                                          "', expected '" + join(header) + "'"}});
  }
  rows.erase(rows.begin());
  return rows;
}

}  // namespace rasch_assess::csv

#endif  // RASCH_ASSESS_CSV_HPP
