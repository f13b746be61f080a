#pragma once

// Minimal RFC-4180 CSV reading and writing, plus the loaders for
// `index,p_value[,label]` and `index,statistic[,label]` files.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "ordfdr/series.hpp"

namespace ordfdr::csv {

using Row = std::vector<std::string>;

/// Parse a whole document. Quoted fields may contain commas, doubled quotes
/// and line breaks. CRLF and LF line endings are both accepted.
inline std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw Error("csv: unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

inline std::string escape(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    (write_field(fields, first), ...);
    out_ << "\r\n";
  }

 private:
  void sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }
  void write_field(std::string_view s, bool& first) {
    sep(first);
    out_ << escape(s);
  }
  void write_field(const std::string& s, bool& first) { write_field(std::string_view(s), first); }
  void write_field(const char* s, bool& first) { write_field(std::string_view(s), first); }
  void write_field(double x, bool& first) {
    sep(first);
    out_ << format_double(x);
  }
  template <class I>
    requires std::is_integral_v<I>
  void write_field(I x, bool& first) {
    sep(first);
    out_ << x;
  }

  std::ostream& out_;
};

inline double parse_double(const std::string& s, std::size_t line, std::string_view what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw Error("line " + std::to_string(line) + ": malformed " + std::string(what) + " '" + s + "'");
  return v;
}

/// Contents of an ordered input file: p-values or statistics, never both.
using OrderedInput = std::variant<PValueSeries, StatSeries>;

/// Load `index,p_value[,label]` or `index,statistic[,label]`. Indices must
/// run 1..m without gaps.
inline OrderedInput parse_ordered(std::string_view text, double clamp_epsilon = kDefaultClampEpsilon) {
  const std::vector<Row> rows = parse(text);
  if (rows.empty()) throw Error("no rows");
  const Row& h = rows.front();
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == ' ')) s.pop_back();
    while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
    return s;
  };
  if (h.size() < 2 || h.size() > 3 || trim(h[0]) != "index")
    throw Error("header must be index,p_value[,label] or index,statistic[,label]");
  const std::string kind = trim(h[1]);
  if (kind != "p_value" && kind != "statistic")
    throw Error("header must be index,p_value[,label] or index,statistic[,label]");
  const bool has_labels = h.size() == 3;
  if (has_labels && trim(h[2]) != "label") throw Error("third column must be 'label'");
  if (rows.size() == 1) throw Error("no rows");

  std::vector<double> values;
  Labels labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != h.size())
      throw Error("line " + std::to_string(line) + ": expected " + std::to_string(h.size()) +
                  " fields, got " + std::to_string(row.size()));
    const double idx = parse_double(row[0], line, "index");
    if (idx != static_cast<double>(r))
      throw Error("line " + std::to_string(line) + ": indices must be contiguous starting at 1 (got " +
                  row[0] + ")");
    values.push_back(parse_double(row[1], line, kind));
    if (has_labels) labels.push_back(parse_label(trim(row[2])));
  }
  std::optional<Labels> lab;
  if (has_labels) lab = std::move(labels);
  if (kind == "p_value") return PValueSeries(std::move(values), std::move(lab), clamp_epsilon);
  return StatSeries(std::move(values), std::move(lab));
}

inline OrderedInput load_ordered(const std::string& path, double clamp_epsilon = kDefaultClampEpsilon) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ordered(ss.str(), clamp_epsilon);
}

}  // namespace ordfdr::csv
