#include "cran/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cran/errors.hpp"

namespace cran {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw InvalidArgument("row width does not match the header");
  rows.push_back(std::move(row));
}

namespace {

double parse_number(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

double Table::number(std::size_t row, const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw InvalidArgument("no column '" + name + "'");
  const Cell& cell = rows.at(row)[c];
  if (std::holds_alternative<std::monostate>(cell)) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return parse_number(std::get<std::string>(cell));
}

std::string Table::text(std::size_t row, const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw InvalidArgument("no column '" + name + "'");
  return format_cell(rows.at(row)[c]);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += quote(t.columns[i]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote(format_cell(row[i]));
    }
    out += "\r\n";
  }
  return out;
}

void write_csv(const std::string& path, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << to_csv(t);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  int line = 1;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\r' && text[i] != '\n')
          throw InvalidArgument("line " + std::to_string(line) + ": text after closing quote");
        continue;
      }
      if (ch == '\n') ++line;
      field += ch;
      ++i;
      continue;
    }
    if (ch == '"') {
      if (field_started || !field.empty())
        throw InvalidArgument("line " + std::to_string(line) + ": quote inside unquoted field");
      quoted = true;
      field_started = true;
      ++i;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
      ++i;
    } else if (ch == '\r' || ch == '\n') {
      end_record();
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      ++line;
    } else {
      field += ch;
      field_started = true;
      ++i;
    }
  }
  if (quoted) throw InvalidArgument("line " + std::to_string(line) + ": unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  Table t;
  if (records.empty()) throw InvalidArgument("line 1: missing header");
  t.columns = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns.size())
      throw InvalidArgument("line " + std::to_string(r + 1) + ": expected " +
                            std::to_string(t.columns.size()) + " fields, found " +
                            std::to_string(records[r].size()));
    std::vector<Cell> row;
    for (auto& s : records[r]) row.emplace_back(s.empty() ? Cell{} : Cell{std::move(s)});
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

Table aggregate(const Table& raw, const std::vector<std::string>& keys,
                const std::vector<std::string>& values) {
  for (const auto& k : keys)
    if (!raw.has_column(k)) throw InvalidArgument("aggregate: no key column '" + k + "'");
  for (const auto& v : values)
    if (!raw.has_column(v)) throw InvalidArgument("aggregate: no value column '" + v + "'");

  Table out;
  out.columns = keys;
  out.columns.push_back("n");
  for (const auto& v : values) {
    out.columns.push_back(v + "_mean");
    out.columns.push_back(v + "_std");
  }

  std::vector<std::vector<std::string>> group_keys;
  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<std::string> key;
    for (const auto& k : keys) key.push_back(raw.text(r, k));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) group_keys.push_back(key);
    it->second.push_back(r);
  }

  for (const auto& key : group_keys) {
    const auto& members = groups.at(key);
    std::vector<Cell> row;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const Cell& first = raw.rows[members.front()][raw.column(keys[i])];
      row.push_back(first);
    }
    row.emplace_back(static_cast<std::int64_t>(members.size()));
    for (const auto& v : values) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t r : members) {
        const double x = raw.number(r, v);
        if (std::isnan(x)) continue;
        sum += x;
        ++n;
      }
      if (n == 0) {
        row.emplace_back();
        row.emplace_back();
        continue;
      }
      const double mean = sum / n;
      double ss = 0.0;
      for (std::size_t r : members) {
        const double x = raw.number(r, v);
        if (!std::isnan(x)) ss += (x - mean) * (x - mean);
      }
      row.emplace_back(mean);
      row.emplace_back(n > 1 ? std::sqrt(ss / (n - 1)) : 0.0);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace cran
