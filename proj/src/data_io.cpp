#include "demogp/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace demogp {

namespace {

struct RateRecord {
  int year = 0;
  int age = 0;
  bool open_age = false;
  double rate = 0.0;
  bool missing = false;
};

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(strip(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& s, std::size_t line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line_no, "expected integer, got '" + s + "'");
  }
  return v;
}

// Decimal point only; no locale, no thousands separators.
double parse_rate(const std::string& s, std::size_t line_no) {
  if (s.find(',') != std::string::npos) {
    throw ParseError(line_no, "invalid rate '" + s + "'");
  }
  std::size_t consumed = 0;
  double v;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    throw ParseError(line_no, "invalid rate '" + s + "'");
  }
  if (consumed != s.size()) {
    throw ParseError(line_no, "invalid rate '" + s + "'");
  }
  if (v < 0.0) throw ParseError(line_no, "negative rate '" + s + "'");
  return v;
}

void parse_age_field(const std::string& s, std::size_t line_no,
                     RateRecord& rec) {
  std::string body = s;
  if (!body.empty() && body.back() == '+') {
    rec.open_age = true;
    body.pop_back();
  }
  rec.age = parse_int(body, line_no);
  if (rec.age < 0 || rec.age > 120) {
    throw ParseError(line_no, "age out of range: " + s);
  }
}

DemographicSurface densify(const std::vector<RateRecord>& records,
                           SurfaceKind kind) {
  DemographicSurface surface;
  surface.kind = kind;
  std::map<std::pair<int, int>, const RateRecord*> cells;
  for (const auto& rec : records) {
    const auto key = std::make_pair(rec.age, rec.year);
    if (!cells.emplace(key, &rec).second) {
      throw DuplicateCell("duplicate cell at year " + std::to_string(rec.year) +
                          " age " + std::to_string(rec.age));
    }
  }
  std::vector<int> ages, years;
  for (const auto& [key, rec] : cells) {
    ages.push_back(key.first);
    years.push_back(key.second);
  }
  std::sort(ages.begin(), ages.end());
  ages.erase(std::unique(ages.begin(), ages.end()), ages.end());
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());

  surface.ages = ages;
  surface.years = years;
  surface.values.setZero(ages.size(), years.size());
  surface.mask.setConstant(ages.size(), years.size(), true);
  for (std::size_t i = 0; i < ages.size(); ++i) {
    for (std::size_t j = 0; j < years.size(); ++j) {
      const auto it = cells.find({ages[i], years[j]});
      if (it == cells.end() || it->second->missing) continue;
      surface.values(i, j) = it->second->rate;
      surface.mask(i, j) = false;
    }
  }
  return surface;
}

std::vector<RateRecord> parse_canonical(std::istream& input) {
  std::vector<RateRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(input, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const auto fields = split_csv(trimmed);
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "year" || fields[1] != "age" ||
          fields[2] != "rate") {
        throw ParseError(line_no, "expected header 'year,age,rate'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields");
    }
    RateRecord rec;
    rec.year = parse_int(fields[0], line_no);
    parse_age_field(fields[1], line_no, rec);
    if (fields[2].empty()) {
      rec.missing = true;
    } else {
      rec.rate = parse_rate(fields[2], line_no);
    }
    if (rec.year < 1800 || rec.year > 2200) {
      throw ParseError(line_no, "year out of range");
    }
    records.push_back(rec);
  }
  if (!header_seen) throw ParseError(0, "empty input, header required");
  return records;
}

std::vector<RateRecord> parse_hmd(std::istream& input,
                                  const std::string& column) {
  std::vector<RateRecord> records;
  std::string line;
  std::size_t line_no = 0;
  int rate_column = -1;  // index into the tokens of a data line
  while (std::getline(input, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (rate_column < 0) {
      if (tokens[0] == "Year") {
        for (std::size_t i = 2; i < tokens.size(); ++i) {
          if (tokens[i] == column) rate_column = static_cast<int>(i);
        }
        if (rate_column < 0) {
          throw ParseError(line_no, "rate column '" + column +
                                        "' not found in header");
        }
      }
      continue;  // preamble before the header line
    }
    if (tokens.size() <= static_cast<std::size_t>(rate_column)) {
      throw ParseError(line_no, "short data line");
    }
    RateRecord rec;
    rec.year = parse_int(tokens[0], line_no);
    parse_age_field(tokens[1], line_no, rec);
    const std::string& value = tokens[rate_column];
    if (value == ".") {
      rec.missing = true;
    } else {
      rec.rate = parse_rate(value, line_no);
    }
    if (rec.year < 1800 || rec.year > 2200) {
      throw ParseError(line_no, "year out of range");
    }
    records.push_back(rec);
  }
  if (rate_column < 0) {
    throw ParseError(line_no, "no 'Year Age ...' header line found");
  }
  return records;
}

}  // namespace

SurfaceKind surface_kind_from_name(const std::string& name) {
  if (name == "mortality") return SurfaceKind::kMortality;
  if (name == "fertility") return SurfaceKind::kFertility;
  throw std::invalid_argument("unknown kind: " + name);
}

std::string surface_kind_name(SurfaceKind kind) {
  return kind == SurfaceKind::kMortality ? "mortality" : "fertility";
}

int DemographicSurface::age_index(int age) const {
  const auto it = std::lower_bound(ages.begin(), ages.end(), age);
  if (it == ages.end() || *it != age) return -1;
  return static_cast<int>(it - ages.begin());
}

int DemographicSurface::year_index(int year) const {
  const auto it = std::lower_bound(years.begin(), years.end(), year);
  if (it == years.end() || *it != year) return -1;
  return static_cast<int>(it - years.begin());
}

DemographicSurface parse_rates(std::istream& input, RateFormat format,
                               const std::string& column, SurfaceKind kind) {
  const auto records = format == RateFormat::kCanonicalCsv
                           ? parse_canonical(input)
                           : parse_hmd(input, column);
  return densify(records, kind);
}

void write_canonical_csv(std::ostream& out, const DemographicSurface& surface) {
  out << "year,age,rate\n";
  std::ostringstream num;
  num.precision(17);
  for (int j = 0; j < surface.year_count(); ++j) {
    for (int i = 0; i < surface.age_count(); ++i) {
      out << surface.years[j] << ',' << surface.ages[i] << ',';
      if (!surface.mask(i, j)) {
        num.str("");
        num << surface.values(i, j);
        out << num.str();
      }
      out << '\n';
    }
  }
}

DemographicSurface log_transform(const DemographicSurface& surface) {
  DemographicSurface out = surface;
  for (int i = 0; i < out.age_count(); ++i) {
    for (int j = 0; j < out.year_count(); ++j) {
      if (out.mask(i, j)) continue;
      if (out.values(i, j) <= 0.0) {
        out.values(i, j) = 0.0;
        out.mask(i, j) = true;
      } else {
        out.values(i, j) = std::log(out.values(i, j));
      }
    }
  }
  return out;
}

DemographicSurface truncate_ages(const DemographicSurface& surface,
                                 SurfaceKind kind) {
  const int lo = kind == SurfaceKind::kMortality ? 0 : 15;
  const int hi = kind == SurfaceKind::kMortality ? 100 : 45;
  std::vector<int> keep;
  for (int i = 0; i < surface.age_count(); ++i) {
    if (surface.ages[i] >= lo && surface.ages[i] <= hi) keep.push_back(i);
  }
  for (int age = lo; age <= hi; ++age) {
    if (surface.age_index(age) < 0) {
      throw MissingAgeRange("age " + std::to_string(age) +
                            " absent from surface");
    }
  }
  DemographicSurface out;
  out.kind = kind;
  out.years = surface.years;
  out.ages.reserve(keep.size());
  out.values.resize(keep.size(), surface.year_count());
  out.mask.resize(keep.size(), surface.year_count());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.ages.push_back(surface.ages[keep[r]]);
    out.values.row(r) = surface.values.row(keep[r]);
    out.mask.row(r) = surface.mask.row(keep[r]);
  }
  return out;
}

}  // namespace demogp
