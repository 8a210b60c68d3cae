#include "a2grad/record.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace a2grad {

namespace {

std::string to_chars_string(Real v, std::optional<int> precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res =
      precision ? std::to_chars(buf, buf + sizeof buf, v,
                                std::chars_format::general, *precision)
                : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

const std::string& run_csv_header() {
  static const std::string header =
      "k,f_reported,suboptimality,f_practice,h_inf,alpha,gamma,step_min,"
      "step_max,wall_nanos";
  return header;
}

std::string format_real(Real v) { return to_chars_string(v, 17); }

std::string format_real_shortest(Real v) {
  return to_chars_string(v, std::nullopt);
}

Real parse_real(const std::string& text) {
  if (text == "nan") return std::numeric_limits<Real>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<Real>::infinity();
  if (text == "-inf") return -std::numeric_limits<Real>::infinity();
  Real v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("malformed number '" + text + "'");
  }
  return v;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  out << kCsvSchemaTag << '\n' << run_csv_header() << '\n';
  for (const auto& r : record.rows) {
    out << r.k << ',' << format_real(r.f_reported) << ','
        << (r.suboptimality ? format_real(*r.suboptimality) : std::string())
        << ',' << format_real(r.f_practice) << ',' << format_real(r.h_inf)
        << ',' << format_real(r.alpha) << ',' << format_real(r.gamma) << ','
        << format_real(r.step_min) << ',' << format_real(r.step_max) << ','
        << r.wall_nanos << '\n';
  }
}

RunRecord read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvSchemaTag) {
    throw ConfigError("run CSV: missing schema tag '" +
                      std::string(kCsvSchemaTag) + "'");
  }
  if (!std::getline(in, line) || line != run_csv_header()) {
    throw ConfigError("run CSV: unexpected header");
  }
  RunRecord record;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) {
      throw ConfigError("run CSV line " + std::to_string(line_no) +
                        ": expected 10 fields");
    }
    RunRecordRow r;
    r.k = std::stoull(f[0]);
    r.f_reported = parse_real(f[1]);
    if (!f[2].empty()) r.suboptimality = parse_real(f[2]);
    r.f_practice = parse_real(f[3]);
    r.h_inf = parse_real(f[4]);
    r.alpha = parse_real(f[5]);
    r.gamma = parse_real(f[6]);
    r.step_min = parse_real(f[7]);
    r.step_max = parse_real(f[8]);
    r.wall_nanos = std::stoll(f[9]);
    record.rows.push_back(r);
  }
  return record;
}

}  // namespace a2grad
