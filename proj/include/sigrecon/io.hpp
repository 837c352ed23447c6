#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "core.hpp"
#include "sample_path.hpp"
#include "trajectory.hpp"

namespace sigrecon {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// "# config_hash=<hex> seed=<seed>" comment line written above CSV headers.
inline std::string provenance_line(std::uint64_t config_hash, const std::string& seed) {
  return "# config_hash=" + hex64(config_hash) + " seed=" + seed + "\n";
}

/// Path CSV: optional comment lines, header t,x1,...,xN, one row per sample.
inline std::string path_to_csv(const SamplePath& p, const std::string& comment = "") {
  std::string out = comment;
  out += "t";
  for (std::size_t j = 0; j < p.dim(); ++j) out += ",x" + std::to_string(j + 1);
  out += "\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += format_double(p.time(i));
    for (std::size_t j = 0; j < p.dim(); ++j) {
      out += ',';
      out += format_double(p.coord(i, j));
    }
    out += '\n';
  }
  return out;
}

inline SamplePath path_from_csv(const std::string& text, const std::string& where = "path csv") {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t N = 0;
  bool header = false;
  std::vector<double> times, coords;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (;;) {
      auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::string at = where + " line " + std::to_string(lineno);
    if (!header) {
      if (cells.size() < 2 || cells[0] != "t") throw InvalidInput(at + ": expected header t,x1,...");
      for (std::size_t j = 1; j < cells.size(); ++j)
        if (cells[j] != "x" + std::to_string(j))
          throw InvalidInput(at + ": expected column x" + std::to_string(j));
      N = cells.size() - 1;
      header = true;
      continue;
    }
    if (cells.size() != N + 1)
      throw InvalidInput(at + ": expected " + std::to_string(N + 1) + " columns");
    times.push_back(parse_double(cells[0], at));
    for (std::size_t j = 1; j <= N; ++j) coords.push_back(parse_double(cells[j], at));
  }
  if (!header) throw InvalidInput(where + ": missing header");
  return SamplePath(std::move(times), std::move(coords), N);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error("write to '" + path + "' failed");
}

inline nlohmann::json plt_to_json(const PLT& T) { return T.points(); }

inline PLT plt_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidInput("PLT JSON must be an array of points");
  std::vector<Point> pts;
  for (const auto& p : j) {
    if (!p.is_array()) throw InvalidInput("PLT JSON: every point must be an array of numbers");
    pts.push_back(p.get<Point>());
  }
  return PLT(std::move(pts));
}

}  // namespace sigrecon
