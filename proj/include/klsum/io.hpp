#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "klsum/discrepancy.hpp"
#include "klsum/version.hpp"

// Artifact serialization.  Tables carry an ordered # key=value metadata
// preamble (parameters and tool version; never anything run-dependent like
// thread counts or wall time), so a fixed manifest and seed produce
// byte-identical files.  Numeric cells are pre-formatted by the writers:
// doubles as shortest round-trip strings, exact rationals as "num/den".

namespace klsum::io {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_rational(const ExactRational& r) {
  const auto q = r.reduced();
  return std::to_string(q.num) + "/" + std::to_string(q.den);
}

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;  // emitted in order
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_meta(std::string key, std::string value) {
    meta.emplace_back(std::move(key), std::move(value));
  }
  void add_meta(std::string key, double value) {
    meta.emplace_back(std::move(key), format_double(value));
  }
  void add_meta(std::string key, u64 value) {
    meta.emplace_back(std::move(key), std::to_string(value));
  }
  void add_meta(std::string key, i64 value) {
    meta.emplace_back(std::move(key), std::to_string(value));
  }
};

inline std::string csv_text(const Table& t) {
  std::string out;
  out += "# tool=klsum\n# version=";
  out += kVersion;
  out += '\n';
  for (const auto& [k, v] : t.meta) out += "# " + k + "=" + v + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

inline std::string json_text(const Table& t) {
  nlohmann::ordered_json j;
  j["meta"]["tool"] = "klsum";
  j["meta"]["version"] = kVersion;
  for (const auto& [k, v] : t.meta) j["meta"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j.dump(2) + "\n";
}

// Write through a sibling temp file and rename over the target, so readers
// never observe a half-written artifact.
inline void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("io: cannot open " + tmp);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) throw std::runtime_error("io: short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("io: cannot rename " + tmp + " to " + path);
}

}  // namespace klsum::io
