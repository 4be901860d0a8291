#pragma once

// Text output: 12 significant digits in files, 6 decimals on the console.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amdp/errors.hpp"
#include "amdp/mdp.hpp"
#include "amdp/reduction.hpp"

namespace amdp {

inline std::string format_file(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string format_console(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string format_console(const Vector& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_console(v(i));
  }
  return out + ")";
}

inline std::string format_policy(const DeterministicPolicy& pi) {
  std::string out = "[";
  for (std::size_t i = 0; i < pi.actions.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(pi.actions[i]);
  }
  return out + "]";
}

/// JSON array of the vector, entries at 12 significant digits (infinities as
/// strings, which JSON cannot represent as numbers).
inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) arr.push_back(std::stod(format_file(v(i))));
    else arr.push_back(format_file(v(i)));
  }
  return arr;
}

inline nlohmann::json number_to_json(double x) {
  if (std::isfinite(x)) return std::stod(format_file(x));
  return format_file(x);
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

/// CSV with header instance_id,name,lhs,rhs,tolerance,passed and LF endings.
inline std::string certificates_csv(const std::vector<Certificate>& certs) {
  std::ostringstream out;
  out << "instance_id,name,lhs,rhs,tolerance,passed\n";
  for (const auto& c : certs) {
    out << c.instance_id << ',' << c.name << ',' << format_file(c.lhs) << ','
        << format_file(c.rhs) << ',' << format_file(c.tolerance) << ','
        << (c.passed ? "true" : "false") << '\n';
  }
  return out.str();
}

inline nlohmann::json certificates_json(const std::vector<Certificate>& certs) {
  nlohmann::json arr = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& c : certs) {
    arr.push_back({{"instance_id", c.instance_id},
                   {"name", c.name},
                   {"lhs", number_to_json(c.lhs)},
                   {"rhs", number_to_json(c.rhs)},
                   {"tolerance", number_to_json(c.tolerance)},
                   {"passed", c.passed}});
    if (!c.passed) ++failed;
  }
  return {{"certificates", std::move(arr)},
          {"total", certs.size()},
          {"failed", failed}};
}

}  // namespace amdp
