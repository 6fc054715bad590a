#pragma once

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "hamverify/errors.hpp"
#include "hamverify/plate.hpp"

namespace hamverify::plate {

// Line-oriented plate description. One `key = value` per line, `#` starts a
// comment, blank lines are ignored.
//
//   n_modes        = <integer >= 1>
//   span_h         = <real > 0>
//   rigidity_D     = <real > 0>
//   load.mode.<n>  = c0, c1, c2, ...     q_n(x) = sum c_k x^k
//   profile.mode.<n> = c0, c1, ...       manufactured displacement phi_n(x)
//   edge.w0.<n>  / edge.wh.<n>           w_n at x = 0 / x = h
//   edge.dw0.<n> / edge.dwh.<n>          dw_n/dx at x = 0 / x = h
//
// Mode indices must lie in 1..n_modes; n_modes must come before them.

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_real(const std::string& text, const std::string& source, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError(source, line, "expected a number, got '" + t + "'");
  return v;
}

inline std::size_t parse_index(const std::string& text, const std::string& source, std::size_t line) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError(source, line, "expected a non-negative integer, got '" + t + "'");
  return v;
}

inline Polynomial parse_coefficients(const std::string& text, const std::string& source, std::size_t line) {
  std::vector<double> c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) c.push_back(parse_real(item, source, line));
  if (c.empty()) throw ParseError(source, line, "empty coefficient list");
  return Polynomial(std::move(c));
}

}  // namespace detail

inline PlateProblem parse_plate_problem(std::istream& in, const std::string& source = "<config>") {
  PlateProblem p;
  bool have_modes = false;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    auto mode_of = [&](const std::string& prefix) {
      if (!have_modes) throw ParseError(source, lineno, "n_modes must be set before '" + key + "'");
      const std::size_t n = detail::parse_index(key.substr(prefix.size()), source, lineno);
      if (n < 1 || n > p.n_modes)
        throw ParseError(source, lineno, "mode " + std::to_string(n) + " outside 1.." + std::to_string(p.n_modes));
      return n;
    };
    auto starts = [&](const std::string& prefix) { return key.rfind(prefix, 0) == 0; };

    if (key == "n_modes") {
      p.n_modes = detail::parse_index(value, source, lineno);
      if (p.n_modes < 1) throw ParseError(source, lineno, "n_modes must be >= 1");
      have_modes = true;
    } else if (key == "span_h") {
      p.span_h = detail::parse_real(value, source, lineno);
      if (!(p.span_h > 0.0)) throw ParseError(source, lineno, "span_h must be positive");
    } else if (key == "rigidity_D") {
      p.rigidity_D = detail::parse_real(value, source, lineno);
      if (!(p.rigidity_D > 0.0)) throw ParseError(source, lineno, "rigidity_D must be positive");
    } else if (starts("load.mode.")) {
      p.load[mode_of("load.mode.")] = detail::parse_coefficients(value, source, lineno);
    } else if (starts("profile.mode.")) {
      const auto n = mode_of("profile.mode.");
      auto poly = detail::parse_coefficients(value, source, lineno);
      if (poly.degree() > kMaxProfileDegree) throw ParseError(source, lineno, "profile degree exceeds 12");
      p.profile[n] = std::move(poly);
    } else if (starts("edge.w0.")) {
      p.edges[mode_of("edge.w0.")].w0 = detail::parse_real(value, source, lineno);
    } else if (starts("edge.wh.")) {
      p.edges[mode_of("edge.wh.")].wh = detail::parse_real(value, source, lineno);
    } else if (starts("edge.dw0.")) {
      p.edges[mode_of("edge.dw0.")].dw0 = detail::parse_real(value, source, lineno);
    } else if (starts("edge.dwh.")) {
      p.edges[mode_of("edge.dwh.")].dwh = detail::parse_real(value, source, lineno);
    } else {
      throw ParseError(source, lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_modes) throw ParseError(source, lineno, "missing n_modes");
  return p;
}

inline PlateProblem read_plate_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_plate_problem(in, path.string());
}

}  // namespace hamverify::plate
