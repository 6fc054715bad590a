#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hamverify {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class BasisMismatch : public Error {
public:
  using Error::Error;
};

class NotHermitian : public Error {
public:
  NotHermitian(const std::string& what, double deviation)
      : Error(what + " (relative deviation " + std::to_string(deviation) + ")"),
        deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

private:
  double deviation_;
};

class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string& what, std::size_t iterations = 0)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

private:
  std::size_t iterations_;
};

/// Malformed input; carries the 1-based line number (0 if not line-bound).
class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// The shifted operator is numerically singular at the requested point.
class LambdaInSpectrum : public Error {
public:
  LambdaInSpectrum(const std::string& what, double margin)
      : Error(what + " (singular-value margin " + std::to_string(margin) + ")"),
        margin_(margin) {}
  double margin() const noexcept { return margin_; }

private:
  double margin_;
};

class NotAccretive : public Error {
public:
  NotAccretive(const std::string& what, double min_real_part)
      : Error(what + " (min real part " + std::to_string(min_real_part) + ")"),
        min_real_part_(min_real_part) {}
  double min_real_part() const noexcept { return min_real_part_; }

private:
  double min_real_part_;
};

class NotNested : public Error {
public:
  using Error::Error;
};

class StructureMismatch : public Error {
public:
  using Error::Error;
};

class NotAnEigenvalue : public Error {
public:
  using Error::Error;
};

class DegreeTooHigh : public Error {
public:
  using Error::Error;
};

class QuadratureFailure : public Error {
public:
  using Error::Error;
};

class IllPosed : public Error {
public:
  using Error::Error;
};

class MissingReport : public Error {
public:
  using Error::Error;
};

}  // namespace hamverify
