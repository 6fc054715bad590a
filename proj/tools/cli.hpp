#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hamverify/errors.hpp"
#include "hamverify/operator.hpp"

namespace hamverify::cli {

enum class Command { Validate, Factorize, Criteria, Bounds, PlateSpectrum, PlateSolve, PlateVerify, Render };
enum class Format { Json, Csv, Both };

const char* to_string(Command c);

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

/// Bad command line or inconsistent configuration.
class InputError : public Error {
public:
  using Error::Error;
};

struct RunConfig {
  Command command = Command::Validate;
  std::optional<std::string> builtin;  ///< plate | example31 | random
  std::size_t modes = 16;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> a, b, c, d;
  std::optional<std::filesystem::path> config;
  std::vector<Scalar> lambdas;
  std::vector<std::size_t> n_schedule;
  std::vector<double> lambda_schedule;
  std::optional<double> tol;
  std::filesystem::path out = ".";
  Format format = Format::Both;
  std::vector<std::filesystem::path> reports;  ///< render inputs

  bool has_files() const { return a || b || c || d; }
};

/// Complex literal: "2", "-1.5", "i", "-i", "3i", "0.5+2i", "1e-3-4i".
Scalar parse_complex(const std::string& text);
std::vector<Scalar> parse_complex_list(const std::string& text);

/// Parses argv into a validated config. Throws InputError.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes one command and writes its artifacts. Returns the exit code.
int run(const RunConfig& config, std::ostream& log);

/// parse_args + run with every failure mapped onto the exit-code contract.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hamverify::cli
