#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hamverify/errors.hpp"

namespace hamverify {

/// Identifies the orthonormal basis a coordinate vector is expressed in.
///
/// Sine(N)   : sqrt(2) sin(n pi y), n = 1..N          (dim N)
/// Cosine(N) : 1, sqrt(2) cos(n pi y), n = 1..N       (dim N + 1)
/// Abstract  : an unnamed orthonormal basis of a given dimension
/// Product   : direct sum of the parts, coordinates concatenated in order
class BasisTag {
public:
  enum class Kind { Sine, Cosine, Abstract, Product };

  static BasisTag sine(std::size_t n) { return BasisTag(Kind::Sine, require_positive(n, "Sine"), {}); }
  static BasisTag cosine(std::size_t n) { return BasisTag(Kind::Cosine, n, {}); }
  static BasisTag abstract(std::size_t dim) { return BasisTag(Kind::Abstract, dim, {}); }
  static BasisTag product(std::vector<BasisTag> parts) {
    if (parts.empty()) throw DimensionError("Product basis needs at least one part");
    return BasisTag(Kind::Product, 0, std::move(parts));
  }

  Kind kind() const noexcept { return kind_; }
  const std::vector<BasisTag>& parts() const noexcept { return parts_; }

  std::size_t dim() const {
    switch (kind_) {
      case Kind::Sine: return param_;
      case Kind::Cosine: return param_ + 1;
      case Kind::Abstract: return param_;
      case Kind::Product:
        return std::accumulate(parts_.begin(), parts_.end(), std::size_t{0},
                               [](std::size_t acc, const BasisTag& p) { return acc + p.dim(); });
    }
    return 0;
  }

  /// Mode count for Sine/Cosine, dimension for Abstract, max over parts for Product.
  std::size_t truncation() const {
    if (kind_ != Kind::Product) return param_;
    std::size_t n = 0;
    for (const auto& p : parts_) n = std::max(n, p.truncation());
    return n;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Sine: return "Sine(" + std::to_string(param_) + ")";
      case Kind::Cosine: return "Cosine(" + std::to_string(param_) + ")";
      case Kind::Abstract: return "Abstract(" + std::to_string(param_) + ")";
      case Kind::Product: {
        std::string s = "Product(";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
          if (i) s += ", ";
          s += parts_[i].to_string();
        }
        return s + ")";
      }
    }
    return {};
  }

  bool operator==(const BasisTag&) const = default;

private:
  BasisTag(Kind kind, std::size_t param, std::vector<BasisTag> parts)
      : kind_(kind), param_(param), parts_(std::move(parts)) {}

  static std::size_t require_positive(std::size_t n, const char* name) {
    if (n == 0) throw DimensionError(std::string(name) + " basis needs N >= 1");
    return n;
  }

  Kind kind_;
  std::size_t param_;
  std::vector<BasisTag> parts_;
};

}  // namespace hamverify
