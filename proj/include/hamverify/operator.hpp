#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hamverify/basis.hpp"
#include "hamverify/errors.hpp"

namespace hamverify {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Scalar kI{0.0, 1.0};

/// Dense finite-dimensional stand-in for a (possibly unbounded) operator.
///
/// Rows follow the codomain basis, columns the domain basis. Every basis is
/// orthonormal, so the adjoint is the conjugate transpose of the entries.
class OperatorRep {
public:
  OperatorRep(Matrix entries, BasisTag domain, BasisTag codomain)
      : entries_(std::move(entries)), domain_(std::move(domain)), codomain_(std::move(codomain)) {
    if (static_cast<std::size_t>(entries_.cols()) != domain_.dim() ||
        static_cast<std::size_t>(entries_.rows()) != codomain_.dim()) {
      throw DimensionError("entries are " + std::to_string(entries_.rows()) + "x" +
                           std::to_string(entries_.cols()) + " but bases are " +
                           codomain_.to_string() + " <- " + domain_.to_string());
    }
  }

  /// Wraps a bare matrix in Abstract bases.
  static OperatorRep abstract(Matrix entries) {
    auto dom = BasisTag::abstract(static_cast<std::size_t>(entries.cols()));
    auto cod = BasisTag::abstract(static_cast<std::size_t>(entries.rows()));
    return OperatorRep(std::move(entries), std::move(dom), std::move(cod));
  }

  static OperatorRep identity(const BasisTag& tag) {
    const auto n = static_cast<Index>(tag.dim());
    return OperatorRep(Matrix::Identity(n, n), tag, tag);
  }

  static OperatorRep zero(const BasisTag& domain, const BasisTag& codomain) {
    return OperatorRep(Matrix::Zero(static_cast<Index>(codomain.dim()), static_cast<Index>(domain.dim())),
                       domain, codomain);
  }

  const Matrix& entries() const noexcept { return entries_; }
  const BasisTag& domain() const noexcept { return domain_; }
  const BasisTag& codomain() const noexcept { return codomain_; }
  std::size_t truncation() const { return std::max(domain_.truncation(), codomain_.truncation()); }

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  bool is_square() const noexcept { return entries_.rows() == entries_.cols(); }
  bool is_endomorphism() const { return domain_ == codomain_; }

  Scalar operator()(Index r, Index c) const { return entries_(r, c); }

private:
  Matrix entries_;
  BasisTag domain_;
  BasisTag codomain_;
};

inline OperatorRep adjoint(const OperatorRep& m) {
  return OperatorRep(m.entries().adjoint(), m.codomain(), m.domain());
}

/// L after R; R's codomain must be L's domain.
inline OperatorRep compose(const OperatorRep& left, const OperatorRep& right) {
  if (!(left.domain() == right.codomain())) {
    throw BasisMismatch("cannot compose: left domain " + left.domain().to_string() +
                        " != right codomain " + right.codomain().to_string());
  }
  return OperatorRep(left.entries() * right.entries(), right.domain(), left.codomain());
}

inline void require_same_bases(const OperatorRep& x, const OperatorRep& y, const char* op) {
  if (!(x.domain() == y.domain()) || !(x.codomain() == y.codomain())) {
    throw BasisMismatch(std::string("cannot ") + op + ": " + x.codomain().to_string() + " <- " +
                        x.domain().to_string() + " vs " + y.codomain().to_string() + " <- " +
                        y.domain().to_string());
  }
}

inline OperatorRep add(const OperatorRep& x, const OperatorRep& y) {
  require_same_bases(x, y, "add");
  return OperatorRep(x.entries() + y.entries(), x.domain(), x.codomain());
}

inline OperatorRep subtract(const OperatorRep& x, const OperatorRep& y) {
  require_same_bases(x, y, "subtract");
  return OperatorRep(x.entries() - y.entries(), x.domain(), x.codomain());
}

inline OperatorRep scale(Scalar s, const OperatorRep& x) {
  return OperatorRep(s * x.entries(), x.domain(), x.codomain());
}

/// M - lambda I for an endomorphism.
inline OperatorRep shift(const OperatorRep& m, Scalar lambda) {
  if (!m.is_endomorphism()) {
    throw BasisMismatch("shift needs an endomorphism, got " + m.codomain().to_string() + " <- " +
                        m.domain().to_string());
  }
  Matrix e = m.entries();
  e.diagonal().array() -= lambda;
  return OperatorRep(std::move(e), m.domain(), m.codomain());
}

inline OperatorRep operator*(const OperatorRep& l, const OperatorRep& r) { return compose(l, r); }
inline OperatorRep operator+(const OperatorRep& x, const OperatorRep& y) { return add(x, y); }
inline OperatorRep operator-(const OperatorRep& x, const OperatorRep& y) { return subtract(x, y); }
inline OperatorRep operator-(const OperatorRep& x) { return scale(-1.0, x); }
inline OperatorRep operator*(Scalar s, const OperatorRep& x) { return scale(s, x); }

inline Vector apply(const OperatorRep& m, const Vector& x) {
  if (x.size() != m.cols()) throw DimensionError("vector length does not match operator domain");
  return m.entries() * x;
}

}  // namespace hamverify
