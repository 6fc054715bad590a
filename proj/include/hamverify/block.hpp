#pragma once

#include <string>
#include <utility>

#include "hamverify/errors.hpp"
#include "hamverify/linalg.hpp"
#include "hamverify/operator.hpp"

namespace hamverify {

/// 2x2 block operator matrix [[a, b], [c, d]] on X1 x X2.
class BlockOp {
public:
  BlockOp(OperatorRep a, OperatorRep b, OperatorRep c, OperatorRep d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    const auto& x1 = a_.domain();
    const auto& x2 = d_.domain();
    auto expect = [](const OperatorRep& m, const BasisTag& dom, const BasisTag& cod, const char* name) {
      if (!(m.domain() == dom) || !(m.codomain() == cod)) {
        throw BasisMismatch(std::string("block ") + name + " maps " + m.domain().to_string() + " -> " +
                            m.codomain().to_string() + ", expected " + dom.to_string() + " -> " + cod.to_string());
      }
    };
    expect(a_, x1, x1, "a");
    expect(b_, x2, x1, "b");
    expect(c_, x1, x2, "c");
    expect(d_, x2, x2, "d");
  }

  /// Splits a dense operator on a two-part Product basis.
  static BlockOp from_dense(const OperatorRep& m) {
    const auto& tag = m.domain();
    if (!m.is_endomorphism() || tag.kind() != BasisTag::Kind::Product || tag.parts().size() != 2)
      throw BasisMismatch("from_dense needs an endomorphism of a two-part Product basis, got " + tag.to_string());
    const auto& x1 = tag.parts()[0];
    const auto& x2 = tag.parts()[1];
    const auto n1 = static_cast<Index>(x1.dim());
    const auto n2 = static_cast<Index>(x2.dim());
    const Matrix& e = m.entries();
    return BlockOp(OperatorRep(e.topLeftCorner(n1, n1), x1, x1), OperatorRep(e.topRightCorner(n1, n2), x2, x1),
                   OperatorRep(e.bottomLeftCorner(n2, n1), x1, x2), OperatorRep(e.bottomRightCorner(n2, n2), x2, x2));
  }

  const OperatorRep& a() const noexcept { return a_; }
  const OperatorRep& b() const noexcept { return b_; }
  const OperatorRep& c() const noexcept { return c_; }
  const OperatorRep& d() const noexcept { return d_; }
  const BasisTag& x1() const noexcept { return a_.domain(); }
  const BasisTag& x2() const noexcept { return d_.domain(); }
  BasisTag tag() const { return BasisTag::product({x1(), x2()}); }

  OperatorRep dense() const {
    const Index n1 = a_.rows(), n2 = d_.rows();
    Matrix e(n1 + n2, n1 + n2);
    e.topLeftCorner(n1, n1) = a_.entries();
    e.topRightCorner(n1, n2) = b_.entries();
    e.bottomLeftCorner(n2, n1) = c_.entries();
    e.bottomRightCorner(n2, n2) = d_.entries();
    const auto t = tag();
    return OperatorRep(std::move(e), t, t);
  }

private:
  OperatorRep a_, b_, c_, d_;
};

/// Which domain shape the Hamiltonian is modelled on: D(A) x D(A*) selects
/// the Schur-complement criteria built on resolvents of A, D(C) x D(B) the
/// ones built on resolvents of B and C.
enum class DomainRegime { DiagonalDomain, OffDiagonalDomain };

inline const char* to_string(DomainRegime r) {
  return r == DomainRegime::DiagonalDomain ? "D(A)xD(A*)" : "D(C)xD(B)";
}

inline constexpr double kDefaultStructureTolerance = 1e-10;

/// [[a, b], [c, -a*]] with b and c Hermitian, all on a common basis X.
class HamiltonianOp {
public:
  HamiltonianOp(OperatorRep a, OperatorRep b, OperatorRep c, double tolerance = kDefaultStructureTolerance,
                DomainRegime regime = DomainRegime::DiagonalDomain)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), tolerance_(tolerance), regime_(regime) {
    if (!a_.is_endomorphism()) throw BasisMismatch("Hamiltonian block a must be an endomorphism");
    const auto& x = a_.domain();
    if (!(b_.domain() == x) || !(b_.codomain() == x) || !(c_.domain() == x) || !(c_.codomain() == x))
      throw BasisMismatch("Hamiltonian blocks must share the basis " + x.to_string());
    if (const double db = hermitian_deviation(b_); db > tolerance_) throw NotHermitian("block b is not Hermitian", db);
    if (const double dc = hermitian_deviation(c_); dc > tolerance_) throw NotHermitian("block c is not Hermitian", dc);
  }

  const OperatorRep& a() const noexcept { return a_; }
  const OperatorRep& b() const noexcept { return b_; }
  const OperatorRep& c() const noexcept { return c_; }
  OperatorRep d() const { return -adjoint(a_); }
  const BasisTag& space() const noexcept { return a_.domain(); }
  double tolerance() const noexcept { return tolerance_; }
  DomainRegime regime() const noexcept { return regime_; }

  BlockOp block() const { return BlockOp(a_, b_, c_, d()); }
  OperatorRep dense() const { return block().dense(); }

private:
  OperatorRep a_, b_, c_;
  double tolerance_;
  DomainRegime regime_;
};

/// [[0, I], [-I, 0]] on tag x tag.
inline OperatorRep unit_symplectic(const BasisTag& tag) {
  const auto n = static_cast<Index>(tag.dim());
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  const auto t = BasisTag::product({tag, tag});
  return OperatorRep(std::move(j), t, t);
}

enum class SchurKind { First, Second };

inline const char* to_string(SchurKind k) { return k == SchurKind::First ? "first" : "second"; }

struct SchurComplementEval {
  SchurKind kind;
  Scalar lambda;
  OperatorRep matrix;
  double resolvent_margin;  ///< smallest singular value of the inverted diagonal factor
};

struct FactorizationResult {
  BlockOp left;
  BlockOp middle;
  BlockOp right;
  OperatorRep target;
  double residual;  ///< ||left * middle * right - target|| / max(||target||, 1)
};

namespace detail {

inline double relative_residual(const OperatorRep& product, const OperatorRep& target) {
  const double scale = std::max(operator_norm(target), 1.0);
  return operator_norm(Matrix(product.entries() - target.entries())) / scale;
}

inline FactorizationResult finish_factorization(BlockOp left, BlockOp middle, BlockOp right, OperatorRep target) {
  const OperatorRep product = left.dense() * middle.dense() * right.dense();
  const double residual = relative_residual(product, target);
  return FactorizationResult{std::move(left), std::move(middle), std::move(right), std::move(target), residual};
}

inline OperatorRep checked_resolvent(const OperatorRep& m, Scalar lambda, const char* name, double* margin) {
  const auto sm = shift_margin(m.entries(), lambda);
  if (margin) *margin = sm.margin;
  if (!sm.invertible)
    throw LambdaInSpectrum(std::string(name) + " - lambda is not invertible", sm.margin);
  Matrix s = m.entries();
  s.diagonal().array() -= lambda;
  return OperatorRep(s.partialPivLu().inverse(), m.codomain(), m.domain());
}

}  // namespace detail

/// Schur complement of M - lambda:
///   First : S1 = a - lambda - b (d - lambda)^{-1} c
///   Second: S2 = d - lambda - c (a - lambda)^{-1} b
inline SchurComplementEval schur_complement(const BlockOp& m, Scalar lambda, SchurKind kind) {
  double margin = 0.0;
  if (kind == SchurKind::First) {
    const auto rd = detail::checked_resolvent(m.d(), lambda, "d", &margin);
    auto s1 = shift(m.a(), lambda) - m.b() * rd * m.c();
    return SchurComplementEval{kind, lambda, std::move(s1), margin};
  }
  const auto ra = detail::checked_resolvent(m.a(), lambda, "a", &margin);
  auto s2 = shift(m.d(), lambda) - m.c() * ra * m.b();
  return SchurComplementEval{kind, lambda, std::move(s2), margin};
}

/// The two three-factor decompositions of M - lambda into unit block
/// triangular x block diagonal x unit block triangular factors.
inline FactorizationResult frobenius_schur_factorize(const BlockOp& m, Scalar lambda, SchurKind which) {
  const auto& x1 = m.x1();
  const auto& x2 = m.x2();
  const auto i1 = OperatorRep::identity(x1);
  const auto i2 = OperatorRep::identity(x2);
  const auto z12 = OperatorRep::zero(x2, x1);
  const auto z21 = OperatorRep::zero(x1, x2);
  const auto target = shift(m.dense(), lambda);
  const auto s = schur_complement(m, lambda, which);
  if (which == SchurKind::First) {
    const auto rd = detail::checked_resolvent(m.d(), lambda, "d", nullptr);
    BlockOp left(i1, m.b() * rd, z21, i2);
    BlockOp middle(s.matrix, z12, z21, shift(m.d(), lambda));
    BlockOp right(i1, z12, rd * m.c(), i2);
    return detail::finish_factorization(std::move(left), std::move(middle), std::move(right), target);
  }
  const auto ra = detail::checked_resolvent(m.a(), lambda, "a", nullptr);
  BlockOp left(i1, z12, m.c() * ra, i2);
  BlockOp middle(shift(m.a(), lambda), z12, z21, s.matrix);
  BlockOp right(i1, ra * m.b(), z21, i2);
  return detail::finish_factorization(std::move(left), std::move(middle), std::move(right), target);
}

}  // namespace hamverify
