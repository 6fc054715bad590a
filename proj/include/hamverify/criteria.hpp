#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>

#include "hamverify/block.hpp"
#include "hamverify/errors.hpp"
#include "hamverify/linalg.hpp"

namespace hamverify {

inline constexpr double kDefaultCriterionTolerance = 1e-10;

/// ||x - y|| / max(||x||, ||y||, 1).
inline double relative_deviation(const OperatorRep& x, const OperatorRep& y) {
  require_same_bases(x, y, "compare");
  const double scale = std::max({operator_norm(x), operator_norm(y), 1.0});
  return operator_norm(Matrix(x.entries() - y.entries())) / scale;
}

struct DirectReport {
  double deviation = 0.0;  ///< ||JH - (JH)*|| / ||JH||
  double tolerance = kDefaultCriterionTolerance;
  bool pass = false;
};

/// JH = (JH)* checked on the assembled matrix. Accepts arbitrary block
/// matrices on X x X so structurally corrupted inputs can be examined.
inline DirectReport symplectic_selfadjoint_direct(const BlockOp& m, double tol = kDefaultCriterionTolerance) {
  if (!(m.x1() == m.x2())) throw BasisMismatch("symplectic check needs X x X, got " + m.tag().to_string());
  const auto jh = unit_symplectic(m.x1()) * m.dense();
  const double scale = operator_norm(jh);
  DirectReport r;
  r.tolerance = tol;
  r.deviation = scale == 0.0 ? 0.0 : operator_norm(Matrix(jh.entries() - jh.entries().adjoint())) / scale;
  r.pass = r.deviation <= tol;
  return r;
}

inline DirectReport symplectic_selfadjoint_direct(const HamiltonianOp& h, double tol = kDefaultCriterionTolerance) {
  return symplectic_selfadjoint_direct(h.block(), tol);
}

struct RangeReport {
  double margin_plus = 0.0;   ///< sigma_min(H + iJ)
  double margin_minus = 0.0;  ///< sigma_min(H - iJ)
  double threshold = 0.0;     ///< tol * ||H||
  bool pass = false;
};

/// Surjectivity of H +/- iJ, certified by the smallest singular values.
inline RangeReport range_criterion(const BlockOp& m, double tol = kDefaultCriterionTolerance) {
  if (!(m.x1() == m.x2())) throw BasisMismatch("range criterion needs X x X, got " + m.tag().to_string());
  const auto h = m.dense();
  const Matrix ij = kI * unit_symplectic(m.x1()).entries();
  RangeReport r;
  r.margin_plus = smallest_singular_value(Matrix(h.entries() + ij));
  r.margin_minus = smallest_singular_value(Matrix(h.entries() - ij));
  r.threshold = tol * operator_norm(h);
  r.pass = r.margin_plus > r.threshold && r.margin_minus > r.threshold;
  return r;
}

inline RangeReport range_criterion(const HamiltonianOp& h, double tol = kDefaultCriterionTolerance) {
  return range_criterion(h.block(), tol);
}

struct SchurCriterionReport {
  Scalar lambda;
  double deviation_2 = 0.0;
  double deviation_3 = 0.0;
  double tolerance = kDefaultCriterionTolerance;
  bool pass = false;
};

/// Two valid shifts for the resolvent of a: i and 0.5+2i when a is
/// Hermitian, otherwise points of modulus 1 + ||a|| on two rays.
inline std::array<Scalar, 2> default_lambdas(const HamiltonianOp& h) {
  if (hermitian_deviation(h.a()) <= h.tolerance()) return {kI, Scalar(0.5, 2.0)};
  const double r = 1.0 + operator_norm(h.a());
  return {Scalar(r, 0.0), r * Scalar(0.6, 0.8)};
}

/// Criterion for the D(A) x D(A*) regime:
///   (2)  A* + l + C(A-l)^{-1}B  =  (A + conj(l) + B(A* - conj(l))^{-1}C)*
///   (3)  A + conj(l) + B(A* - conj(l))^{-1}C  =  (A* + l + C(A-l)^{-1}B)*
inline SchurCriterionReport thm31_criterion(const HamiltonianOp& h, Scalar lambda,
                                            double tol = kDefaultCriterionTolerance) {
  const auto& a = h.a();
  const auto as = adjoint(a);
  const Scalar lc = std::conj(lambda);
  const auto ra = detail::checked_resolvent(a, lambda, "A", nullptr);
  const auto ras = detail::checked_resolvent(as, lc, "A*", nullptr);
  const auto left2 = shift(as, -lambda) + h.c() * ra * h.b();
  const auto s1 = shift(a, -lc) + h.b() * ras * h.c();
  SchurCriterionReport r;
  r.lambda = lambda;
  r.tolerance = tol;
  r.deviation_2 = relative_deviation(left2, adjoint(s1));
  r.deviation_3 = relative_deviation(s1, adjoint(left2));
  r.pass = r.deviation_2 <= tol && r.deviation_3 <= tol;
  return r;
}

/// Criterion for the D(C) x D(B) regime:
///   (2)  C + l + A*(B-l)^{-1}A  =  (C + conj(l) + A*(B - conj(l))^{-1}A)*
///   (3)  B + l + A(C-l)^{-1}A*  =  (B + conj(l) + A(C - conj(l))^{-1}A*)*
inline SchurCriterionReport thm32_criterion(const HamiltonianOp& h, Scalar lambda,
                                            double tol = kDefaultCriterionTolerance) {
  const auto& a = h.a();
  const auto as = adjoint(a);
  const Scalar lc = std::conj(lambda);
  const auto rb = detail::checked_resolvent(h.b(), lambda, "B", nullptr);
  const auto rbc = detail::checked_resolvent(h.b(), lc, "B", nullptr);
  const auto rc = detail::checked_resolvent(h.c(), lambda, "C", nullptr);
  const auto rcc = detail::checked_resolvent(h.c(), lc, "C", nullptr);
  const auto lhs2 = shift(h.c(), -lambda) + as * rb * a;
  const auto rhs2 = adjoint(shift(h.c(), -lc) + as * rbc * a);
  const auto lhs3 = shift(h.b(), -lambda) + a * rc * as;
  const auto rhs3 = adjoint(shift(h.b(), -lc) + a * rcc * as);
  SchurCriterionReport r;
  r.lambda = lambda;
  r.tolerance = tol;
  r.deviation_2 = relative_deviation(lhs2, rhs2);
  r.deviation_3 = relative_deviation(lhs3, rhs3);
  r.pass = r.deviation_2 <= tol && r.deviation_3 <= tol;
  return r;
}

struct JhFactorization {
  FactorizationResult minus;   ///< JH - l J
  FactorizationResult plus;    ///< JH + conj(l) J
  OperatorRep neg_s2;          ///< -S2(l), S2(l) = -A* - l - C(A-l)^{-1}B
  OperatorRep s1_reflected;    ///< S1(-conj(l)) = A + conj(l) + B(A* - conj(l))^{-1}C
  double middle_deviation;     ///< relative ||-S2(l) - S1(-conj(l))*||
};

/// Factorizations of JH - lJ and JH + conj(l)J whose middle factors carry
/// -S2(l) and S1(-conj(l)); JH is self-adjoint iff those two are adjoint.
inline JhFactorization jh_factorization(const HamiltonianOp& h, Scalar lambda) {
  const auto& x = h.space();
  const auto& a = h.a();
  const auto as = adjoint(a);
  const auto& b = h.b();
  const auto& c = h.c();
  const Scalar lc = std::conj(lambda);
  const auto id = OperatorRep::identity(x);
  const auto zero = OperatorRep::zero(x, x);
  const auto ra = detail::checked_resolvent(a, lambda, "A", nullptr);
  const auto ras = detail::checked_resolvent(as, lc, "A*", nullptr);

  const auto s2 = shift(-as, lambda) - c * ra * b;
  const auto s1 = shift(a, -lc) + b * ras * c;
  const auto neg_s2 = -s2;
  const auto jh = unit_symplectic(x) * h.dense();
  const auto j = unit_symplectic(x);

  BlockOp l1(id, -(c * ra), zero, id);
  BlockOp m1(neg_s2, zero, zero, shift(-a, -lambda));
  BlockOp r1(zero, -id, id, adjoint(b * ras));
  auto minus = detail::finish_factorization(std::move(l1), std::move(m1), std::move(r1), jh - lambda * j);

  BlockOp l2(zero, id, -id, b * ras);
  BlockOp m2(s1, zero, zero, shift(-as, -lc));
  BlockOp r2(id, zero, adjoint(-(c * ra)), id);
  auto plus = detail::finish_factorization(std::move(l2), std::move(m2), std::move(r2), jh + lc * j);

  const double dev = relative_deviation(neg_s2, adjoint(s1));
  return JhFactorization{std::move(minus), std::move(plus), neg_s2, s1, dev};
}

struct AdjointLawReport {
  double product_deviation = 0.0;  ///< ||(ST)* - T*S*||
  double product_scale = 0.0;      ///< ||S|| ||T||
  std::optional<double> sum_deviation;  ///< ||(S+T)* - (S* + T*)|| when S, T share bases
  std::optional<double> sum_scale;      ///< ||S|| + ||T||
  double tolerance = 1e-13;
  bool pass = false;
};

inline AdjointLawReport adjoint_law_checks(const OperatorRep& s, const OperatorRep& t, double tol = 1e-13) {
  AdjointLawReport r;
  r.tolerance = tol;
  const auto st = compose(s, t);
  const double ns = operator_norm(s), nt = operator_norm(t);
  r.product_deviation = operator_norm(Matrix(adjoint(st).entries() - (adjoint(t) * adjoint(s)).entries()));
  r.product_scale = ns * nt;
  r.pass = r.product_deviation <= tol * std::max(r.product_scale, 1e-300) || r.product_deviation == 0.0;
  if (s.domain() == t.domain() && s.codomain() == t.codomain()) {
    r.sum_deviation = operator_norm(Matrix(adjoint(s + t).entries() - (adjoint(s) + adjoint(t)).entries()));
    r.sum_scale = ns + nt;
    r.pass = r.pass && (*r.sum_deviation <= tol * std::max(*r.sum_scale, 1e-300) || *r.sum_deviation == 0.0);
  }
  return r;
}

/// [[A, A], [-A, -A]] for Hermitian A: a Hamiltonian whose closure fails
/// in the unbounded limit even though every truncation is well behaved.
inline HamiltonianOp example31_build(const OperatorRep& a, double tol = kDefaultStructureTolerance) {
  if (const double dev = hermitian_deviation(a); dev > tol) throw NotHermitian("example31 needs Hermitian A", dev);
  return HamiltonianOp(a, a, -a, tol, DomainRegime::DiagonalDomain);
}

}  // namespace hamverify
