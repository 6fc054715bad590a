#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace hamverify;
using hvtest::abstract;
using hvtest::max_abs;
using hvtest::scalar_matrix;

namespace {

HamiltonianOp scalar_hamiltonian(Scalar a, double b, double c) {
  return HamiltonianOp(abstract(scalar_matrix(a)), abstract(scalar_matrix(b)), abstract(scalar_matrix(c)));
}

BlockOp scalar_block(Scalar a, Scalar b, Scalar c, Scalar d) {
  return BlockOp(abstract(scalar_matrix(a)), abstract(scalar_matrix(b)), abstract(scalar_matrix(c)),
                 abstract(scalar_matrix(d)));
}

HamiltonianOp decoupled(const Matrix& a) {
  const auto x = BasisTag::abstract(static_cast<std::size_t>(a.rows()));
  return HamiltonianOp(OperatorRep(a, x, x), OperatorRep::zero(x, x), OperatorRep::zero(x, x));
}

/// Singular values of a 2x2 matrix from trace and determinant of M*M.
std::pair<double, double> closed_form_2x2_singular_values(const Matrix& m) {
  const double fro2 = std::norm(m(0, 0)) + std::norm(m(0, 1)) + std::norm(m(1, 0)) + std::norm(m(1, 1));
  const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
  return {std::sqrt((fro2 - disc) / 2.0), std::sqrt((fro2 + disc) / 2.0)};
}

}  // namespace

// --- J -----------------------------------------------------------------------

TEST(UnitSymplectic, OneDimensional) {
  const auto j = unit_symplectic(BasisTag::abstract(1));
  Matrix expect(2, 2);
  expect << 0.0, 1.0, -1.0, 0.0;
  EXPECT_EQ(max_abs(j.entries() - expect), 0.0);
}

TEST(UnitSymplectic, Algebra) {
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    const auto j = unit_symplectic(BasisTag::abstract(n));
    const auto dim = static_cast<Index>(2 * n);
    EXPECT_EQ(max_abs((j * j).entries() + Matrix::Identity(dim, dim)), 0.0);
    EXPECT_EQ(max_abs(adjoint(j).entries() + j.entries()), 0.0);
    EXPECT_EQ(max_abs((adjoint(j) * j).entries() - Matrix::Identity(dim, dim)), 0.0);
    EXPECT_DOUBLE_EQ(operator_norm(j), 1.0);
  }
}

// --- construction ------------------------------------------------------------

TEST(BlockOp, RejectsIncompatibleBlocks) {
  const auto s = BasisTag::sine(2);
  const auto c = BasisTag::cosine(2);
  EXPECT_NO_THROW(BlockOp(OperatorRep::zero(s, s), OperatorRep::zero(c, s), OperatorRep::zero(s, c),
                          OperatorRep::zero(c, c)));
  EXPECT_THROW(BlockOp(OperatorRep::zero(s, s), OperatorRep::zero(s, c), OperatorRep::zero(s, c),
                       OperatorRep::zero(c, c)),
               BasisMismatch);
}

TEST(BlockOp, DenseRoundTrip) {
  RandomOperators gen(101);
  const auto x1 = BasisTag::abstract(2), x2 = BasisTag::abstract(3);
  BlockOp m(OperatorRep(gen.matrix(2, 2), x1, x1), OperatorRep(gen.matrix(2, 3), x2, x1),
            OperatorRep(gen.matrix(3, 2), x1, x2), OperatorRep(gen.matrix(3, 3), x2, x2));
  const auto back = BlockOp::from_dense(m.dense());
  EXPECT_EQ(max_abs(back.b().entries() - m.b().entries()), 0.0);
  EXPECT_EQ(max_abs(back.c().entries() - m.c().entries()), 0.0);
}

TEST(HamiltonianOp, StructuralInvariants) {
  RandomOperators gen(102);
  const auto h = gen.hamiltonian(4);
  EXPECT_EQ(max_abs(h.block().d().entries() + hvtest::conj_transpose(h.a().entries())), 0.0);
  const Matrix bad = gen.matrix(4, 4);
  EXPECT_THROW(HamiltonianOp(h.a(), abstract(bad), h.c()), NotHermitian);
  EXPECT_THROW(HamiltonianOp(h.a(), h.b(), abstract(bad)), NotHermitian);
  EXPECT_THROW(HamiltonianOp(h.a(), abstract(Matrix::Zero(3, 3)), h.c()), BasisMismatch);
}

// --- Frobenius-Schur ---------------------------------------------------------

TEST(FrobeniusSchur, ScalarFirstComplement) {
  const auto m = scalar_block(2.0, 1.0, 1.0, 3.0);
  const auto s = schur_complement(m, 0.0, SchurKind::First);
  EXPECT_NEAR(std::abs(s.matrix(0, 0) - Scalar(5.0 / 3.0)), 0.0, 1e-15);
  EXPECT_NEAR(s.resolvent_margin, 3.0, 1e-15);
  const auto f = frobenius_schur_factorize(m, 0.0, SchurKind::First);
  EXPECT_NEAR(std::abs(f.middle.a()(0, 0) - Scalar(5.0 / 3.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.middle.d()(0, 0) - Scalar(3.0)), 0.0, 0.0);
  EXPECT_LE(f.residual, 1e-15);
  // second complement: 3 - 1 * (1/2) * 1
  EXPECT_NEAR(std::abs(schur_complement(m, 0.0, SchurKind::Second).matrix(0, 0) - Scalar(2.5)), 0.0, 1e-15);
}

TEST(FrobeniusSchur, DecoupledBlocks) {
  RandomOperators gen(103);
  const auto x = BasisTag::abstract(3);
  const OperatorRep a(gen.matrix(3, 3), x, x), d(gen.matrix(3, 3), x, x);
  const BlockOp m(a, OperatorRep::zero(x, x), OperatorRep::zero(x, x), d);
  const Scalar l(0.3, 7.0);
  for (auto which : {SchurKind::First, SchurKind::Second}) {
    const auto f = frobenius_schur_factorize(m, l, which);
    EXPECT_LE(max_abs(f.middle.a().entries() - shift(a, l).entries()), 1e-15);
    EXPECT_LE(max_abs(f.middle.d().entries() - shift(d, l).entries()), 1e-15);
    EXPECT_EQ(max_abs(f.left.dense().entries() - Matrix::Identity(6, 6)), 0.0);
    EXPECT_EQ(max_abs(f.right.dense().entries() - Matrix::Identity(6, 6)), 0.0);
    EXPECT_EQ(max_abs(f.middle.b().entries()), 0.0);
    EXPECT_EQ(max_abs(f.middle.c().entries()), 0.0);
  }
}

TEST(FrobeniusSchur, PlateSecondComplementAtI) {
  const auto h = plate::build_plate_hamiltonian(8);
  const auto f = frobenius_schur_factorize(h.block(), kI, SchurKind::Second);
  EXPECT_LE(f.residual, 1e-12);
  // independent recomputation: multiply the dense factors by hand
  const Matrix prod = hvtest::naive_product(hvtest::naive_product(f.left.dense().entries(), f.middle.dense().entries()),
                                            f.right.dense().entries());
  Matrix target = hvtest::plate_dense_by_hand(8);
  target.diagonal().array() -= kI;
  EXPECT_LE(operator_norm(Matrix(prod - target)) / operator_norm(target), 1e-12);
  const auto s = schur_complement(h.block(), kI, SchurKind::Second);
  EXPECT_EQ(max_abs(s.matrix.entries() - f.middle.d().entries()), 0.0);
  EXPECT_GT(s.resolvent_margin, 0.0);
}

TEST(FrobeniusSchur, UnitTriangularFactors) {
  RandomOperators gen(104);
  const auto h = gen.hamiltonian(4);
  for (auto which : {SchurKind::First, SchurKind::Second}) {
    const auto f = frobenius_schur_factorize(h.block(), Scalar(0.0, 9.0), which);
    for (const auto* t : {&f.left, &f.right}) {
      EXPECT_EQ(max_abs(t->a().entries() - Matrix::Identity(4, 4)), 0.0);
      EXPECT_EQ(max_abs(t->d().entries() - Matrix::Identity(4, 4)), 0.0);
      EXPECT_TRUE(max_abs(t->b().entries()) == 0.0 || max_abs(t->c().entries()) == 0.0);
    }
  }
}

TEST(FrobeniusSchur, LambdaInSpectrumReportsMargin) {
  const auto m = scalar_block(2.0, 1.0, 1.0, 3.0);
  try {
    (void)frobenius_schur_factorize(m, 3.0, SchurKind::First);
    FAIL();
  } catch (const LambdaInSpectrum& e) {
    EXPECT_EQ(e.margin(), 0.0);
  }
  EXPECT_THROW((void)schur_complement(m, 2.0, SchurKind::Second), LambdaInSpectrum);
}

TEST(SchurDeterminant, LeibnizOracle) {
  RandomOperators gen(105);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n1 = gen.size(1, 3), n2 = gen.size(1, 3);
    const auto x1 = BasisTag::abstract(n1), x2 = BasisTag::abstract(n2);
    const BlockOp m(OperatorRep(gen.matrix(n1, n1), x1, x1), OperatorRep(gen.matrix(n1, n2), x2, x1),
                    OperatorRep(gen.matrix(n2, n1), x1, x2), OperatorRep(gen.matrix(n2, n2), x2, x2));
    const Scalar l(gen.uniform(-1, 1), gen.uniform(-1, 1));
    Matrix full = m.dense().entries();
    full.diagonal().array() -= l;
    Matrix dl = m.d().entries();
    dl.diagonal().array() -= l;
    const Scalar lhs = hvtest::leibniz_det(full);
    const Scalar rhs = hvtest::leibniz_det(dl) * hvtest::leibniz_det(schur_complement(m, l, SchurKind::First).matrix.entries());
    EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max(std::abs(lhs), 1.0)) << "trial " << trial;
  }
}

// --- direct and range criteria -----------------------------------------------

TEST(DirectCriterion, ValidHamiltoniansAreExact) {
  RandomOperators gen(106);
  for (int trial = 0; trial < 40; ++trial) {
    const auto h = gen.hamiltonian(gen.size(1, 10));
    const auto r = symplectic_selfadjoint_direct(h);
    EXPECT_LE(r.deviation, 1e-14);
    EXPECT_TRUE(r.pass);
  }
}

TEST(DirectCriterion, JHBlockAlgebra) {
  RandomOperators gen(107);
  const auto h = gen.hamiltonian(3);
  const Matrix jh = (unit_symplectic(h.space()) * h.dense()).entries();
  // JH = [[C, -A*], [-A, -B]]
  EXPECT_EQ(max_abs(jh.topLeftCorner(3, 3) - h.c().entries()), 0.0);
  EXPECT_EQ(max_abs(jh.topRightCorner(3, 3) + hvtest::conj_transpose(h.a().entries())), 0.0);
  EXPECT_EQ(max_abs(jh.bottomLeftCorner(3, 3) + h.a().entries()), 0.0);
  EXPECT_EQ(max_abs(jh.bottomRightCorner(3, 3) + h.b().entries()), 0.0);
}

TEST(DirectCriterion, PlatePasses) {
  const auto r = symplectic_selfadjoint_direct(plate::build_plate_hamiltonian(16));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.deviation, 1e-14);
}

TEST(DirectCriterion, CorruptedBlockFails) {
  RandomOperators gen(108);
  const auto h = gen.hamiltonian(4);
  const BlockOp corrupted(h.a(), h.b(), abstract(gen.matrix(4, 4)), h.d());
  const auto r = symplectic_selfadjoint_direct(corrupted);
  EXPECT_GT(r.deviation, 1e-3);
  EXPECT_FALSE(r.pass);
}

TEST(RangeCriterion, PlateMarginsAtLeastOne) {
  const auto r = range_criterion(plate::build_plate_hamiltonian(8));
  EXPECT_GE(r.margin_plus, 1.0 - 1e-10);
  EXPECT_GE(r.margin_minus, 1.0 - 1e-10);
  EXPECT_TRUE(r.pass);
}

TEST(RangeCriterion, PlateMarginsMatchPerModeOracle) {
  // Per mode m >= 1 the coupled 4x4 block of H +/- iJ; its singular values
  // are computed with the Gram oracle and compared against the dense result.
  const std::size_t n = 8;
  const Matrix h = hvtest::plate_dense_by_hand(n);
  const Index half = 2 * static_cast<Index>(n) + 1;
  Matrix j = Matrix::Zero(2 * half, 2 * half);
  j.topRightCorner(half, half).setIdentity();
  j.bottomLeftCorner(half, half) = -Matrix::Identity(half, half);
  for (double sign : {1.0, -1.0}) {
    const Matrix m = h + sign * kI * j;
    double oracle = INFINITY;
    for (std::size_t mode = 0; mode <= n; ++mode) {
      std::vector<Index> idx;
      const auto k = static_cast<Index>(mode);
      if (mode == 0) {
        idx = {k + static_cast<Index>(n), half + static_cast<Index>(n)};
      } else {
        idx = {k - 1, static_cast<Index>(n) + k, half + k - 1, half + static_cast<Index>(n) + k};
      }
      Matrix block(idx.size(), idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) block(r, c) = m(idx[r], idx[c]);
      const auto sv = hvtest::gram_singular_values(block);
      oracle = std::min(oracle, *std::min_element(sv.begin(), sv.end()));
    }
    const auto r = range_criterion(plate::build_plate_hamiltonian(n));
    EXPECT_NEAR(sign > 0 ? r.margin_plus : r.margin_minus, oracle, 1e-10);
  }
}

TEST(RangeCriterion, ZeroBlocksGiveUnitMargins) {
  const auto x = BasisTag::abstract(3);
  const HamiltonianOp h(OperatorRep::zero(x, x), OperatorRep::zero(x, x), OperatorRep::zero(x, x));
  const auto r = range_criterion(h);
  EXPECT_NEAR(r.margin_plus, 1.0, 1e-15);
  EXPECT_NEAR(r.margin_minus, 1.0, 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(RangeCriterion, OneDimensionalClosedForm) {
  const auto h = scalar_hamiltonian(1.0, 0.0, 0.0);
  Matrix plus(2, 2), minus(2, 2);
  plus << 1.0, kI, -kI, -1.0;
  minus << 1.0, -kI, kI, -1.0;
  const auto r = range_criterion(h);
  EXPECT_NEAR(r.margin_plus, closed_form_2x2_singular_values(plus).first, 1e-14);
  EXPECT_NEAR(r.margin_minus, closed_form_2x2_singular_values(minus).first, 1e-14);
  EXPECT_NEAR(r.margin_plus, std::sqrt(2.0), 1e-14);
}

// --- thm31 / thm32 -------------------------------------------------------------

TEST(DiagonalDomainCriterion, DecoupledIsExact) {
  RandomOperators gen(109);
  const auto h = decoupled(gen.matrix(4, 4));
  const auto l = default_lambdas(h)[0];
  const auto r = thm31_criterion(h, l);
  EXPECT_EQ(r.deviation_2, 0.0);
  EXPECT_EQ(r.deviation_3, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(DiagonalDomainCriterion, ScalarOracle) {
  const auto h = scalar_hamiltonian(2.0, 1.0, 1.0);
  const Scalar l = kI;
  const Scalar lc = std::conj(l);
  // A* + l + C (A - l)^{-1} B vs conj(A + conj(l) + B (A* - conj(l))^{-1} C)
  const Scalar left = 2.0 + l + 1.0 / (2.0 - l);
  const Scalar s1 = 2.0 + lc + 1.0 / (2.0 - lc);
  EXPECT_NEAR(std::abs(left - std::conj(s1)), 0.0, 1e-15);
  const auto r = thm31_criterion(h, l);
  EXPECT_LE(r.deviation_2, 1e-15);
  EXPECT_LE(r.deviation_3, 1e-15);
}

TEST(DiagonalDomainCriterion, PlateAtI) {
  const auto r = thm31_criterion(plate::build_plate_hamiltonian(16), kI);
  EXPECT_LE(r.deviation_2, 1e-12);
  EXPECT_LE(r.deviation_3, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(DiagonalDomainCriterion, LambdaInSpectrum) {
  const auto h = scalar_hamiltonian(2.0, 1.0, 1.0);
  EXPECT_THROW((void)thm31_criterion(h, 2.0), LambdaInSpectrum);
}

TEST(OffDiagonalDomainCriterion, ZeroAWithRealLambda) {
  RandomOperators gen(110);
  const auto x = BasisTag::abstract(3);
  const HamiltonianOp h(OperatorRep::zero(x, x), OperatorRep(gen.hermitian(3), x, x),
                        OperatorRep(gen.hermitian(3), x, x));
  const double l = 10.0 + operator_norm(h.b()) + operator_norm(h.c());
  const auto r = thm32_criterion(h, l);
  EXPECT_LE(r.deviation_2, 1e-15);
  EXPECT_LE(r.deviation_3, 1e-15);
}

TEST(OffDiagonalDomainCriterion, ScalarOracle) {
  const auto h = scalar_hamiltonian(1.0, 2.0, 3.0);
  const Scalar l = kI, lc = std::conj(l);
  const Scalar lhs2 = 3.0 + l + 1.0 / (2.0 - l);
  const Scalar rhs2 = std::conj(3.0 + lc + 1.0 / (2.0 - lc));
  EXPECT_NEAR(std::abs(lhs2 - rhs2), 0.0, 1e-15);
  const auto r = thm32_criterion(h, l);
  EXPECT_LE(r.deviation_2, 1e-15);
  EXPECT_LE(r.deviation_3, 1e-15);
}

TEST(OffDiagonalDomainCriterion, PlateWithSwappedRoles) {
  // J H J^{-1} recomputed densely; its blocks form a Hamiltonian whose B and C
  // are invertible near i.
  const auto h = plate::build_plate_hamiltonian(16);
  const auto j = unit_symplectic(h.space());
  const auto swapped = BlockOp::from_dense(j * h.dense() * adjoint(j));
  EXPECT_EQ(max_abs(swapped.b().entries()), 0.0);
  EXPECT_EQ(max_abs(swapped.a().entries() + h.a().entries()), 0.0);
  const HamiltonianOp hs(swapped.a(), swapped.b(), swapped.c(), kDefaultStructureTolerance,
                         DomainRegime::OffDiagonalDomain);
  EXPECT_EQ(max_abs(hs.dense().entries() - swapped.dense().entries()), 0.0);
  const auto r = thm32_criterion(hs, kI);
  EXPECT_LE(r.deviation_2, 1e-12);
  EXPECT_LE(r.deviation_3, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(OffDiagonalDomainCriterion, SingularBlocksThrow) {
  const auto h = plate::build_plate_hamiltonian(4);
  EXPECT_NO_THROW((void)thm32_criterion(h, kI));
  EXPECT_THROW((void)thm32_criterion(h, 1.0), LambdaInSpectrum);  // 1 is an eigenvalue of B = A + I
  EXPECT_THROW((void)thm32_criterion(h, 0.0), LambdaInSpectrum);  // C = 0
}

// --- JH factorization ----------------------------------------------------------

TEST(JhFactorization, DecoupledMiddleFactors) {
  RandomOperators gen(111);
  const Matrix a = gen.matrix(3, 3);
  const auto h = decoupled(a);
  const Scalar l = Scalar(0.0, 1.0) * (1.0 + operator_norm(a));
  const auto f = jh_factorization(h, l);
  const Matrix as = hvtest::conj_transpose(a);
  const Matrix id = Matrix::Identity(3, 3);
  EXPECT_LE(max_abs(f.minus.middle.a().entries() - (as + l * id)), 1e-14);
  EXPECT_LE(max_abs(f.minus.middle.d().entries() - (-a + l * id)), 1e-14);
  EXPECT_LE(max_abs(f.plus.middle.a().entries() - (a + std::conj(l) * id)), 1e-14);
  EXPECT_LE(max_abs(f.plus.middle.d().entries() - (-as + std::conj(l) * id)), 1e-14);
  EXPECT_LE(f.minus.residual, 1e-12);
  EXPECT_LE(f.plus.residual, 1e-12);
  EXPECT_LE(f.middle_deviation, 1e-15);
}

TEST(JhFactorization, PlateResiduals) {
  const auto f = jh_factorization(plate::build_plate_hamiltonian(8), kI);
  EXPECT_LE(f.minus.residual, 1e-12);
  EXPECT_LE(f.plus.residual, 1e-12);
  EXPECT_LE(f.middle_deviation, 1e-12);
}

TEST(JhFactorization, ScalarHandComputation) {
  const auto h = scalar_hamiltonian(1.0, 1.0, 0.0);
  const Scalar l = kI;
  const auto f = jh_factorization(h, l);
  // S2(l) = -1 - l, so -S2 = 1 + l; second middle slot -A + l
  EXPECT_NEAR(std::abs(f.neg_s2(0, 0) - (1.0 + l)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.minus.middle.a()(0, 0) - (1.0 + l)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.minus.middle.d()(0, 0) - (-1.0 + l)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.s1_reflected(0, 0) - (1.0 - l)), 0.0, 1e-15);
  // target JH - lJ = [[C, -A*], [-A, -B]] - l [[0, 1], [-1, 0]]
  Matrix target(2, 2);
  target << 0.0, -1.0 - l, -1.0 + l, -1.0;
  EXPECT_LE(max_abs(f.minus.target.entries() - target), 1e-15);
  EXPECT_LE(f.minus.residual, 1e-15);
  EXPECT_LE(f.plus.residual, 1e-15);
}

// --- adjoint laws --------------------------------------------------------------

TEST(AdjointLaws, IdentityFactor) {
  RandomOperators gen(112);
  const auto t = abstract(gen.matrix(4, 4));
  const auto r = adjoint_law_checks(OperatorRep::identity(t.codomain()), t);
  EXPECT_EQ(r.product_deviation, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(AdjointLaws, RandomPairAgainstEntrywiseOracle) {
  RandomOperators gen(113);
  const Matrix s = gen.matrix(4, 4), t = gen.matrix(4, 4);
  const Matrix oracle = hvtest::conj_transpose(hvtest::naive_product(s, t));
  const Matrix reversed = hvtest::naive_product(hvtest::conj_transpose(t), hvtest::conj_transpose(s));
  EXPECT_LE(max_abs(oracle - reversed), 1e-13 * operator_norm(s) * operator_norm(t));
  const auto r = adjoint_law_checks(abstract(s), abstract(t));
  ASSERT_TRUE(r.sum_deviation.has_value());
  EXPECT_LE(r.product_deviation, 1e-13 * r.product_scale);
  EXPECT_LE(*r.sum_deviation, 1e-13 * *r.sum_scale);
  EXPECT_TRUE(r.pass);
}

TEST(AdjointLaws, PlateDerivativePair) {
  const auto t0 = plate::build_t0(8);
  const auto t0s = plate::build_t0_adjoint(8);
  const auto r = adjoint_law_checks(t0s, t0);
  EXPECT_FALSE(r.sum_deviation.has_value());
  EXPECT_TRUE(r.pass);
  // the product is diag((n pi)^2) on Sine(8), itself self-adjoint
  const auto p = t0s * t0;
  for (Index k = 0; k < 8; ++k) EXPECT_NEAR(p(k, k).real(), std::pow((k + 1) * hvtest::kPi, 2), 1e-11);
  EXPECT_EQ(max_abs(p.entries() - Matrix(p.entries().diagonal().asDiagonal())), 0.0);
  EXPECT_THROW((void)adjoint_law_checks(t0, t0), BasisMismatch);
}

// --- example31 -----------------------------------------------------------------

TEST(Example31, HandLayout) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = hvtest::kPi;
  a(1, 1) = 2.0 * hvtest::kPi;
  const auto h = example31_build(abstract(a));
  const double p = hvtest::kPi;
  Matrix expect(4, 4);
  expect << p, 0, p, 0,
            0, 2 * p, 0, 2 * p,
            -p, 0, -p, 0,
            0, -2 * p, 0, -2 * p;
  EXPECT_EQ(max_abs(h.dense().entries() - expect), 0.0);
}

TEST(Example31, ZeroGivesZero) {
  const auto h = example31_build(abstract(Matrix::Zero(3, 3)));
  EXPECT_EQ(max_abs(h.dense().entries()), 0.0);
}

TEST(Example31, TruncatedPlatePassesFiniteChecks) {
  const auto h = example31_build(plate::build_A(8));
  EXPECT_TRUE(symplectic_selfadjoint_direct(h).pass);
  EXPECT_TRUE(range_criterion(h).pass);
  EXPECT_THROW(example31_build(abstract(hvtest::scalar_matrix(kI))), NotHermitian);
}

// --- randomized suite -----------------------------------------------------------

TEST(RandomSuite, FactorizationsAndCriteriaConcordance) {
  RandomOperators gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = gen.size(1, 16);
    const auto h = gen.hamiltonian(n);
    const Scalar l = default_lambdas(h)[1];  // off the real axis: B - l and C - l invertible too
    for (auto which : {SchurKind::First, SchurKind::Second})
      EXPECT_LE(frobenius_schur_factorize(h.block(), l, which).residual, 1e-12) << "trial " << trial;
    const auto jh = jh_factorization(h, l);
    EXPECT_LE(jh.minus.residual, 1e-12) << "trial " << trial;
    EXPECT_LE(jh.plus.residual, 1e-12) << "trial " << trial;
    EXPECT_TRUE(symplectic_selfadjoint_direct(h).pass) << "trial " << trial;
    EXPECT_TRUE(range_criterion(h).pass) << "trial " << trial;
    EXPECT_TRUE(thm31_criterion(h, l).pass) << "trial " << trial;
    EXPECT_TRUE(thm32_criterion(h, l).pass) << "trial " << trial;
  }
}

TEST(RandomSuite, LambdaIndependence) {
  RandomOperators gen(2025);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = gen.hamiltonian(gen.size(1, 12));
    const auto ls = default_lambdas(h);
    const auto r0 = thm31_criterion(h, ls[0]);
    const auto r1 = thm31_criterion(h, ls[1]);
    EXPECT_LE(std::abs(r0.deviation_2 - r1.deviation_2), 1e-10);
    EXPECT_LE(std::abs(r0.deviation_3 - r1.deviation_3), 1e-10);
  }
}
