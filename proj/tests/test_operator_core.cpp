#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

using namespace hamverify;
using hvtest::conj_transpose;
using hvtest::max_abs;

namespace {

OperatorRep square(const Matrix& m) { return OperatorRep::abstract(m); }

}  // namespace

// --- basis tags --------------------------------------------------------------

TEST(BasisTag, Dimensions) {
  EXPECT_EQ(BasisTag::sine(5).dim(), 5u);
  EXPECT_EQ(BasisTag::cosine(5).dim(), 6u);
  EXPECT_EQ(BasisTag::abstract(3).dim(), 3u);
  EXPECT_EQ(BasisTag::product({BasisTag::sine(4), BasisTag::cosine(4)}).dim(), 9u);
  EXPECT_TRUE(BasisTag::sine(3) == BasisTag::sine(3));
  EXPECT_FALSE(BasisTag::sine(3) == BasisTag::cosine(3));
  EXPECT_THROW(BasisTag::sine(0), DimensionError);
}

TEST(OperatorRep, RejectsWrongShape) {
  EXPECT_THROW(OperatorRep(Matrix::Zero(3, 3), BasisTag::sine(3), BasisTag::cosine(3)), DimensionError);
  EXPECT_NO_THROW(OperatorRep(Matrix::Zero(4, 3), BasisTag::sine(3), BasisTag::cosine(3)));
}

// --- adjoint -----------------------------------------------------------------

TEST(Adjoint, IdentityIsSelfAdjoint) {
  const auto id = OperatorRep::identity(BasisTag::abstract(4));
  EXPECT_EQ(max_abs(adjoint(id).entries() - id.entries()), 0.0);
}

TEST(Adjoint, ImaginaryUnitFlipsSign) {
  const auto m = kI * OperatorRep::identity(BasisTag::abstract(3));
  const auto expected = -kI * OperatorRep::identity(BasisTag::abstract(3));
  EXPECT_EQ(max_abs(adjoint(m).entries() - expected.entries()), 0.0);
}

TEST(Adjoint, SwapsBasesAndIsInvolution) {
  RandomOperators gen(11);
  const OperatorRep m(gen.matrix(4, 3), BasisTag::sine(3), BasisTag::cosine(3));
  const auto ms = adjoint(m);
  EXPECT_TRUE(ms.domain() == BasisTag::cosine(3));
  EXPECT_TRUE(ms.codomain() == BasisTag::sine(3));
  EXPECT_EQ(max_abs(ms.entries() - conj_transpose(m.entries())), 0.0);
  EXPECT_EQ(max_abs(adjoint(ms).entries() - m.entries()), 0.0);

  const auto r3 = square(gen.matrix(3, 3));
  EXPECT_EQ(max_abs(adjoint(adjoint(r3)).entries() - r3.entries()), 0.0);
}

// --- compose / add -----------------------------------------------------------

TEST(Compose, IdentityIsNeutral) {
  RandomOperators gen(12);
  const auto m = square(gen.matrix(5, 5));
  const auto id = OperatorRep::identity(m.domain());
  EXPECT_EQ(max_abs((id * m).entries() - m.entries()), 0.0);
  EXPECT_EQ(max_abs((m * id).entries() - m.entries()), 0.0);
}

TEST(Compose, AdjointOfProductReversesOrder) {
  RandomOperators gen(13);
  const OperatorRep r(gen.matrix(4, 3), BasisTag::abstract(3), BasisTag::abstract(4));
  const OperatorRep l(gen.matrix(2, 4), BasisTag::abstract(4), BasisTag::abstract(2));
  const Matrix lhs = conj_transpose(hvtest::naive_product(l.entries(), r.entries()));
  const Matrix rhs = compose(adjoint(r), adjoint(l)).entries();
  EXPECT_LE(max_abs(lhs - rhs), 1e-14);
}

TEST(Compose, MismatchedBasesNameBothTags) {
  const OperatorRep t0(Matrix::Zero(5, 4), BasisTag::sine(4), BasisTag::cosine(4));
  const OperatorRep r(Matrix::Zero(3, 3), BasisTag::sine(3), BasisTag::sine(3));
  try {
    (void)compose(t0, r);
    FAIL() << "expected BasisMismatch";
  } catch (const BasisMismatch& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("Sine(4)"), std::string::npos);
    EXPECT_NE(what.find("Sine(3)"), std::string::npos);
  }
  EXPECT_THROW((void)add(t0, adjoint(t0)), BasisMismatch);
}

// --- spectra -----------------------------------------------------------------

TEST(Eig, Diagonal) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const auto r = eig(d);
  ASSERT_EQ(r.eigenvalues.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(r.eigenvalues[k] - Scalar(k + 1.0)), 0.0, 1e-15);
  const auto h = hermitian_eig(d);
  EXPECT_TRUE(h.is_hermitian_path);
  EXPECT_NEAR(h.eigenvalues[0].real(), 1.0, 1e-15);
}

TEST(Eig, TruncatedSecondDerivativeSpectrum) {
  const auto t0 = plate::build_t0(8);
  const auto d = hermitian_eig(adjoint(t0) * t0);
  ASSERT_EQ(d.eigenvalues.size(), 8u);
  for (int n = 1; n <= 8; ++n) {
    const double expect = std::pow(n * hvtest::kPi, 2);
    EXPECT_NEAR(d.eigenvalues[n - 1].real(), expect, 1e-12 * expect);
    EXPECT_EQ(d.eigenvalues[n - 1].imag(), 0.0);
  }
}

TEST(Eig, CompanionMatrixGivesCubeRoots) {
  // z^3 - 1: companion with last column (1, 0, 0)
  Matrix c = Matrix::Zero(3, 3);
  c(1, 0) = 1.0;
  c(2, 1) = 1.0;
  c(0, 2) = 1.0;
  const auto d = eig(c);
  std::vector<Scalar> roots;
  for (int k = 0; k < 3; ++k) roots.push_back(std::polar(1.0, 2.0 * hvtest::kPi * k / 3.0));
  EXPECT_LE(hvtest::multiset_gap(d.eigenvalues, roots), 1e-12);
  EXPECT_LE(d.max_residual(), 1e-12);
}

TEST(Eig, HermitianPathRejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  try {
    (void)hermitian_eig(m);
    FAIL();
  } catch (const NotHermitian& e) {
    EXPECT_GT(e.deviation(), 0.5);
  }
  EXPECT_THROW((void)eig(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Eig, JordanBlockIsNotSmeared) {
  Matrix j = Matrix::Zero(2, 2);
  j(0, 1) = 1.0;
  const auto d = eig(j);
  for (auto z : d.eigenvalues) EXPECT_EQ(std::abs(z), 0.0);
}

TEST(EigProperty, ResidualsWithinTolerance) {
  RandomOperators gen(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = gen.size(1, 12);
    const Matrix m = gen.matrix(n, n);
    const auto d = eig(m);
    const double scale = operator_norm(m);
    for (std::size_t k = 0; k < d.eigenvalues.size(); ++k) {
      const Vector v = d.right_vectors.col(static_cast<Index>(k));
      EXPECT_LE((m * v - d.eigenvalues[k] * v).norm(), 1e-10 * scale * v.norm());
    }
    const auto h = hermitian_eig(gen.hermitian(n));
    for (std::size_t k = 1; k < h.eigenvalues.size(); ++k) EXPECT_LE(h.eigenvalues[k - 1].real(), h.eigenvalues[k].real());
    EXPECT_LE(h.max_residual(), 1e-10);
  }
}

// --- expm ----------------------------------------------------------------------

TEST(Expm, ZeroIsIdentity) {
  EXPECT_EQ(max_abs(expm(Matrix(Matrix::Zero(4, 4))) - Matrix::Identity(4, 4)), 0.0);
}

TEST(Expm, NilpotentSeriesTerminates) {
  Matrix n = Matrix::Zero(2, 2);
  n(0, 1) = 1.0;
  Matrix expect = Matrix::Identity(2, 2);
  expect(0, 1) = 1.0;
  EXPECT_LE(max_abs(expm(n) - expect), 1e-15);
}

TEST(Expm, DiagonalAgreesWithScalarExponential) {
  const std::vector<Scalar> l{1.0, -2.0, Scalar(0.0, hvtest::kPi)};
  Matrix d = Matrix::Zero(3, 3);
  for (int k = 0; k < 3; ++k) d(k, k) = l[k];
  const Matrix e = expm(d);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(e(k, k) - std::exp(l[k])), 1e-14 * std::abs(std::exp(l[k])));
  EXPECT_LE(max_abs(e - Matrix(e.diagonal().asDiagonal())), 0.0);
}

TEST(Expm, RejectsNonSquare) { EXPECT_THROW((void)expm(Matrix(Matrix::Zero(2, 3))), DimensionError); }

TEST(ExpmProperty, GroupLawOnCommutingArguments) {
  RandomOperators gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = gen.size(1, 8);
    const Matrix m = gen.matrix(n, n);
    const double s = gen.uniform(-1.0, 1.0), t = gen.uniform(-1.0, 1.0);
    const Matrix lhs = expm(Matrix(s * m)) * expm(Matrix(t * m));
    const Matrix rhs = expm(Matrix((s + t) * m));
    EXPECT_LE(operator_norm(Matrix(lhs - rhs)), 1e-9 * operator_norm(rhs)) << "trial " << trial;
    const Matrix inv = expm(m) * expm(Matrix(-m));
    const double cond = operator_norm(expm(m)) * operator_norm(expm(Matrix(-m)));
    EXPECT_LE(operator_norm(Matrix(inv - Matrix::Identity(n, n))), 1e-10 * cond);
  }
}

// --- singular values -----------------------------------------------------------

TEST(SingularValues, Identity) {
  const Matrix id = Matrix::Identity(4, 4);
  EXPECT_NEAR(operator_norm(id), 1.0, 1e-15);
  EXPECT_NEAR(smallest_singular_value(id), 1.0, 1e-15);
}

TEST(SingularValues, Diagonal) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 0.5;
  EXPECT_NEAR(smallest_singular_value(d), 0.5, 1e-15);
  EXPECT_NEAR(operator_norm(d), 3.0, 1e-15);
}

TEST(SingularValues, RandomAgainstGramOracle) {
  RandomOperators gen(41);
  const Matrix m = gen.matrix(5, 5);
  const auto sv = hvtest::gram_singular_values(m);
  const double smax = *std::max_element(sv.begin(), sv.end());
  const double smin = *std::min_element(sv.begin(), sv.end());
  EXPECT_NEAR(operator_norm(m), smax, 1e-12 * smax);
  // the Gram route squares the condition number; 1e-12 relative to smax
  EXPECT_NEAR(smallest_singular_value(m), smin, 1e-12 * smax);
}

TEST(SingularValueProperty, InvertibilityAgreesWithInverseResidual) {
  RandomOperators gen(42);
  for (int trial = 0; trial < 80; ++trial) {
    const Index n = gen.size(1, 8);
    Matrix m = gen.matrix(n, n);
    if (trial % 4 == 0 && n > 1) m.col(0) = m.col(1);  // exactly rank deficient
    const double smin = smallest_singular_value(m);
    const double smax = operator_norm(m);
    const bool invertible = smin > 1e-12 * smax;
    if (invertible) {
      const Matrix inv = m.fullPivLu().inverse();
      EXPECT_LE(max_abs(m * inv - Matrix::Identity(n, n)), 1e-8);
      EXPECT_NEAR(operator_norm(inv), 1.0 / smin, 1e-8 / smin);
    } else {
      EXPECT_LT(m.fullPivLu().rank(), n);
    }
  }
}

TEST(AdjointProperty, InnerProductPairing) {
  RandomOperators gen(51);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = gen.size(1, 10), c = gen.size(1, 10);
    const auto m = OperatorRep::abstract(gen.matrix(r, c));
    Vector x = gen.matrix(c, 1).col(0), y = gen.matrix(r, 1).col(0);
    x.normalize();
    y.normalize();
    const Scalar lhs = y.dot(m.entries() * x);              // <Mx, y>
    const Scalar rhs = (adjoint(m).entries() * y).dot(x);   // <x, M*y>
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * operator_norm(m));
  }
}

// --- Matrix Market -------------------------------------------------------------

TEST(MatrixMarket, IdentityFile) {
  std::istringstream in("%%MatrixMarket matrix coordinate complex general\n% comment\n2 2 2\n1 1 1 0\n2 2 1 0\n");
  const Matrix m = parse_matrix_market(in);
  EXPECT_EQ(max_abs(m - Matrix::Identity(2, 2)), 0.0);
}

TEST(MatrixMarket, RoundTripRandomFourByThree) {
  RandomOperators gen(61);
  const auto m = OperatorRep::abstract(gen.matrix(4, 3));
  const auto path = std::filesystem::temp_directory_path() / "hamverify_roundtrip.mtx";
  write_matrix_market(m, path);
  const auto back = read_matrix_market(path);
  ASSERT_EQ(back.rows(), 4);
  ASSERT_EQ(back.cols(), 3);
  EXPECT_EQ(max_abs(back.entries() - m.entries()), 0.0);  // 17 digits round-trip binary64 exactly
  std::ifstream raw(path, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix array complex general\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::filesystem::remove(path);
}

TEST(MatrixMarket, RealArrayIsAccepted) {
  std::istringstream in("%%MatrixMarket matrix array real general\n2 1\n1.5\n-2\n");
  const Matrix m = parse_matrix_market(in);
  EXPECT_EQ(m(0, 0), Scalar(1.5));
  EXPECT_EQ(m(1, 0), Scalar(-2.0));
}

TEST(MatrixMarket, EntryCountMismatchReportsLine) {
  std::istringstream in("%%MatrixMarket matrix array complex general\n2 2\n1 0\n0 0\n0 0\n");
  try {
    (void)parse_matrix_market(in, "bad.mtx");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("bad.mtx:5"), std::string::npos);
  }
}

TEST(MatrixMarket, MalformedInputs) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_matrix_market(in);
  };
  EXPECT_THROW(parse("not a header\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array complex symmetric\n1 1\n1 0\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array complex general\n2 2 2\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array complex general\n1 1\n1 x\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate complex general\n2 2 1\n3 1 1 0\n"), DimensionError);
  EXPECT_THROW(read_matrix_market("/nonexistent/file.mtx"), ParseError);
}
