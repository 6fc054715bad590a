#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "hamverify/errors.hpp"
#include "hamverify/operator.hpp"

namespace hamverify {

inline constexpr double kDefaultEigTolerance = 1e-10;
/// Singular values below this fraction of the norm count as zero.
inline constexpr double kResolventMargin = 1e-8;

inline Eigen::VectorXd singular_values(const Matrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline Eigen::VectorXd singular_values(const OperatorRep& m) { return singular_values(m.entries()); }

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).maxCoeff();
}

inline double operator_norm(const OperatorRep& m) { return operator_norm(m.entries()); }

inline double smallest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).minCoeff();
}

inline double smallest_singular_value(const OperatorRep& m) { return smallest_singular_value(m.entries()); }

/// ||M - M*|| / ||M||, zero for the zero matrix.
inline double hermitian_deviation(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m == m.adjoint()) return 0.0;
  const double scale = operator_norm(m);
  if (scale == 0.0) return 0.0;
  return operator_norm(Matrix(m - m.adjoint())) / scale;
}

inline double hermitian_deviation(const OperatorRep& m) {
  if (!m.is_endomorphism()) return INFINITY;
  return hermitian_deviation(m.entries());
}

/// Index sets of the connected components of the coupling graph of a square
/// matrix (i ~ j whenever m(i,j) or m(j,i) is exactly nonzero). Permuting to
/// these groups is an exact similarity onto a block-diagonal matrix.
inline std::vector<std::vector<Index>> coupled_components(const Matrix& m) {
  const Index n = m.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r)
      if (m(r, c) != Scalar(0)) {
        const Index a = find(r), b = find(c);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<Index>> groups;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[root]].push_back(i);
  }
  return groups;
}

inline Matrix extract_block(const Matrix& m, const std::vector<Index>& idx) {
  const auto k = static_cast<Index>(idx.size());
  Matrix b(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) b(i, j) = m(idx[i], idx[j]);
  return b;
}

struct SpectralDecomposition {
  std::vector<Scalar> eigenvalues;
  Matrix right_vectors;  ///< column k pairs with eigenvalues[k], unit 2-norm
  bool is_hermitian_path = false;
  std::vector<double> residuals;  ///< ||Mv - lambda v|| / ||M||
  double tolerance = kDefaultEigTolerance;

  double max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
  }
  std::vector<double> real_eigenvalues() const {
    std::vector<double> out;
    out.reserve(eigenvalues.size());
    for (const auto& z : eigenvalues) out.push_back(z.real());
    return out;
  }
};

namespace detail {

inline bool lex_less(const Scalar& a, const Scalar& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Runs `solve` on every decoupled component and scatters the eigenpairs
/// back. Residuals ||Mv - lambda v|| / ||M|| are computed per component; both
/// the residual and ||M|| (the max of the component norms) are exact for the
/// block-diagonal permutation.
template <class Solve>
SpectralDecomposition componentwise(const Matrix& m, double tolerance, Solve solve) {
  const Index n = m.rows();
  std::vector<Scalar> values;
  std::vector<double> residuals;
  values.reserve(static_cast<std::size_t>(n));
  Matrix vectors = Matrix::Zero(n, n);
  double scale = 0.0;
  Index col = 0;
  for (const auto& group : coupled_components(m)) {
    const Matrix block = extract_block(m, group);
    scale = std::max(scale, operator_norm(block));
    Eigen::VectorXcd lam;
    Matrix vec;
    solve(block, lam, vec);
    for (Index k = 0; k < block.rows(); ++k, ++col) {
      Vector v = vec.col(k);
      v.normalize();
      values.push_back(lam(k));
      residuals.push_back((block * v - lam(k) * v).norm());
      for (std::size_t i = 0; i < group.size(); ++i) vectors(group[i], col) = v(static_cast<Index>(i));
    }
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(values[a], values[b]); });
  SpectralDecomposition out;
  out.tolerance = tolerance;
  out.right_vectors = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues.push_back(values[order[k]]);
    out.residuals.push_back(residuals[order[k]] / std::max(scale, 1e-300));
    out.right_vectors.col(static_cast<Index>(k)) = vectors.col(static_cast<Index>(order[k]));
  }
  return out;
}

}  // namespace detail

/// General eigendecomposition through the complex Schur form.
///
/// The matrix is first split into its exactly decoupled components (see
/// coupled_components) and each component is reduced separately, so
/// structural zeros never get filled in by the Hessenberg reduction.
/// Eigenpairs are returned sorted by (real, imag).
inline SpectralDecomposition eig(const Matrix& m, double tolerance = kDefaultEigTolerance) {
  if (m.rows() != m.cols()) throw DimensionError("eig needs a square matrix");
  return detail::componentwise(m, tolerance, [](const Matrix& block, Eigen::VectorXcd& lam, Matrix& vec) {
    Eigen::ComplexEigenSolver<Matrix> solver(block, true);
    if (solver.info() != Eigen::Success) {
      throw ConvergenceFailure("complex Schur iteration did not converge on a block of size " +
                                   std::to_string(block.rows()),
                               static_cast<std::size_t>(solver.getMaxIterations()));
    }
    lam = solver.eigenvalues();
    vec = solver.eigenvectors();
  });
}

inline SpectralDecomposition eig(const OperatorRep& m, double tolerance = kDefaultEigTolerance) {
  if (!m.is_endomorphism()) throw BasisMismatch("eig needs an endomorphism, got " + m.domain().to_string() +
                                                " -> " + m.codomain().to_string());
  return eig(m.entries(), tolerance);
}

/// Eigendecomposition for Hermitian input; eigenvalues real and ascending.
inline SpectralDecomposition hermitian_eig(const Matrix& m, double tolerance = kDefaultEigTolerance) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eig needs a square matrix");
  const double dev = hermitian_deviation(m);
  if (dev > tolerance) throw NotHermitian("hermitian_eig input is not Hermitian", dev);
  const Matrix sym = 0.5 * (m + m.adjoint());
  auto out = detail::componentwise(sym, tolerance, [](const Matrix& block, Eigen::VectorXcd& lam, Matrix& vec) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(block);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
    lam = solver.eigenvalues().cast<Scalar>();
    vec = solver.eigenvectors();
  });
  out.is_hermitian_path = true;
  for (auto& z : out.eigenvalues) z = z.real();
  return out;
}

inline SpectralDecomposition hermitian_eig(const OperatorRep& m, double tolerance = kDefaultEigTolerance) {
  if (!m.is_endomorphism()) throw BasisMismatch("hermitian_eig needs an endomorphism");
  return hermitian_eig(m.entries(), tolerance);
}

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant (Eigen's MatrixFunctions implementation).
inline Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("expm needs a square matrix");
  if (m.size() == 0) return m;
  if (!m.allFinite()) throw ConvergenceFailure("expm input has non-finite entries");
  Matrix e = m.exp();
  if (!e.allFinite()) throw ConvergenceFailure("expm overflowed");
  return e;
}

inline OperatorRep expm(const OperatorRep& m) {
  if (!m.is_endomorphism()) throw BasisMismatch("expm needs an endomorphism");
  return OperatorRep(expm(m.entries()), m.domain(), m.codomain());
}

/// Smallest singular value of (M - lambda) and whether it clears the
/// resolvent margin relative to ||M - lambda||.
struct ShiftMargin {
  double margin = 0.0;
  double scale = 0.0;
  bool invertible = false;
};

inline ShiftMargin shift_margin(const Matrix& m, Scalar lambda) {
  Matrix s = m;
  s.diagonal().array() -= lambda;
  const auto sv = singular_values(s);
  ShiftMargin r;
  if (sv.size() == 0) return r;
  r.margin = sv.minCoeff();
  r.scale = sv.maxCoeff();
  r.invertible = r.margin > kResolventMargin * std::max(r.scale, 1e-300);
  return r;
}

/// (M - lambda)^{-1}, throwing LambdaInSpectrum when the margin is too small.
inline Matrix shifted_inverse(const Matrix& m, Scalar lambda, const std::string& what) {
  const auto sm = shift_margin(m, lambda);
  if (!sm.invertible) throw LambdaInSpectrum(what + " is not invertible", sm.margin);
  Matrix s = m;
  s.diagonal().array() -= lambda;
  return s.partialPivLu().inverse();
}

}  // namespace hamverify
