#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hamverify/block.hpp"
#include "hamverify/criteria.hpp"
#include "hamverify/errors.hpp"
#include "hamverify/linalg.hpp"
#include "hamverify/polynomial.hpp"
#include "hamverify/relative_bounds.hpp"

namespace hamverify::plate {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Operators in the sine / cosine modes on (0, 1).

/// g -> g' from Sine(N) into Cosine(N): sqrt(2) sin(n pi y) -> n pi sqrt(2) cos(n pi y).
inline OperatorRep build_t0(std::size_t n_modes) {
  const auto sine = BasisTag::sine(n_modes);
  const auto cosine = BasisTag::cosine(n_modes);
  const auto n = static_cast<Index>(n_modes);
  Matrix m = Matrix::Zero(n + 1, n);
  for (Index k = 1; k <= n; ++k) m(k, k - 1) = static_cast<double>(k) * kPi;
  return OperatorRep(std::move(m), sine, cosine);
}

/// g -> -g' from Cosine(N) into Sine(N); the constant mode maps to 0.
inline OperatorRep build_t0_adjoint(std::size_t n_modes) {
  const auto sine = BasisTag::sine(n_modes);
  const auto cosine = BasisTag::cosine(n_modes);
  const auto n = static_cast<Index>(n_modes);
  Matrix m = Matrix::Zero(n, n + 1);
  for (Index k = 1; k <= n; ++k) m(k - 1, k) = static_cast<double>(k) * kPi;
  return OperatorRep(std::move(m), cosine, sine);
}

inline BasisTag plate_space(std::size_t n_modes) {
  return BasisTag::product({BasisTag::sine(n_modes), BasisTag::cosine(n_modes)});
}

/// [[0, T0*], [T0, 0]] on Sine(N) x Cosine(N).
inline OperatorRep build_A(std::size_t n_modes) {
  const auto t0 = build_t0(n_modes);
  const auto t0s = build_t0_adjoint(n_modes);
  const auto n = static_cast<Index>(n_modes);
  Matrix m = Matrix::Zero(2 * n + 1, 2 * n + 1);
  m.topRightCorner(n, n + 1) = t0s.entries();
  m.bottomLeftCorner(n + 1, n) = t0.entries();
  const auto tag = plate_space(n_modes);
  return OperatorRep(std::move(m), tag, tag);
}

/// [[A, A + I], [0, -A]]; state order (u1 sine, u2 cosine, u3 sine, u4 cosine).
inline HamiltonianOp build_plate_hamiltonian(std::size_t n_modes) {
  const auto a = build_A(n_modes);
  const auto& x = a.domain();
  return HamiltonianOp(a, a + OperatorRep::identity(x), OperatorRep::zero(x, x));
}

// ---------------------------------------------------------------------------
// Mode decomposition.

struct ModeSystem {
  std::size_t mode_n = 0;
  Matrix h_matrix;  ///< 4x4 for n >= 1 over (u1, u2, u3, u4); 2x2 for n = 0 over (u2, u4)
};

inline ModeSystem build_mode_system(std::size_t n) {
  ModeSystem s;
  s.mode_n = n;
  if (n == 0) {
    s.h_matrix = Matrix::Zero(2, 2);
    s.h_matrix(0, 1) = 1.0;
    return s;
  }
  const double a = static_cast<double>(n) * kPi;
  Matrix an(2, 2);
  an << 0.0, a, a, 0.0;
  s.h_matrix = Matrix::Zero(4, 4);
  s.h_matrix.topLeftCorner(2, 2) = an;
  s.h_matrix.topRightCorner(2, 2) = an + Matrix::Identity(2, 2);
  s.h_matrix.bottomRightCorner(2, 2) = -an;
  return s;
}

/// Dense indices of mode n inside the 4N+2 state (u1, u2, u3, u4 for n >= 1,
/// u2, u4 for the constant cosine mode n = 0).
inline std::vector<Index> mode_indices(std::size_t n_modes, std::size_t n) {
  const auto N = static_cast<Index>(n_modes);
  const auto k = static_cast<Index>(n);
  const Index half = 2 * N + 1;
  if (n == 0) return {N, half + N};
  return {k - 1, N + k, half + k - 1, half + N + k};
}

inline std::size_t modes_of(const HamiltonianOp& h) {
  const auto& x = h.space();
  if (x.kind() != BasisTag::Kind::Product || x.parts().size() != 2 ||
      x.parts()[0].kind() != BasisTag::Kind::Sine || x.parts()[1].kind() != BasisTag::Kind::Cosine ||
      x.parts()[0].truncation() != x.parts()[1].truncation())
    throw StructureMismatch("not a plate Hamiltonian space: " + x.to_string());
  return x.parts()[0].truncation();
}

/// Splits H into the N + 1 mode systems, mode 0 first. Throws
/// StructureMismatch if any entry outside the mode pattern exceeds 1e-14.
inline std::vector<ModeSystem> mode_decompose(const Matrix& dense, std::size_t n_modes) {
  std::vector<ModeSystem> out;
  Matrix covered = Matrix::Zero(dense.rows(), dense.cols());
  for (std::size_t n = 0; n <= n_modes; ++n) {
    const auto idx = mode_indices(n_modes, n);
    ModeSystem s;
    s.mode_n = n;
    s.h_matrix = extract_block(dense, idx);
    for (Index i : idx)
      for (Index j : idx) covered(i, j) = 1.0;
    out.push_back(std::move(s));
  }
  double off = 0.0;
  for (Index c = 0; c < dense.cols(); ++c)
    for (Index r = 0; r < dense.rows(); ++r)
      if (covered(r, c) == Scalar(0)) off = std::max(off, std::abs(dense(r, c)));
  if (off > 1e-14) throw StructureMismatch("entry of size " + std::to_string(off) + " couples different modes");
  return out;
}

inline std::vector<ModeSystem> mode_decompose(const HamiltonianOp& h) {
  return mode_decompose(h.dense().entries(), modes_of(h));
}

/// Inverse of mode_decompose.
inline Matrix reassemble(const std::vector<ModeSystem>& modes, std::size_t n_modes) {
  const auto dim = static_cast<Index>(4 * n_modes + 2);
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& s : modes) {
    const auto idx = mode_indices(n_modes, s.mode_n);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        m(idx[i], idx[j]) = s.h_matrix(static_cast<Index>(i), static_cast<Index>(j));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Spectrum.

struct Multiplicity {
  Scalar value;
  std::size_t count;
};

struct SpectrumReport {
  std::size_t n_modes = 0;
  std::vector<Scalar> computed;     ///< sorted by (real, imag)
  std::vector<double> reference;    ///< k pi, |k| <= N, each twice
  double max_abs_error = 0.0;
  double max_imag = 0.0;
  std::vector<Multiplicity> multiplicities;
  double symmetry_defect = 0.0;     ///< multiset distance between sigma and -conj(sigma)
  double max_residual = 0.0;

  std::vector<double> computed_real() const {
    std::vector<double> v;
    for (auto z : computed) v.push_back(z.real());
    return v;
  }
};

/// Max over a greedy nearest-neighbour matching of two equal-size multisets.
inline double multiset_distance(std::vector<Scalar> x, std::vector<Scalar> y) {
  if (x.size() != y.size()) return INFINITY;
  double worst = 0.0;
  std::vector<bool> used(y.size(), false);
  std::sort(x.begin(), x.end(), detail::lex_less);
  for (const auto& v : x) {
    std::size_t best = y.size();
    double bd = INFINITY;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(v - y[k]);
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

inline std::vector<Multiplicity> cluster(const std::vector<Scalar>& sorted, double rel_tol = 1e-6) {
  std::vector<Multiplicity> out;
  std::vector<bool> used(sorted.size(), false);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (used[i]) continue;
    Scalar sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = i; j < sorted.size(); ++j) {
      if (!used[j] && std::abs(sorted[j] - sorted[i]) <= rel_tol * std::max(1.0, std::abs(sorted[i]))) {
        used[j] = true;
        sum += sorted[j];
        ++count;
      }
    }
    out.push_back({sum / static_cast<double>(count), count});
  }
  return out;
}

inline std::vector<double> reference_spectrum(std::size_t n_modes) {
  std::vector<double> ref;
  const auto n = static_cast<long>(n_modes);
  for (long k = -n; k <= n; ++k) {
    ref.push_back(static_cast<double>(k) * kPi);
    ref.push_back(static_cast<double>(k) * kPi);
  }
  return ref;
}

inline SpectrumReport spectrum(const HamiltonianOp& h) {
  SpectrumReport r;
  r.n_modes = modes_of(h);
  const auto dec = eig(h.dense());
  r.computed = dec.eigenvalues;
  r.max_residual = dec.max_residual();
  r.reference = reference_spectrum(r.n_modes);
  std::vector<Scalar> ref(r.reference.begin(), r.reference.end());
  r.max_abs_error = multiset_distance(r.computed, ref);
  for (auto z : r.computed) r.max_imag = std::max(r.max_imag, std::abs(z.imag()));
  r.multiplicities = cluster(r.computed);
  std::vector<Scalar> mirrored;
  for (auto z : r.computed) mirrored.push_back(-std::conj(z));
  r.symmetry_defect = multiset_distance(r.computed, mirrored);
  return r;
}

inline SpectrumReport spectrum(std::size_t n_modes) { return spectrum(build_plate_hamiltonian(n_modes)); }

struct HSquaredReport {
  double block_deviation = 0.0;     ///< ||H^2 - diag(A^2, A^2)|| / ||H||^2
  double squaring_defect = 0.0;     ///< multiset distance sigma(H^2) vs {l^2 : l in sigma(H)}
  double reference_defect = 0.0;    ///< multiset distance sigma(H^2) vs {(n pi)^2}, 0 twice, others four times
  double min_singular_h2_plus_1 = 0.0;
  double min_singular_h_minus_i = 0.0;
};

inline HSquaredReport hsquared_check(const HamiltonianOp& h) {
  const std::size_t n_modes = modes_of(h);
  HSquaredReport r;
  const Matrix hd = h.dense().entries();
  const Matrix h2 = hd * hd;
  const Matrix a = h.a().entries();
  const Index n = a.rows();
  Matrix expected = Matrix::Zero(2 * n, 2 * n);
  expected.topLeftCorner(n, n) = a * a;
  expected.bottomRightCorner(n, n) = a * a;
  const double hn = operator_norm(hd);
  r.block_deviation = operator_norm(Matrix(h2 - expected)) / std::max(hn * hn, 1e-300);

  const auto sig = eig(hd).eigenvalues;
  const auto sig2 = eig(h2).eigenvalues;
  std::vector<Scalar> squared;
  for (auto z : sig) squared.push_back(z * z);
  r.squaring_defect = multiset_distance(sig2, squared);
  std::vector<Scalar> ref{0.0, 0.0};
  for (std::size_t k = 1; k <= n_modes; ++k) {
    const double v = std::pow(static_cast<double>(k) * kPi, 2);
    for (int t = 0; t < 4; ++t) ref.emplace_back(v);
  }
  r.reference_defect = multiset_distance(sig2, ref);
  r.min_singular_h2_plus_1 = smallest_singular_value(Matrix(h2 + Matrix::Identity(2 * n, 2 * n)));
  Matrix hmi = hd;
  hmi.diagonal().array() -= kI;
  r.min_singular_h_minus_i = smallest_singular_value(hmi);
  return r;
}

// ---------------------------------------------------------------------------
// Jordan chains.

inline constexpr double kRankTolerance = 1e-8;

struct JordanChainReport {
  Scalar eigenvalue;                        ///< snapped to the computed cluster mean
  std::size_t algebraic_multiplicity = 0;   ///< dim ker (H - l)^p at stabilisation
  std::size_t geometric_multiplicity = 0;   ///< dim ker (H - l)
  std::size_t cluster_size = 0;             ///< computed eigenvalues within 1e-6
  std::vector<std::vector<Vector>> chains;  ///< chain[0] eigenvector, (H - l) chain[j+1] = chain[j]
  std::vector<std::vector<double>> residuals;
  double rank_tolerance = kRankTolerance;
  double max_residual() const {
    double m = 0.0;
    for (const auto& c : residuals)
      for (double v : c) m = std::max(m, v);
    return m;
  }
};

namespace detail {

/// Orthonormal basis of the numerical kernel of m.
inline Matrix kernel_basis(const Matrix& m, double threshold) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > threshold) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

/// Component of v orthogonal to the column span of q (q orthonormal).
inline Vector orthogonal_part(const Matrix& q, Vector v) {
  for (int pass = 0; pass < 2; ++pass)
    if (q.cols() > 0) v -= q * (q.adjoint() * v);
  return v;
}

inline void append_orthonormal(Matrix& q, const Vector& v) {
  Vector w = orthogonal_part(q, v);
  const double nw = w.norm();
  if (nw == 0.0) return;
  q.conservativeResize(q.rows(), q.cols() + 1);
  q.col(q.cols() - 1) = w / nw;
}

}  // namespace detail

inline JordanChainReport jordan_chains(const Matrix& h, Scalar eigenvalue) {
  const Index n = h.rows();
  const auto values = eig(h).eigenvalues;
  std::vector<Scalar> near;
  for (auto z : values)
    if (std::abs(z - eigenvalue) <= 1e-6 * std::max(1.0, std::abs(eigenvalue))) near.push_back(z);
  if (near.empty()) throw NotAnEigenvalue("no eigenvalue within 1e-6 of the requested point");
  Scalar lambda = 0.0;
  for (auto z : near) lambda += z;
  lambda /= static_cast<double>(near.size());
  if (std::abs(lambda.imag()) < 1e-12 * std::max(1.0, std::abs(lambda)) && eigenvalue.imag() == 0.0)
    lambda = lambda.real();
  // Snap to the requested value when it is consistent to roundoff.
  if (std::abs(lambda - eigenvalue) <= 1e-9 * std::max(1.0, std::abs(eigenvalue))) lambda = eigenvalue;

  JordanChainReport r;
  r.eigenvalue = lambda;
  r.cluster_size = near.size();
  Matrix k = h;
  k.diagonal().array() -= lambda;
  const double scale = std::max({operator_norm(h), operator_norm(k), 1.0});

  // kernels of K^p until the dimension stabilises
  std::vector<Matrix> kernels{Matrix(n, 0)};
  Matrix power = Matrix::Identity(n, n);
  for (Index p = 1; p <= n; ++p) {
    power = k * power;
    Matrix basis = detail::kernel_basis(power, kRankTolerance * std::pow(scale, static_cast<double>(p)));
    if (basis.cols() == kernels.back().cols()) break;
    kernels.push_back(std::move(basis));
  }
  const std::size_t depth = kernels.size() - 1;
  r.geometric_multiplicity = depth >= 1 ? static_cast<std::size_t>(kernels[1].cols()) : 0;
  r.algebraic_multiplicity = static_cast<std::size_t>(kernels.back().cols());

  std::vector<std::pair<Vector, std::size_t>> tops;  // top vector and chain length
  for (std::size_t level = depth; level >= 1; --level) {
    Matrix q(n, 0);
    for (Index c = 0; c < kernels[level - 1].cols(); ++c) detail::append_orthonormal(q, kernels[level - 1].col(c));
    std::size_t longer = 0;
    for (const auto& [v, len] : tops) {
      Vector w = v;
      for (std::size_t s = level; s < len; ++s) w = k * w;
      detail::append_orthonormal(q, w);
      ++longer;
    }
    const auto grown = static_cast<std::size_t>(kernels[level].cols() - kernels[level - 1].cols());
    const std::size_t new_here = grown > longer ? grown - longer : 0;
    std::size_t added = 0;
    for (Index c = 0; c < kernels[level].cols() && added < new_here; ++c) {
      Vector w = detail::orthogonal_part(q, kernels[level].col(c));
      if (w.norm() <= 1e-6) continue;
      w.normalize();
      tops.emplace_back(w, level);
      detail::append_orthonormal(q, w);
      ++added;
    }
  }

  for (const auto& [top, len] : tops) {
    std::vector<Vector> chain(len);
    chain[len - 1] = top;
    for (std::size_t j = len - 1; j >= 1; --j) chain[j - 1] = k * chain[j];
    const double s = chain[0].norm();
    for (auto& v : chain) v /= s;
    std::vector<double> res;
    res.push_back((k * chain[0]).norm());
    for (std::size_t j = 1; j < len; ++j) res.push_back((k * chain[j] - chain[j - 1]).norm());
    r.chains.push_back(std::move(chain));
    r.residuals.push_back(std::move(res));
  }
  return r;
}

inline JordanChainReport jordan_chains(const ModeSystem& sys, Scalar eigenvalue) {
  return jordan_chains(sys.h_matrix, eigenvalue);
}

// ---------------------------------------------------------------------------
// Manufactured solutions, mode IVP, displacement reconstruction.

inline constexpr std::size_t kMaxProfileDegree = 12;

/// Per-mode fields of w(x, y) = phi(x) sqrt(2) sin(m pi y):
///   u1 = phi'' - (m pi)^2 phi          (sine slot)
///   u2 = (m pi) u1                     (cosine slot)
///   u3 = u1'                           (sine slot)
///   u4 = -u2                           (cosine slot)
///   q  = D (phi'''' - 2 (m pi)^2 phi'' + (m pi)^4 phi)
struct ManufacturedFields {
  std::size_t mode = 1;
  double rigidity = 1.0;
  Polynomial profile;
  std::array<Polynomial, 4> u;
  Polynomial load;

  double wavenumber() const { return static_cast<double>(mode) * kPi; }

  Vector state(double x) const {
    Vector v(4);
    for (Index k = 0; k < 4; ++k) v(k) = u[static_cast<std::size_t>(k)](x);
    return v;
  }
  Vector forcing(double x) const {
    Vector f = Vector::Zero(4);
    f(2) = load(x) / rigidity;
    return f;
  }
  /// Forcing polynomials (0, 0, q / D, 0).
  std::vector<Polynomial> forcing_polynomials() const { return {{}, {}, (1.0 / rigidity) * load, {}}; }

  /// ||u'(x) - H_m u(x) - f(x)|| evaluated from the exact polynomials.
  double first_order_residual(double x) const {
    const Matrix hm = build_mode_system(mode).h_matrix;
    Vector du(4);
    for (Index k = 0; k < 4; ++k) du(k) = u[static_cast<std::size_t>(k)].derivative()(x);
    return (du - hm * state(x) - forcing(x)).norm();
  }
};

inline ManufacturedFields manufactured_fields(std::size_t mode, const Polynomial& profile, double rigidity = 1.0) {
  if (mode == 0) throw Error("manufactured displacement needs a sine mode m >= 1");
  if (profile.degree() > kMaxProfileDegree)
    throw DegreeTooHigh("profile degree " + std::to_string(profile.degree()) + " exceeds " +
                        std::to_string(kMaxProfileDegree));
  ManufacturedFields f;
  f.mode = mode;
  f.rigidity = rigidity;
  f.profile = profile;
  const double a = static_cast<double>(mode) * kPi;
  const double a2 = a * a;
  const Polynomial u1 = profile.derivative(2) - a2 * profile;
  f.u = {u1, a * u1, u1.derivative(), -a * u1};
  f.load = rigidity * (profile.derivative(4) - (2.0 * a2) * profile.derivative(2) + (a2 * a2) * profile);
  return f;
}

struct Trajectory {
  std::vector<double> xs;
  std::vector<Vector> states;
};

inline std::vector<double> uniform_grid(double x_end, std::size_t points) {
  std::vector<double> xs;
  if (points < 2) return {x_end};
  for (std::size_t k = 0; k < points; ++k)
    xs.push_back(x_end * static_cast<double>(k) / static_cast<double>(points - 1));
  return xs;
}

/// u(x) = expm(x H) u0 + int_0^x expm((x - s) H) f(s) ds for polynomial f.
///
/// Invertible H: repeated integration by parts gives the polynomial
/// particular solution u_p = -sum_k H^{-(k+1)} f^{(k)}, and
/// u(x) = u_p(x) + expm(x H) (u0 - u_p(0)).
/// Singular H: the forcing is generated by the nilpotent system
/// g_j' = g_{j-1}, g_j(s) = s^j / j!, and the Duhamel integral is read off
/// the exponential of the augmented generator. Both routes are exact up to
/// roundoff.
inline Trajectory solve_mode_ivp(const ModeSystem& sys, const Vector& u0, double x_end,
                                 const std::vector<Polynomial>& forcing, std::size_t points = 33) {
  const Index n = sys.h_matrix.rows();
  if (u0.size() != n) throw DimensionError("initial state has the wrong length");
  if (!forcing.empty() && static_cast<Index>(forcing.size()) != n)
    throw DimensionError("forcing must have one polynomial per state component");
  std::size_t degree = 0;
  bool any = false;
  for (const auto& p : forcing)
    if (!p.is_zero()) {
      degree = std::max(degree, p.degree());
      any = true;
    }

  Trajectory t;
  t.xs = uniform_grid(x_end, points);
  if (!any) {
    for (double x : t.xs) t.states.push_back(expm(Matrix(x * sys.h_matrix)) * u0);
    return t;
  }

  if (shift_margin(sys.h_matrix, 0.0).invertible) {
    const auto lu = sys.h_matrix.partialPivLu();
    // coefficient vectors of u_p in ascending powers of x
    std::vector<Vector> fk(degree + 1, Vector::Zero(n));
    for (Index comp = 0; comp < n; ++comp) {
      const auto& c = forcing[static_cast<std::size_t>(comp)].coefficients();
      for (std::size_t j = 0; j < c.size(); ++j) fk[j](comp) = c[j];
    }
    // u_p solves u_p' = H u_p + f: highest power first, H c_j = (j+1) c_{j+1} - f_j
    std::vector<Vector> up(degree + 2, Vector::Zero(n));
    for (std::size_t j = degree + 1; j-- > 0;) {
      up[j] = lu.solve(Vector(static_cast<double>(j + 1) * up[j + 1] - fk[j]));
    }
    auto particular = [&](double x) {
      Vector acc = Vector::Zero(n);
      for (std::size_t j = degree + 1; j-- > 0;) acc = acc * x + up[j];
      return acc;
    };
    const Vector hom0 = u0 - particular(0.0);
    for (double x : t.xs) t.states.push_back(particular(x) + expm(Matrix(x * sys.h_matrix)) * hom0);
    return t;
  }

  const auto terms = static_cast<Index>(degree + 1);
  Matrix gen = Matrix::Zero(n + terms, n + terms);
  gen.topLeftCorner(n, n) = sys.h_matrix;
  double factorial = 1.0;
  for (Index j = 0; j < terms; ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    for (Index comp = 0; comp < n; ++comp) {
      const auto& c = forcing[static_cast<std::size_t>(comp)].coefficients();
      if (static_cast<std::size_t>(j) < c.size()) gen(comp, n + j) = factorial * c[static_cast<std::size_t>(j)];
    }
    if (j > 0) gen(n + j, n + j - 1) = 1.0;
  }
  Vector z0 = Vector::Zero(n + terms);
  z0.head(n) = u0;
  z0(n) = 1.0;
  for (double x : t.xs) t.states.push_back((expm(Matrix(x * gen)) * z0).head(n));
  return t;
}

/// Sampled-forcing variant: the Duhamel integral by composite Gauss-Legendre
/// quadrature, refined until two successive panel counts agree to 1e-10.
inline Trajectory solve_mode_ivp(const ModeSystem& sys, const Vector& u0, double x_end,
                                 const std::function<Vector(double)>& forcing, std::size_t points = 33,
                                 std::size_t max_panels = 1024) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const Index n = sys.h_matrix.rows();
  if (u0.size() != n) throw DimensionError("initial state has the wrong length");
  auto duhamel = [&](double x, std::size_t panels) {
    Vector acc = Vector::Zero(n);
    const double width = x / static_cast<double>(panels);
    const auto& absc = Rule::abscissa();
    const auto& wts = Rule::weights();
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = (static_cast<double>(p) + 0.5) * width;
      const double half = 0.5 * width;
      for (std::size_t k = 0; k < absc.size(); ++k) {
        for (int sign : {1, -1}) {
          if (sign < 0 && absc[k] == 0.0) continue;
          const double s = mid + sign * half * absc[k];
          acc += (half * wts[k]) * (expm(Matrix((x - s) * sys.h_matrix)) * forcing(s));
        }
      }
    }
    return acc;
  };
  Trajectory t;
  t.xs = uniform_grid(x_end, points);
  for (double x : t.xs) {
    const Vector hom = expm(Matrix(x * sys.h_matrix)) * u0;
    if (x == 0.0) {
      t.states.push_back(hom);
      continue;
    }
    std::size_t panels = 1;
    Vector prev = duhamel(x, panels);
    for (;;) {
      if (panels * 2 > max_panels) throw QuadratureFailure("Duhamel quadrature did not settle at x=" + std::to_string(x));
      panels *= 2;
      Vector next = duhamel(x, panels);
      const double scale = std::max({1.0, next.norm(), hom.norm()});
      const bool done = (next - prev).norm() <= 1e-10 * scale;
      prev = std::move(next);
      if (done) break;
    }
    t.states.push_back(hom + prev);
  }
  return t;
}

/// w_n(x) = p(x) + c_left e^{-a x} + c_right e^{-a (h - x)}, a = n pi,
/// the solution of w'' - a^2 w = u1 with prescribed w(0), w(h). The
/// exponential pair spans the same space as cosh / sinh and stays bounded
/// for large a h.
struct ModeDisplacement {
  std::size_t mode = 1;
  double span = 1.0;
  double wavenumber = 0.0;
  Polynomial particular;
  double c_left = 0.0;
  double c_right = 0.0;

  double operator()(double x) const {
    return particular(x) + c_left * std::exp(-wavenumber * x) + c_right * std::exp(-wavenumber * (span - x));
  }
  double second_derivative(double x) const {
    const double a2 = wavenumber * wavenumber;
    return particular.derivative(2)(x) + a2 * (c_left * std::exp(-wavenumber * x) +
                                              c_right * std::exp(-wavenumber * (span - x)));
  }
};

inline ModeDisplacement reconstruct_displacement(std::size_t mode, const Polynomial& u1, double w0, double wh,
                                                 double span) {
  if (mode == 0) throw IllPosed("w'' = u1 with edge values is not a sine-mode problem (homogeneous system singular)");
  if (!(span > 0.0)) throw Error("span must be positive");
  const double a = static_cast<double>(mode) * kPi;
  const double a2 = a * a;
  ModeDisplacement w;
  w.mode = mode;
  w.span = span;
  w.wavenumber = a;
  // p = -sum_k a^{-2(k+1)} u1^{(2k)}
  Polynomial term = u1;
  double factor = 1.0 / a2;
  while (!term.is_zero()) {
    w.particular -= factor * term;
    term = term.derivative(2);
    factor /= a2;
  }
  const double e = std::exp(-a * span);
  const double det = 1.0 - e * e;
  if (!(det > 0.0)) throw IllPosed("edge system is singular");
  const double r0 = w0 - w.particular(0.0);
  const double rh = wh - w.particular(span);
  w.c_left = (r0 - e * rh) / det;
  w.c_right = (rh - e * r0) / det;
  return w;
}

/// max |w'' - a^2 w - u1| on a uniform collocation grid.
inline double reconstruction_residual(const ModeDisplacement& w, const Polynomial& u1, std::size_t points = 33) {
  double worst = 0.0;
  const double a2 = w.wavenumber * w.wavenumber;
  for (double x : uniform_grid(w.span, points)) worst = std::max(worst, std::abs(w.second_derivative(x) - a2 * w(x) - u1(x)));
  return worst;
}

/// max over a 33-point grid of |D (phi'''' - 2 a^2 phi'' + a^4 phi) - q|.
inline double pde_residual(std::size_t mode, const Polynomial& profile, const Polynomial& load, double rigidity,
                           double span, std::size_t points = 33) {
  const double a = static_cast<double>(mode) * kPi;
  const double a2 = a * a;
  const Polynomial lhs =
      rigidity * (profile.derivative(4) - (2.0 * a2) * profile.derivative(2) + (a2 * a2) * profile);
  double worst = 0.0;
  for (double x : uniform_grid(span, points)) worst = std::max(worst, std::abs(lhs(x) - load(x)));
  return worst;
}

inline double sup_norm(const Polynomial& p, double span, std::size_t points = 33) {
  double m = 0.0;
  for (double x : uniform_grid(span, points)) m = std::max(m, std::abs(p(x)));
  return m;
}

// ---------------------------------------------------------------------------
// Plate problem description.

struct EdgeData {
  std::optional<double> w0, wh, dw0, dwh;
};

struct PlateProblem {
  std::size_t n_modes = 1;
  double span_h = 1.0;
  double rigidity_D = 1.0;
  std::map<std::size_t, Polynomial> load;      ///< sine coefficient q_n(x)
  std::map<std::size_t, Polynomial> profile;   ///< manufactured displacement phi_n(x)
  std::map<std::size_t, EdgeData> edges;
};

/// Max pde_residual over every mode carrying a load or a displacement.
inline double pde_residual(const std::map<std::size_t, Polynomial>& w_modes, const PlateProblem& problem) {
  double worst = 0.0;
  std::map<std::size_t, bool> modes;
  for (const auto& [n, _] : w_modes) modes[n] = true;
  for (const auto& [n, _] : problem.load) modes[n] = true;
  for (const auto& [n, _] : modes) {
    const auto w = w_modes.count(n) ? w_modes.at(n) : Polynomial{};
    const auto q = problem.load.count(n) ? problem.load.at(n) : Polynomial{};
    worst = std::max(worst, pde_residual(n, w, q, problem.rigidity_D, problem.span_h));
  }
  return worst;
}

/// Relative-bound families built from the per-mode blocks of the plate.
inline HamiltonianFamily plate_family() {
  return HamiltonianFamily{"plate", [](std::size_t n_modes) {
                             std::vector<HamiltonianBlocks> out;
                             const auto one = BasisTag::abstract(1);
                             auto zero1 = OperatorRep::zero(one, one);
                             out.push_back({zero1, OperatorRep::identity(one), zero1});
                             const auto two = BasisTag::abstract(2);
                             for (std::size_t n = 1; n <= n_modes; ++n) {
                               const double a = static_cast<double>(n) * kPi;
                               Matrix an(2, 2);
                               an << 0.0, a, a, 0.0;
                               OperatorRep am(an, two, two);
                               out.push_back({am, am + OperatorRep::identity(two), OperatorRep::zero(two, two)});
                             }
                             return out;
                           }};
}

/// Blocks (A, A, -A) with A the plate operator, mode by mode.
inline HamiltonianFamily example31_family() {
  return HamiltonianFamily{"example31", [](std::size_t n_modes) {
                             std::vector<HamiltonianBlocks> out;
                             const auto one = BasisTag::abstract(1);
                             auto zero1 = OperatorRep::zero(one, one);
                             out.push_back({zero1, zero1, zero1});
                             const auto two = BasisTag::abstract(2);
                             for (std::size_t n = 1; n <= n_modes; ++n) {
                               const double a = static_cast<double>(n) * kPi;
                               Matrix an(2, 2);
                               an << 0.0, a, a, 0.0;
                               OperatorRep am(an, two, two);
                               out.push_back({am, am, -am});
                             }
                             return out;
                           }};
}

/// Single-operator families for S = T = A, S = 0, S = I.
inline OperatorFamily plate_operator_family(const std::string& which) {
  return OperatorFamily{"plate:" + which, [which](std::size_t n_modes) {
                          std::vector<OperatorPair> out;
                          const auto one = BasisTag::abstract(1);
                          const auto zero1 = OperatorRep::zero(one, one);
                          auto pick = [&](const OperatorRep& t, const OperatorRep& id) {
                            if (which == "A") return OperatorPair{t, t};
                            if (which == "zero") return OperatorPair{OperatorRep::zero(t.domain(), t.codomain()), t};
                            if (which == "identity") return OperatorPair{id, t};
                            throw Error("unknown plate family '" + which + "'");
                          };
                          out.push_back(pick(zero1, OperatorRep::identity(one)));
                          const auto two = BasisTag::abstract(2);
                          for (std::size_t n = 1; n <= n_modes; ++n) {
                            const double a = static_cast<double>(n) * kPi;
                            Matrix an(2, 2);
                            an << 0.0, a, a, 0.0;
                            out.push_back(pick(OperatorRep(an, two, two), OperatorRep::identity(two)));
                          }
                          return out;
                        }};
}

}  // namespace hamverify::plate
