#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hamverify/block.hpp"
#include "hamverify/criteria.hpp"
#include "hamverify/errors.hpp"
#include "hamverify/linalg.hpp"

namespace hamverify {

struct OperatorPair {
  OperatorRep s;
  OperatorRep t;
};

/// A pair (S_N, T_N) observed through truncations N. The generator returns
/// the pair as a list of decoupled components whose direct sum is the
/// truncation; a family without such structure returns one component.
struct OperatorFamily {
  std::string label;
  std::function<std::vector<OperatorPair>(std::size_t)> components;
};

/// Direct sum of operators in Abstract bases.
inline OperatorRep direct_sum(const std::vector<OperatorRep>& parts) {
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    rows += p.rows();
    cols += p.cols();
  }
  Matrix m = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& p : parts) {
    m.block(r, c, p.rows(), p.cols()) = p.entries();
    r += p.rows();
    c += p.cols();
  }
  return OperatorRep::abstract(std::move(m));
}

inline OperatorPair assemble(const OperatorFamily& family, std::size_t n) {
  std::vector<OperatorRep> s, t;
  for (auto& comp : family.components(n)) {
    s.push_back(std::move(comp.s));
    t.push_back(std::move(comp.t));
  }
  return {direct_sum(s), direct_sum(t)};
}

/// ||S (T - lambda)^{-1}||.
inline double resolvent_norm(const OperatorRep& s, const OperatorRep& t, Scalar lambda) {
  if (!t.is_endomorphism()) throw BasisMismatch("resolvent_norm needs T to be an endomorphism");
  if (!(s.domain() == t.domain()))
    throw BasisMismatch("S domain " + s.domain().to_string() + " != T domain " + t.domain().to_string());
  const Matrix inv = shifted_inverse(t.entries(), lambda, "T - lambda");
  return operator_norm(Matrix(s.entries() * inv));
}

/// Same quantity for a direct sum: the maximum over components.
inline double resolvent_norm(const std::vector<OperatorPair>& components, Scalar lambda) {
  double best = 0.0;
  for (const auto& c : components) best = std::max(best, resolvent_norm(c.s, c.t, lambda));
  return best;
}

enum class BoundClass { Zero, LessThanOne, AboutOne, GreaterThanOne, Unresolved };

inline const char* to_string(BoundClass c) {
  switch (c) {
    case BoundClass::Zero: return "0";
    case BoundClass::LessThanOne: return "<1";
    case BoundClass::AboutOne: return "<=1, not <1";
    case BoundClass::GreaterThanOne: return ">1";
    case BoundClass::Unresolved: return "unresolved";
  }
  return "";
}

/// Decision band: below 0.05 reads as 0, within 0.05 of 1 as "about 1".
inline constexpr double kBoundBand = 0.05;

inline BoundClass classify_bound(double value, bool resolved) {
  if (!resolved) return BoundClass::Unresolved;
  if (value < kBoundBand) return BoundClass::Zero;
  if (value < 1.0 - kBoundBand) return BoundClass::LessThanOne;
  if (value <= 1.0 + kBoundBand) return BoundClass::AboutOne;
  return BoundClass::GreaterThanOne;
}

inline bool bound_is_zero(BoundClass c) { return c == BoundClass::Zero; }
inline bool bound_below_one(BoundClass c) { return c == BoundClass::Zero || c == BoundClass::LessThanOne; }
inline bool bound_at_most_one(BoundClass c) { return bound_below_one(c) || c == BoundClass::AboutOne; }

struct RelBoundEstimate {
  std::string family;
  std::vector<double> lambdas;
  std::vector<std::size_t> ns;
  std::vector<std::vector<double>> grid;  ///< grid[i][j] = a(lambdas[i], ns[j])
  std::vector<double> n_limit;            ///< sup over the N schedule, per lambda
  std::vector<double> tail_gap;           ///< a(l, N_last) - a(l, N_prev)
  std::vector<bool> tail_resolved;        ///< tail gap within tolerance
  double tail_tolerance = kBoundBand;
  double extrapolated_bound = 0.0;
  bool resolved = false;
  bool monotone_in_N = true;
  bool decreasing_in_lambda_after_limit = true;
  BoundClass classification = BoundClass::Unresolved;
};

inline const std::vector<std::size_t>& default_n_schedule() {
  static const std::vector<std::size_t> s{64, 256, 1024, 4096};
  return s;
}

inline const std::vector<double>& default_lambda_schedule() {
  static const std::vector<double> s{10.0, 1e2, 1e3, 1e4};
  return s;
}

/// Relative bound of S with respect to T, read as
///   lim_{l -> inf} sup_N ||S_N (T_N - i l)^{-1}||.
///
/// The sup over N is taken first. A lambda counts towards the limit only if
/// the last step of its N sequence moved by at most tail_tolerance (relative
/// to max(1, value)); the bound is the minimum of n_limit over those lambdas.
/// With no resolved lambda the estimate is reported as unresolved.
inline RelBoundEstimate relative_bound_estimate(const OperatorFamily& family, const std::vector<double>& lambdas,
                                                const std::vector<std::size_t>& ns,
                                                double tail_tolerance = kBoundBand) {
  if (lambdas.empty() || ns.empty()) throw Error("relative_bound_estimate needs nonempty schedules");
  if (!std::is_sorted(lambdas.begin(), lambdas.end()) ||
      std::adjacent_find(lambdas.begin(), lambdas.end()) != lambdas.end() || lambdas.front() <= 0.0)
    throw Error("lambda schedule must be positive and strictly increasing");
  if (!std::is_sorted(ns.begin(), ns.end()) || std::adjacent_find(ns.begin(), ns.end()) != ns.end())
    throw Error("N schedule must be strictly increasing");

  RelBoundEstimate est;
  est.family = family.label;
  est.lambdas = lambdas;
  est.ns = ns;
  est.tail_tolerance = tail_tolerance;
  est.grid.assign(lambdas.size(), std::vector<double>(ns.size(), 0.0));
  for (std::size_t j = 0; j < ns.size(); ++j) {
    const auto comps = family.components(ns[j]);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const Scalar z(0.0, lambdas[i]);
      try {
        est.grid[i][j] = resolvent_norm(comps, z);
      } catch (const LambdaInSpectrum& e) {
        throw LambdaInSpectrum(family.label + " at lambda=i*" + std::to_string(lambdas[i]) +
                                   ", N=" + std::to_string(ns[j]),
                               e.margin());
      }
    }
  }

  double bound = std::numeric_limits<double>::infinity();
  double fallback = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& row = est.grid[i];
    const double sup = *std::max_element(row.begin(), row.end());
    const double gap = row.size() > 1 ? row.back() - row[row.size() - 2] : 0.0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] < row[j - 1] - 1e-12 * std::max(1.0, row[j - 1])) est.monotone_in_N = false;
    const bool ok = std::abs(gap) <= tail_tolerance * std::max(1.0, sup);
    est.n_limit.push_back(sup);
    est.tail_gap.push_back(gap);
    est.tail_resolved.push_back(ok);
    fallback = std::min(fallback, sup);
    if (ok) {
      bound = std::min(bound, sup);
      est.resolved = true;
    }
  }
  for (std::size_t i = 1; i < est.n_limit.size(); ++i)
    if (est.n_limit[i] > est.n_limit[i - 1] * (1.0 + 1e-12) + 1e-300) est.decreasing_in_lambda_after_limit = false;
  est.extrapolated_bound = est.resolved ? bound : fallback;
  est.classification = classify_bound(est.extrapolated_bound, est.resolved);
  return est;
}

struct AccretivityReport {
  double min_real_part = 0.0;  ///< smallest eigenvalue of (M + M*) / 2
  double tolerance = 0.0;
  bool is_accretive = false;
};

inline AccretivityReport accretivity_check(const OperatorRep& m) {
  if (!m.is_endomorphism()) throw BasisMismatch("accretivity_check needs an endomorphism");
  const Matrix herm = 0.5 * (m.entries() + m.entries().adjoint());
  AccretivityReport r;
  r.tolerance = 1e-10 * operator_norm(m);
  const auto d = hermitian_eig(herm);
  r.min_real_part = d.eigenvalues.empty() ? 0.0 : d.eigenvalues.front().real();
  r.is_accretive = r.min_real_part >= -r.tolerance;
  return r;
}

struct AccretiveInequalityReport {
  double lambda = 0.0;
  double min_gap = 0.0;  ///< min eigenvalue of (A*+l)*(A*+l) - A A* - l^2
  double tolerance = 0.0;
  bool pass = false;
};

/// Certifies ||(A* + l)x||^2 >= ||A*x||^2 + l^2 ||x||^2 for accretive A*.
inline AccretiveInequalityReport accretive_resolvent_inequality(const OperatorRep& a, double lambda) {
  if (!(lambda > 0.0)) throw Error("accretive_resolvent_inequality needs lambda > 0");
  const auto as = adjoint(a);
  const auto acc = accretivity_check(as);
  if (!acc.is_accretive) throw NotAccretive("A* is not accretive", acc.min_real_part);
  const Matrix shifted = as.entries() + lambda * Matrix::Identity(a.rows(), a.cols());
  const Index n = a.rows();
  const Matrix gap = shifted.adjoint() * shifted - a.entries() * a.entries().adjoint() -
                     lambda * lambda * Matrix::Identity(n, n);
  AccretiveInequalityReport r;
  r.lambda = lambda;
  const Matrix herm = 0.5 * (gap + gap.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  r.min_gap = n == 0 ? 0.0 : solver.eigenvalues()(0);
  const double na = operator_norm(a);
  r.tolerance = 1e-10 * std::max(1.0, (na + lambda) * (na + lambda));
  r.pass = r.min_gap >= -r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Hypothesis report for the perturbation-type sufficient conditions.

struct HamiltonianBlocks {
  OperatorRep a, b, c;
};

struct HamiltonianFamily {
  std::string label;
  std::function<std::vector<HamiltonianBlocks>(std::size_t)> components;
};

namespace detail {

inline OperatorFamily derived_family(const HamiltonianFamily& h, std::string label,
                                     std::function<OperatorPair(const HamiltonianBlocks&)> pick) {
  return OperatorFamily{std::move(label), [gen = h.components, pick](std::size_t n) {
                          std::vector<OperatorPair> out;
                          for (const auto& blk : gen(n)) out.push_back(pick(blk));
                          return out;
                        }};
}

inline std::vector<Scalar> sorted_spectrum(const Matrix& m) {
  auto v = eig(m).eigenvalues;
  std::sort(v.begin(), v.end(), lex_less);
  return v;
}

inline bool same_spectrum(const Matrix& x, const Matrix& y, double tol) {
  if (x.rows() != y.rows()) return false;
  const auto sx = sorted_spectrum(x), sy = sorted_spectrum(y);
  for (std::size_t k = 0; k < sx.size(); ++k)
    if (std::abs(sx[k] - sy[k]) > tol * std::max(1.0, std::abs(sx[k]))) return false;
  return true;
}

}  // namespace detail

struct HypothesisCase {
  std::string id;
  std::string statement;
  bool regime_ok = false;
  bool side_condition = false;
  bool hypotheses_met = false;
  bool applies = false;
  bool conclusion_pass = false;
  bool sound = true;  ///< false only if the case applies but the conclusion check fails
};

struct HypothesisReport {
  std::string family;
  DomainRegime regime = DomainRegime::DiagonalDomain;
  RelBoundEstimate c_by_a;    ///< C relative to A
  RelBoundEstimate b_by_as;   ///< B relative to A*
  RelBoundEstimate a_by_c;    ///< A relative to C
  RelBoundEstimate as_by_b;   ///< A* relative to B
  AccretivityReport accretive_a;
  AccretivityReport accretive_neg_a;
  bool a_self_adjoint = false;
  DirectReport conclusion;
  std::vector<HypothesisCase> cases;
  bool sound = true;

  std::vector<std::string> applicable() const {
    std::vector<std::string> ids;
    for (const auto& c : cases)
      if (c.applies) ids.push_back(c.id);
    return ids;
  }
  const HypothesisCase& find(const std::string& id) const {
    for (const auto& c : cases)
      if (c.id == id) return c;
    throw Error("no hypothesis case '" + id + "'");
  }
};

/// Estimates the four relative bounds of the block family, evaluates every
/// perturbation-type sufficient condition for JH = (JH)*, and cross-checks
/// each satisfied one against the direct test on H.
///
/// Case ids:
///   both-below-one:C|A,B|A*        C A-bounded and B A*-bounded, both < 1
///   both-below-one:A|C,A*|B        A C-bounded and A* B-bounded, both < 1
///   zero:C|A, zero:B|A*            one bound equal to 0
///   accretive:strict-C|A / strict-B|A*   A or -A accretive, one < 1 and one <= 1
///   self-adjoint:strict-C|A / strict-B|A*   A self-adjoint, one < 1 and one <= 1
///   off-diagonal:strict-A|C / strict-A*|B   D(C) x D(B) regime, one < 1 and one <= 1
inline HypothesisReport corollary_hypothesis_report(const HamiltonianOp& h, const HamiltonianFamily& family,
                                                    const std::vector<double>& lambdas = default_lambda_schedule(),
                                                    const std::vector<std::size_t>& ns = default_n_schedule()) {
  const std::size_t base = h.space().truncation();
  {
    std::vector<OperatorRep> as, bs, cs;
    for (auto& blk : family.components(base)) {
      as.push_back(blk.a);
      bs.push_back(blk.b);
      cs.push_back(blk.c);
    }
    const auto fa = direct_sum(as), fb = direct_sum(bs), fc = direct_sum(cs);
    const double tol = 1e-8;
    if (!detail::same_spectrum(fa.entries(), h.a().entries(), tol) ||
        !detail::same_spectrum(fb.entries(), h.b().entries(), tol) ||
        !detail::same_spectrum(fc.entries(), h.c().entries(), tol))
      throw StructureMismatch("family '" + family.label + "' does not match H at N=" + std::to_string(base));
  }

  HypothesisReport r;
  r.family = family.label;
  r.regime = h.regime();
  auto fam = [&](const char* tag, auto pick) {
    return detail::derived_family(family, family.label + ":" + tag, pick);
  };
  r.c_by_a = relative_bound_estimate(fam("C|A", [](const HamiltonianBlocks& b) { return OperatorPair{b.c, b.a}; }),
                                     lambdas, ns);
  r.b_by_as = relative_bound_estimate(
      fam("B|A*", [](const HamiltonianBlocks& b) { return OperatorPair{b.b, adjoint(b.a)}; }), lambdas, ns);
  r.a_by_c = relative_bound_estimate(fam("A|C", [](const HamiltonianBlocks& b) { return OperatorPair{b.a, b.c}; }),
                                     lambdas, ns);
  r.as_by_b = relative_bound_estimate(
      fam("A*|B", [](const HamiltonianBlocks& b) { return OperatorPair{adjoint(b.a), b.b}; }), lambdas, ns);
  r.accretive_a = accretivity_check(h.a());
  r.accretive_neg_a = accretivity_check(-h.a());
  r.a_self_adjoint = hermitian_deviation(h.a()) <= h.tolerance();
  r.conclusion = symplectic_selfadjoint_direct(h);

  const auto ca = r.c_by_a.classification, ba = r.b_by_as.classification;
  const auto ac = r.a_by_c.classification, ab = r.as_by_b.classification;
  const bool diag = h.regime() == DomainRegime::DiagonalDomain;
  const bool accretive = r.accretive_a.is_accretive || r.accretive_neg_a.is_accretive;

  auto add = [&](std::string id, std::string statement, bool regime_ok, bool side, bool hyp) {
    HypothesisCase c{std::move(id), std::move(statement), regime_ok, side, hyp};
    c.applies = regime_ok && side && hyp;
    c.conclusion_pass = r.conclusion.pass;
    c.sound = !c.applies || c.conclusion_pass;
    r.sound = r.sound && c.sound;
    r.cases.push_back(std::move(c));
  };
  add("both-below-one:C|A,B|A*", "C is A-bounded and B is A*-bounded, both relative bounds < 1", diag, true,
      bound_below_one(ca) && bound_below_one(ba));
  add("both-below-one:A|C,A*|B", "A is C-bounded and A* is B-bounded, both relative bounds < 1", !diag, true,
      bound_below_one(ac) && bound_below_one(ab));
  add("zero:C|A", "C is A-bounded with relative bound 0", diag, true, bound_is_zero(ca));
  add("zero:B|A*", "B is A*-bounded with relative bound 0", diag, true, bound_is_zero(ba));
  add("accretive:strict-C|A", "A or -A accretive; rel(C;A) < 1 and rel(B;A*) <= 1", diag, accretive,
      bound_below_one(ca) && bound_at_most_one(ba));
  add("accretive:strict-B|A*", "A or -A accretive; rel(C;A) <= 1 and rel(B;A*) < 1", diag, accretive,
      bound_at_most_one(ca) && bound_below_one(ba));
  add("self-adjoint:strict-C|A", "A self-adjoint; rel(C;A) < 1 and rel(B;A*) <= 1", diag, r.a_self_adjoint,
      bound_below_one(ca) && bound_at_most_one(ba));
  add("self-adjoint:strict-B|A*", "A self-adjoint; rel(C;A) <= 1 and rel(B;A*) < 1", diag, r.a_self_adjoint,
      bound_at_most_one(ca) && bound_below_one(ba));
  add("off-diagonal:strict-A|C", "rel(A;C) < 1 and rel(A*;B) <= 1", !diag, true,
      bound_below_one(ac) && bound_at_most_one(ab));
  add("off-diagonal:strict-A*|B", "rel(A;C) <= 1 and rel(A*;B) < 1", !diag, true,
      bound_at_most_one(ac) && bound_below_one(ab));
  return r;
}

// ---------------------------------------------------------------------------

struct OperatorSequence {
  std::string label;
  std::function<OperatorRep(std::size_t)> at;
};

struct NonclosednessReport {
  std::string family;
  std::vector<std::size_t> ns;
  std::vector<double> domain_norm_divergence;  ///< ||A_N x_N||^2
  std::vector<double> image_norm;              ///< ||H_N u_N||, H_N = [[A, A], [-A, -A]]
  std::vector<double> x_norm_sq;               ///< ||x_N||^2
  std::vector<double> spectral_radius;         ///< max |sigma(A_N)|
  double slope = 0.0;                          ///< growth of ||A_N x_N||^2 per unit N
  double threshold = 0.0;
  bool closure_defective = false;
};

/// Builds u_N = (x_N, -x_N), x_N = sum_{n <= N} e_n / n over the first N
/// coordinates, for H_N = [[A_N, A_N], [-A_N, -A_N]]. H_N u_N vanishes while
/// the graph-norm proxy ||A_N x_N||^2 may grow without bound.
inline NonclosednessReport nonclosedness_witness(const OperatorSequence& family, const std::vector<std::size_t>& ns,
                                                 double slope_threshold = 1e-2) {
  if (ns.empty()) throw Error("nonclosedness_witness needs a nonempty N schedule");
  NonclosednessReport r;
  r.family = family.label;
  r.ns = ns;
  r.threshold = slope_threshold;
  std::vector<double> previous;
  for (const auto n : ns) {
    const auto a = family.at(n);
    const auto h = example31_build(a);
    const Index dim = a.rows();
    if (static_cast<std::size_t>(dim) < n) throw DimensionError("A_N has fewer than N coordinates");
    Vector x = Vector::Zero(dim);
    for (std::size_t k = 1; k <= n; ++k) x(static_cast<Index>(k - 1)) = 1.0 / static_cast<double>(k);
    const Vector ax = h.a().entries() * x;
    const Vector top = ax - h.b().entries() * x;
    const Vector bottom = h.c().entries() * x - h.d().entries() * x;
    r.domain_norm_divergence.push_back(ax.squaredNorm());
    r.image_norm.push_back(std::sqrt(top.squaredNorm() + bottom.squaredNorm()));
    r.x_norm_sq.push_back(x.squaredNorm());

    auto spec = hermitian_eig(a, 1e-10).real_eigenvalues();
    double radius = 0.0;
    for (double v : spec) radius = std::max(radius, std::abs(v));
    r.spectral_radius.push_back(radius);
    for (double v : previous) {
      const bool found = std::any_of(spec.begin(), spec.end(), [&](double w) {
        return std::abs(v - w) <= 1e-10 * std::max(1.0, std::abs(v));
      });
      if (!found) throw NotNested(family.label + ": eigenvalue " + std::to_string(v) + " missing at N=" + std::to_string(n));
    }
    previous = std::move(spec);
  }
  if (ns.size() > 1) {
    r.slope = (r.domain_norm_divergence.back() - r.domain_norm_divergence.front()) /
              static_cast<double>(ns.back() - ns.front());
  } else {
    r.slope = r.domain_norm_divergence.front() / static_cast<double>(ns.front());
  }
  r.closure_defective = r.slope > slope_threshold;
  return r;
}

}  // namespace hamverify
