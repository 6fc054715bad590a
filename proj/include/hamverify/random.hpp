#pragma once

#include <cstdint>
#include <random>

#include "hamverify/block.hpp"
#include "hamverify/operator.hpp"

namespace hamverify {

/// Seeded source of dense test operators. Entries are independent standard
/// complex Gaussians.
class RandomOperators {
public:
  explicit RandomOperators(std::uint64_t seed) : rng_(seed) {}

  Matrix matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = Scalar(normal_(rng_), normal_(rng_));
    return m;
  }

  Matrix hermitian(Index n) {
    const Matrix m = matrix(n, n);
    return 0.5 * (m + m.adjoint());
  }

  Index size(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  HamiltonianOp hamiltonian(Index n) {
    const auto x = BasisTag::abstract(n);
    OperatorRep a(matrix(n, n), x, x);
    OperatorRep b(hermitian(n), x, x);
    OperatorRep c(hermitian(n), x, x);
    return HamiltonianOp(std::move(a), std::move(b), std::move(c));
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// The `random` built-in: one Hamiltonian of block size n from a seed.
inline HamiltonianOp random_hamiltonian(std::uint64_t seed, Index n) { return RandomOperators(seed).hamiltonian(n); }

}  // namespace hamverify
