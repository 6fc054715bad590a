#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace hamverify {

/// Real polynomial in x, coefficients in ascending powers.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim(); }

  static Polynomial monomial(std::size_t power, double coeff = 1.0) {
    std::vector<double> c(power + 1, 0.0);
    c[power] = coeff;
    return Polynomial(std::move(c));
  }

  const std::vector<double>& coefficients() const noexcept { return c_; }
  bool is_zero() const noexcept { return c_.empty(); }
  /// Degree of the zero polynomial is reported as 0.
  std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative(std::size_t times = 1) const {
    std::vector<double> c = c_;
    for (std::size_t t = 0; t < times && !c.empty(); ++t) {
      for (std::size_t k = 1; k < c.size(); ++k) c[k - 1] = static_cast<double>(k) * c[k];
      c.pop_back();
    }
    return Polynomial(std::move(c));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += (-1.0) * o; }
  Polynomial& operator*=(double s) {
    for (auto& v : c_) v *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
  friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  /// Largest coefficient magnitude.
  double max_coefficient() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, v < 0 ? -v : v);
    return m;
  }

private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

}  // namespace hamverify
