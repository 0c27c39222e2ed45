#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace nvsens {

using cplx = std::complex<double>;

// Small dense complex square matrix, row-major.
class CMatrix {
public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n), a_(n * n) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMatrix diagonal(std::initializer_list<double> d) {
    CMatrix m(d.size());
    std::size_t i = 0;
    for (double v : d) {
      m(i, i) = v;
      ++i;
    }
    return m;
  }

  std::size_t size() const { return n_; }
  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  CMatrix& operator+=(const CMatrix& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }
  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) {
    for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] -= b.a_[i];
    return a;
  }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < a.n_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  CMatrix adjoint() const {
    CMatrix r(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }
  double off_diagonal_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j) s += std::norm((*this)(i, j));
    return std::sqrt(s);
  }
  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

private:
  std::size_t n_ = 0;
  std::vector<cplx> a_;
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const std::size_t n = a.size(), m = b.size();
  CMatrix r(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) r(i * m + k, j * m + l) = a(i, j) * b(k, l);
  return r;
}

inline bool is_hermitian(const CMatrix& h, double rtol) {
  const double scale = std::max(h.frobenius(), 1e-300);
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i; j < h.size(); ++j)
      if (std::abs(h(i, j) - std::conj(h(j, i))) > rtol * scale) return false;
  return true;
}

struct EigenSystem {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // column k belongs to values[k]
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Each pivot is made
// real by a phase change on column q, then annihilated with a real Givens
// rotation. Iterates until the off-diagonal Frobenius norm falls below
// tol * ||H||_F.
inline EigenSystem eigh_jacobi(CMatrix a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.size();
  CMatrix v = CMatrix::identity(n);
  const double scale = a.frobenius();

  int sweep = 0;
  while (scale > 0.0 && a.off_diagonal_norm() > tol * scale) {
    if (++sweep > max_sweeps)
      throw NumericalError("Jacobi eigensolver did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const cplx phase = apq / r;  // e^{i alpha}
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = 0.5 * std::atan2(2.0 * r, aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        // U = P R restricted to the (p, q) block.
        const cplx upp = c, upq = s, uqp = -s * std::conj(phase), uqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenSystem es{std::vector<double>(n), CMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    es.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) es.vectors(i, k) = v(i, order[k]);
  }
  return es;
}

}  // namespace nvsens
