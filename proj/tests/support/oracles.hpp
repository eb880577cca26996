#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers or differentiation engine.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, Mat[r][c]

inline double dot(const Vec& a, const Vec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) y[r] = dot(m[r], x);
  return y;
}
inline Vec matvec_t(const Mat& m, const Vec& y) {
  Vec x(m.empty() ? 0 : m[0].size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) x[c] += m[r][c] * y[r];
  return x;
}

inline double rel_dist(const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d) / std::max(norm(b), 1e-300);
}

// Central differences of a scalar function.
inline Vec finite_difference(const std::function<double(const Vec&)>& f, Vec x, double h) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

// Largest singular value by power iteration on M^T M.
inline double spectral_norm(const Mat& m, int iters = 2000) {
  Vec x(m[0].size(), 1.0);
  double s = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec y = matvec_t(m, matvec(m, x));
    const double ny = norm(y);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / ny;
    s = std::sqrt(ny);
  }
  return s;
}

// Chambolle-Pock primal-dual hybrid gradient for
//   min_x ||D x||_1  s.t.  ||A x - y|| <= eta
// with K = [D; A], f*(p) = indicator(|p|_inf <= 1) on the D part and
// the conjugate of the ball indicator on the A part.
inline Vec pdhg_constrained_tv(const Mat& a, const Mat& d, const Vec& y, double eta,
                               long iterations) {
  const std::size_t n = a[0].size();
  const std::size_t pd = d.size();
  const std::size_t m = a.size();
  Mat k = d;
  k.insert(k.end(), a.begin(), a.end());
  const double l = spectral_norm(k);
  const double tau = 0.99 / l;
  const double sigma = 0.99 / l;
  Vec x(n, 0.0), xbar(n, 0.0), p(pd, 0.0), q(m, 0.0);
  for (long it = 0; it < iterations; ++it) {
    Vec dx = matvec(d, xbar);
    for (std::size_t i = 0; i < pd; ++i) p[i] = std::clamp(p[i] + sigma * dx[i], -1.0, 1.0);
    // prox of sigma g*, g = indicator of ball(y, eta): Moreau identity
    Vec ax = matvec(a, xbar);
    Vec t(m);
    for (std::size_t i = 0; i < m; ++i) t[i] = q[i] + sigma * ax[i];
    Vec c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = t[i] / sigma - y[i];
    const double nc = norm(c);
    if (nc > eta)
      for (std::size_t i = 0; i < m; ++i) c[i] *= eta / nc;
    for (std::size_t i = 0; i < m; ++i) q[i] = t[i] - sigma * (y[i] + c[i]);
    Vec g = matvec_t(d, p);
    Vec ga = matvec_t(a, q);
    Vec xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] - tau * (g[i] + ga[i]);
    for (std::size_t i = 0; i < n; ++i) xbar[i] = 2 * xn[i] - x[i];
    x = std::move(xn);
  }
  return x;
}

// Explicit 1D gradient matrix: forward differences plus a mean row 1/N.
inline Mat gradient_1d_matrix(std::size_t n) {
  Mat g(n, Vec(n, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g[i][i] = -1.0;
    g[i][i + 1] = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) g[n - 1][j] = 1.0 / static_cast<double>(n);
  return g;
}

}  // namespace oracle
