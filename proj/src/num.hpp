#pragma once

// Small internal numerics: tridiagonal solves, cell quadrature, scalar
// minimization.  Header-private to the library.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wlab::num {

// Thomas algorithm for a strictly diagonally dominant tridiagonal system.
// sub[i] couples row i to i-1 (sub[0] unused), sup[i] to i+1 (last unused).
inline std::vector<double> solve_tridiag(std::vector<double> sub,
                                         std::vector<double> diag,
                                         std::vector<double> sup,
                                         std::vector<double> rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
  return x;
}

// Cyclic variant via Sherman-Morrison; corner couples row 0 to row n-1
// (value top_right) and row n-1 to row 0 (value bottom_left).
inline std::vector<double> solve_cyclic_tridiag(const std::vector<double>& sub,
                                                std::vector<double> diag,
                                                const std::vector<double>& sup,
                                                const std::vector<double>& rhs,
                                                double top_right,
                                                double bottom_left) {
  const int n = static_cast<int>(diag.size());
  if (n < 3) throw std::invalid_argument("cyclic solve needs n >= 3");
  const double gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= top_right * bottom_left / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = bottom_left;
  auto y = solve_tridiag(sub, diag, sup, rhs);
  auto z = solve_tridiag(sub, diag, sup, u);
  const double vy = y[0] + top_right / gamma * y[n - 1];
  const double vz = z[0] + top_right / gamma * z[n - 1];
  const double factor = vy / (1.0 + vz);
  for (int i = 0; i < n; ++i) y[i] -= factor * z[i];
  return y;
}

// 5-point Gauss-Legendre on [a, b].
inline double gauss5(const std::function<double(double)>& f, double a,
                     double b) {
  static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double ws[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += ws[i] * f(mid + half * xs[i]);
  return s * half;
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double eps,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double eps = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, eps, 40);
}

// Golden-section minimum of f over [a, b].
inline double golden_min(const std::function<double(double)>& f, double a,
                         double b, int iters = 120) {
  const double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// G(x) = sum_{k>=1} x^k / (k k!), so that int_1^t (e^{as}-1)/s ds
// = G(a t) - G(a).  Entire; the series is fine for the |x| ~ 10 we meet.
inline double ein_series(double x) {
  double term = x;
  double sum = x;
  for (int k = 2; k < 400; ++k) {
    term *= x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Legendre P_l(x) by the three-term recurrence.
inline double legendre(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < l; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

inline double expm1_over(double x) {  // (e^x - 1)/x, stable near 0
  return std::abs(x) < 1e-8 ? 1.0 + 0.5 * x : std::expm1(x) / x;
}

}  // namespace wlab::num
