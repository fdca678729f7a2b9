#pragma once

// Complex 2x2 matrices with the quaternion structure used throughout:
// the q-conjugate of [[a,b],[c,d]] is its adjugate [[d,-b],[-c,a]], so
// for det = 1 the q-conjugate equals the inverse.

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace qdimer {

using cplx = std::complex<double>;

struct Matrix2 {
  cplx a{0.0}, b{0.0}, c{0.0}, d{0.0};  // [[a,b],[c,d]]

  static Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Matrix2 zero() { return {}; }
  static Matrix2 diagonal(cplx lam) { return {lam, 0.0, 0.0, 1.0 / lam}; }

  cplx trace() const { return a + d; }
  cplx det() const { return a * d - b * c; }

  // Adjugate; inverse scaled by det. For SL2 elements this is the inverse.
  Matrix2 qconj() const { return {d, -b, -c, a}; }

  Matrix2 inverse() const {
    cplx dd = det();
    if (std::abs(dd) < 1e-300) throw std::runtime_error("Matrix2: singular");
    return {d / dd, -b / dd, -c / dd, a / dd};
  }

  Matrix2 operator*(const Matrix2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Matrix2 operator+(const Matrix2& o) const {
    return {a + o.a, b + o.b, c + o.c, d + o.d};
  }
  Matrix2 operator-(const Matrix2& o) const {
    return {a - o.a, b - o.b, c - o.c, d - o.d};
  }
  Matrix2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }
  Matrix2 operator-() const { return {-a, -b, -c, -d}; }

  cplx operator()(int r, int col) const {
    return r == 0 ? (col == 0 ? a : b) : (col == 0 ? c : d);
  }
  cplx& operator()(int r, int col) {
    return r == 0 ? (col == 0 ? a : b) : (col == 0 ? c : d);
  }

  double norm() const {  // Frobenius
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  }
};

inline Matrix2 operator*(cplx s, const Matrix2& m) { return m * s; }

inline double dist(const Matrix2& x, const Matrix2& y) { return (x - y).norm(); }

// Principal logarithm restricted to matrices with no eigenvalue on the
// closed negative real axis. Eigenvalues from the characteristic
// polynomial; the defective case (equal eigenvalues lam with a nilpotent
// part N) uses log(lam) I + N/lam.
inline Matrix2 log2x2(const Matrix2& m) {
  cplx tr = m.trace(), de = m.det();
  cplx disc = std::sqrt(tr * tr - 4.0 * de);
  cplx l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
  if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);  // |l1| >= |l2|
  l2 = de / l1;                                        // stable small root
  auto on_negative_axis = [](cplx l) {
    return l.real() < 0.0 && std::abs(l.imag()) <= 1e-12 * std::abs(l.real());
  };
  if (on_negative_axis(l1) || on_negative_axis(l2) ||
      std::abs(l1) < 1e-300 || std::abs(l2) < 1e-300)
    throw std::runtime_error("log2x2: eigenvalue on negative real axis");
  if (std::abs(l1 - l2) > 1e-8 * std::abs(l1)) {
    // f(M) = (f(l1)(M - l2 I) - f(l2)(M - l1 I)) / (l1 - l2)
    Matrix2 p = (m - Matrix2::identity() * l2) * (std::log(l1) / (l1 - l2));
    Matrix2 q = (m - Matrix2::identity() * l1) * (std::log(l2) / (l1 - l2));
    return p - q;
  }
  cplx lam = (l1 + l2) / 2.0;
  Matrix2 n = m - Matrix2::identity() * lam;  // nilpotent up to roundoff
  return Matrix2::identity() * std::log(lam) + n * (1.0 / lam);
}

inline Matrix2 exp2x2(const Matrix2& m) {
  cplx tr = m.trace(), de = m.det();
  cplx disc = std::sqrt(tr * tr - 4.0 * de);
  cplx l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
  if (std::abs(l1 - l2) > 1e-8 * (1.0 + std::abs(l1))) {
    Matrix2 p = (m - Matrix2::identity() * l2) * (std::exp(l1) / (l1 - l2));
    Matrix2 q = (m - Matrix2::identity() * l1) * (std::exp(l2) / (l1 - l2));
    return p - q;
  }
  cplx lam = tr / 2.0;
  Matrix2 n = m - Matrix2::identity() * lam;
  return (Matrix2::identity() + n) * std::exp(lam);
}

// Geodesic from the identity to target inside SL2: t -> exp(t log(target)).
// Endpoint t=1 reproduces target; det stays 1 along the path because
// tr log(target) = log det(target) = 0.
inline Matrix2 sl2_path(const Matrix2& target, double t) {
  return exp2x2(log2x2(target) * cplx(t, 0.0));
}

// Velocity of the path above at parameter t: log(target) * path(t).
inline Matrix2 sl2_path_velocity(const Matrix2& target, double t) {
  Matrix2 l = log2x2(target);
  return l * exp2x2(l * cplx(t, 0.0));
}

// Haar-uniform SU(2) via a uniform point on S^3:
// (q0,q1,q2,q3) -> [[q0+i q1, q2+i q3],[-q2+i q3, q0-i q1]].
template <class Rng>
Matrix2 random_su2(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double q0, q1, q2, q3, n2;
  do {
    q0 = g(rng); q1 = g(rng); q2 = g(rng); q3 = g(rng);
    n2 = q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3;
  } while (n2 < 1e-12);
  double s = 1.0 / std::sqrt(n2);
  q0 *= s; q1 *= s; q2 *= s; q3 *= s;
  return {cplx(q0, q1), cplx(q2, q3), cplx(-q2, q3), cplx(q0, -q1)};
}

// Random SL2 with moderate condition number: product of an SU(2) element
// and a diagonal stretch diag(r, 1/r).
template <class Rng>
Matrix2 random_sl2(Rng& rng, double max_stretch = 1.5) {
  std::uniform_real_distribution<double> u(1.0 / max_stretch, max_stretch);
  Matrix2 k1 = random_su2(rng), k2 = random_su2(rng);
  return k1 * Matrix2::diagonal(u(rng)) * k2;
}

}  // namespace qdimer
