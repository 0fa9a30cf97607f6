#pragma once

// Quaternionic linear algebra on R^4 and the constant 2-form calculus used
// throughout the library.
//
// Coordinate conventions (fixed once, everything else is derived from them):
//
//   * A point of V ~ R^4 has coordinates (x1, y1, x2, y2), identified with
//     the quaternion q = x1 + y1*i + x2*j - y2*k, i.e. with the pair of
//     complex numbers (z1, z2) = (x1 + i*y1, x2 + i*y2) via q = z1 + j*z2.
//     (The minus sign on the k-component is what makes the displayed
//     coordinate formulas for the Kaehler 2-forms below come out exactly.)
//
//   * Left multiplication by the unit quaternions i, j, k gives the three
//     anticommuting complex structures I, J, K; right multiplication by i
//     gives the commuting "Hermitian" complex structure of V.
//
//   * Constant 2-forms are stored by their six coefficients against
//     dx_p ^ dx_q, p < q, with axes ordered (x1, y1, x2, y2); the volume
//     form is sigma = dx1^dy1^dx2^dy2.
//
// With these conventions:
//
//   omega_V = dx1^dy1 + dx2^dy2            (selfdual, omega_V^2 = 2 sigma)
//   omega_I = dx1^dy1 - dx2^dy2            (anti-selfdual)
//   omega_J = dx1^dx2 + dy1^dy2            (anti-selfdual)
//   omega_K = -dx1^dy2 - dx2^dy1           (anti-selfdual)
//
// and each 2-form equals g(S ., .) for the matching structure S.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace polysymp {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// The four distinguished (almost) complex structures on V.
/// V is the right multiplication by i; I, J, K are left multiplications.
enum class Structure { V, I, J, K };

constexpr std::array<Structure, 3> kLeftStructures{Structure::I, Structure::J,
                                                   Structure::K};

namespace detail {

inline Mat4 make_mat4(std::array<double, 16> rm) {
  Mat4 a;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rm[4 * r + c];
  return a;
}

}  // namespace detail

/// Matrix of left multiplication by i, j or k in coordinates (x1,y1,x2,y2).
inline const Mat4& left_mul_matrix(Structure s) {
  static const Mat4 li = detail::make_mat4({0, -1, 0, 0,   //
                                            1, 0, 0, 0,    //
                                            0, 0, 0, 1,    //
                                            0, 0, -1, 0});
  static const Mat4 lj = detail::make_mat4({0, 0, -1, 0,   //
                                            0, 0, 0, -1,   //
                                            1, 0, 0, 0,    //
                                            0, 1, 0, 0});
  static const Mat4 lk = detail::make_mat4({0, 0, 0, 1,    //
                                            0, 0, -1, 0,   //
                                            0, 1, 0, 0,    //
                                            -1, 0, 0, 0});
  switch (s) {
    case Structure::I:
      return li;
    case Structure::J:
      return lj;
    case Structure::K:
      return lk;
    default:
      throw std::invalid_argument("left_mul_matrix: V is not a left structure");
  }
}

/// Matrix of right multiplication by i (the complex structure of V).
inline const Mat4& right_mul_i_matrix() {
  static const Mat4 ri = detail::make_mat4({0, -1, 0, 0,   //
                                            1, 0, 0, 0,    //
                                            0, 0, 0, -1,   //
                                            0, 0, 1, 0});
  return ri;
}

inline Vec4 left_mul(Structure s, const Vec4& v) {
  return left_mul_matrix(s) * v;
}

inline Vec4 right_mul_i(const Vec4& v) { return right_mul_i_matrix() * v; }

/// A constant 2-form on R^4, stored as coefficients against dx_p ^ dx_q,
/// p < q, in lexicographic order of (p,q); axes are (x1,y1,x2,y2).
/// Index map: 0:(1,2) 1:(1,3) 2:(1,4) 3:(2,3) 4:(2,4) 5:(3,4).
struct TwoForm {
  std::array<double, 6> c{};

  static constexpr int index(int p, int q) {
    // p < q, zero-based axes
    // (0,1)->0 (0,2)->1 (0,3)->2 (1,2)->3 (1,3)->4 (2,3)->5
    return p == 0 ? q - 1 : (p == 1 ? q + 1 : 5);
  }

  double operator()(const Vec4& u, const Vec4& v) const {
    double s = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q)
        s += c[index(p, q)] * (u[p] * v[q] - u[q] * v[p]);
    return s;
  }

  TwoForm operator+(const TwoForm& o) const {
    TwoForm r;
    for (int k = 0; k < 6; ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  TwoForm operator-(const TwoForm& o) const {
    TwoForm r;
    for (int k = 0; k < 6; ++k) r.c[k] = c[k] - o.c[k];
    return r;
  }
  TwoForm operator*(double t) const {
    TwoForm r;
    for (int k = 0; k < 6; ++k) r.c[k] = t * c[k];
    return r;
  }

  /// Euclidean norm in the orthonormal basis {dx_p ^ dx_q}.
  double norm() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
  }

  /// Frobenius pairing of two 2-forms.
  double dot(const TwoForm& o) const {
    double s = 0.0;
    for (int k = 0; k < 6; ++k) s += c[k] * o.c[k];
    return s;
  }
};

/// The Kaehler form of the structure: omega_V, omega_I, omega_J or omega_K,
/// with the coordinate coefficients listed at the top of this header.
inline TwoForm kaehler_form(Structure s) {
  TwoForm f;
  switch (s) {
    case Structure::V:
      f.c = {1, 0, 0, 0, 0, 1};  //  dx1^dy1 + dx2^dy2
      break;
    case Structure::I:
      f.c = {1, 0, 0, 0, 0, -1};  // dx1^dy1 - dx2^dy2
      break;
    case Structure::J:
      f.c = {0, 1, 0, 0, 1, 0};  //  dx1^dx2 + dy1^dy2
      break;
    case Structure::K:
      f.c = {0, 0, -1, 1, 0, 0};  // -dx1^dy2 + dy1^dx2
      break;
  }
  return f;
}

/// Hodge star on 2-forms for the Euclidean metric and orientation sigma.
/// Involution with eigenvalues +-1; omega_V is selfdual, the three left
/// Kaehler forms are anti-selfdual.
inline TwoForm hodge_star(const TwoForm& b) {
  TwoForm r;
  r.c[0] = b.c[5];
  r.c[1] = -b.c[4];
  r.c[2] = b.c[3];
  r.c[3] = b.c[2];
  r.c[4] = -b.c[1];
  r.c[5] = b.c[0];
  return r;
}

/// Selfdual / anti-selfdual components of a 2-form.
inline std::pair<TwoForm, TwoForm> sd_asd_split(const TwoForm& b) {
  TwoForm s = hodge_star(b);
  TwoForm sd, asd;
  for (int k = 0; k < 6; ++k) {
    sd.c[k] = 0.5 * (b.c[k] + s.c[k]);
    asd.c[k] = 0.5 * (b.c[k] - s.c[k]);
  }
  return {sd, asd};
}

/// Pullback of a constant 2-form by a linear map: (A*b)(u,v) = b(Au, Av).
/// Bilinear antisymmetric in (u,v) and quadratic in A.
inline TwoForm pullback(const Mat4& a, const TwoForm& b) {
  TwoForm r;
  for (int p = 0; p < 4; ++p)
    for (int q = p + 1; q < 4; ++q) {
      double s = 0.0;
      for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v)
          s += b.c[TwoForm::index(u, v)] *
               (a(u, p) * a(v, q) - a(u, q) * a(v, p));
      r.c[TwoForm::index(p, q)] = s;
    }
  return r;
}

/// Coefficient of b1 ^ b2 against the volume form sigma.
/// Symmetric bilinear; vanishes on selfdual/anti-selfdual pairs.
inline double wedge_ratio(const TwoForm& b1, const TwoForm& b2) {
  // e12^e34 = +sigma, e13^e24 = -sigma, e14^e23 = +sigma.
  return b1.c[0] * b2.c[5] + b1.c[5] * b2.c[0]   //
         - b1.c[1] * b2.c[4] - b1.c[4] * b2.c[1] //
         + b1.c[2] * b2.c[3] + b1.c[3] * b2.c[2];
}

namespace detail {

// R_i and the L_s are signed permutation matrices, so the reflection
// permutes entries of A with signs; the index tables are derived from the
// matrices once.
struct ReflectTable {
  std::array<int, 4> row, col;
  std::array<double, 4> row_sign, col_sign;
};

inline const ReflectTable& reflect_table(Structure s) {
  static const std::array<ReflectTable, 3> tables = [] {
    std::array<ReflectTable, 3> t{};
    const Mat4& ri = right_mul_i_matrix();
    for (int si = 0; si < 3; ++si) {
      const Mat4& ls = left_mul_matrix(kLeftStructures[si]);
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k)
          if (ri(r, k) != 0.0) {
            t[si].row[r] = k;
            t[si].row_sign[r] = ri(r, k);
          }
      for (int c = 0; c < 4; ++c)
        for (int l = 0; l < 4; ++l)
          if (ls(l, c) != 0.0) {
            t[si].col[c] = l;
            t[si].col_sign[c] = ls(l, c);
          }
    }
    return t;
  }();
  return tables[static_cast<int>(s) - 1];
}

}  // namespace detail

/// The reflection A -> -R_i * A * L_s on matrices R^4 -> V, i.e. pointwise
/// v -> -(A(s v)) * i in quaternion notation.  An involution for each of
/// s = I, J, K, orthogonal for the Frobenius inner product.
inline Mat4 reflect(Structure s, const Mat4& a) {
  const detail::ReflectTable& t = detail::reflect_table(s);
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      r(i, j) = -t.row_sign[i] * t.col_sign[j] * a(t.row[i], t.col[j]);
  return r;
}

/// Pullback of the Hermitian Kaehler form, specialized:
/// (A* omega_V)_pq = (A0p A1q - A0q A1p) + (A2p A3q - A2q A3p).
inline TwoForm pullback_kaehler_v(const Mat4& a) {
  TwoForm r;
  int k = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = p + 1; q < 4; ++q, ++k)
      r.c[k] = a(0, p) * a(1, q) - a(0, q) * a(1, p) + a(2, p) * a(3, q) -
               a(2, q) * a(3, p);
  return r;
}

/// Eigenspace components of the reflection: a = plus + minus with
/// reflect(s, plus) = plus and reflect(s, minus) = -minus.
inline std::pair<Mat4, Mat4> reflect_split(Structure s, const Mat4& a) {
  Mat4 r = reflect(s, a);
  return {0.5 * (a + r), 0.5 * (a - r)};
}

/// Frobenius inner product of 4x4 matrices.
inline double frob(const Mat4& a, const Mat4& b) {
  return (a.array() * b.array()).sum();
}

}  // namespace polysymp
