#pragma once

// Independent oracles used by the tests: plain Hamilton quaternion
// arithmetic with explicit chart conversion, brute-force wedge evaluation
// via the permutation expansion, dense least-squares projection, and
// finite-difference derivative checks.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "polysymp/quat_algebra.hpp"
#include "polysymp/rng.hpp"
#include "polysymp/whitney.hpp"

namespace oracle {

using polysymp::Mat4;
using polysymp::TwoForm;
using polysymp::Vec4;

// Quaternion (a, b, c, d) = a + b i + c j + d k, Hamilton product.
using Quat = std::array<double, 4>;

inline Quat qmul(const Quat& p, const Quat& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
          p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
          p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

// Chart: coordinates (x1, y1, x2, y2) <-> quaternion x1 + y1 i + x2 j - y2 k.
inline Quat coord_to_quat(const Vec4& v) { return {v[0], v[1], v[2], -v[3]}; }
inline Vec4 quat_to_coord(const Quat& q) { return Vec4(q[0], q[1], q[2], -q[3]); }

inline Quat unit(int axis) {  // 1, i, j, k
  Quat q{0, 0, 0, 0};
  q[axis] = 1.0;
  return q;
}

// Wedge of two 2-forms against the volume form, by the full permutation
// expansion: (b1 ^ b2)(e0,e1,e2,e3) = (1/4) sum_p sign(p) b1(ep0,ep1) b2(ep2,ep3).
inline double wedge_ratio_bruteforce(const TwoForm& b1, const TwoForm& b2) {
  std::array<int, 4> p{0, 1, 2, 3};
  double total = 0.0;
  // enumerate permutations with parity
  std::array<Vec4, 4> e;
  for (int k = 0; k < 4; ++k) e[k] = Vec4::Unit(k);
  do {
    // parity by inversion count
    int inv = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (p[a] > p[b]) ++inv;
    const double sign = (inv % 2 == 0) ? 1.0 : -1.0;
    total += sign * b1(e[p[0]], e[p[1]]) * b2(e[p[2]], e[p[3]]);
  } while (std::next_permutation(p.begin(), p.end()));
  return total / 4.0;
}

inline Mat4 random_mat4(polysymp::SplitMix64& rng) {
  Mat4 a;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rng.symmetric();
  return a;
}

inline Vec4 random_vec4(polysymp::SplitMix64& rng) {
  return Vec4(rng.symmetric(), rng.symmetric(), rng.symmetric(),
              rng.symmetric());
}

inline TwoForm random_two_form(polysymp::SplitMix64& rng) {
  TwoForm b;
  for (double& v : b.c) v = rng.symmetric();
  return b;
}

inline polysymp::CellField random_cell_field(const polysymp::TorusMesh& mesh,
                                             polysymp::SplitMix64& rng) {
  polysymp::CellField f = polysymp::CellField::zero(mesh);
  for (auto& a : f.value) a = random_mat4(rng);
  return f;
}

inline polysymp::Potential random_potential(const polysymp::TorusMesh& mesh,
                                            polysymp::SplitMix64& rng) {
  polysymp::Potential u = polysymp::Potential::zero(mesh);
  for (auto& v : u.value) v = random_vec4(rng);
  return u;
}

/// Dense weighted least-squares projection onto the span of the closed
/// basis, independent of the production Gram/LDLT path.
inline polysymp::CellField dense_project(const polysymp::ClosedBasis& basis,
                                         const polysymp::CellField& f) {
  const polysymp::TorusMesh& mesh = basis.mesh();
  const int rows = 16 * mesh.cell_count();
  Eigen::MatrixXd d(rows, basis.dim());
  Eigen::VectorXd target(rows);
  std::vector<double> w(mesh.cell_count());
  for (int ci = 0; ci < mesh.cell_count(); ++ci)
    w[ci] = std::sqrt(mesh.cells[ci].volume);
  for (int j = 0; j < basis.dim(); ++j) {
    polysymp::CellField b = basis.basis_element(j);
    for (int ci = 0; ci < mesh.cell_count(); ++ci)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          d(16 * ci + 4 * r + c, j) = w[ci] * b.value[ci](r, c);
  }
  for (int ci = 0; ci < mesh.cell_count(); ++ci)
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        target[16 * ci + 4 * r + c] = w[ci] * f.value[ci](r, c);
  Eigen::VectorXd x = d.colPivHouseholderQr().solve(target);
  return basis.materialize(x);
}

}  // namespace oracle
