#pragma once

// The three moment map densities of the circle action on locally constant
// forms, the squared-norm functional, its gradient field, and the Hessian
// on the constrained subspace.
//
// Per cell, mu_s(F) is the pairing of the pulled-back symplectic form
// F*omega_V against the anti-selfdual Kaehler form of the structure s; it
// vanishes for all three structures exactly when F*omega_V is selfdual.
// The functional is phi(F) = (1/2) sum_s ||mu_s(F)||^2, a homogeneous
// quartic, and its L2 gradient is
//
//     grad phi(F) = sum_s mu_s(F) . reflect(s, F)        (cubic in F),
//
// which satisfies <grad phi(F), F> = 4 phi(F) = 2 sum_s ||mu_s(F)||^2.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "polysymp/quat_algebra.hpp"
#include "polysymp/torus_mesh.hpp"
#include "polysymp/whitney.hpp"

namespace polysymp {

/// One locally constant real function per structure I, J, K.
struct MomentValue {
  const TorusMesh* mesh = nullptr;
  std::array<std::vector<double>, 3> comp;  // indexed by I, J, K

  /// Volume-weighted squared norms, per structure.
  std::array<double, 3> norm2() const {
    std::array<double, 3> n{0.0, 0.0, 0.0};
    for (int s = 0; s < 3; ++s)
      for (std::size_t ci = 0; ci < comp[s].size(); ++ci)
        n[s] += mesh->cells[ci].volume * comp[s][ci] * comp[s][ci];
    return n;
  }

  double total_norm2() const {
    auto n = norm2();
    return n[0] + n[1] + n[2];
  }

  double total_norm() const { return std::sqrt(total_norm2()); }
};

inline double mu_cell(Structure s, const Mat4& a) {
  return -wedge_ratio(pullback_kaehler_v(a), kaehler_form(s));
}

/// All three moment map densities of a field.
inline MomentValue mu(const CellField& f) {
  MomentValue m;
  m.mesh = f.mesh;
  const int n = f.mesh->cell_count();
  for (int s = 0; s < 3; ++s) m.comp[s].resize(n);
  const std::array<TwoForm, 3> wh{kaehler_form(Structure::I),
                                  kaehler_form(Structure::J),
                                  kaehler_form(Structure::K)};
  for (int ci = 0; ci < n; ++ci) {
    const TwoForm p = pullback_kaehler_v(f.value[ci]);
    for (int s = 0; s < 3; ++s) m.comp[s][ci] = -wedge_ratio(p, wh[s]);
  }
  return m;
}

/// sum_s ||mu_s(F)||^2.
inline double mu_norm2(const CellField& f) { return mu(f).total_norm2(); }

/// phi(F) = (1/2) sum_s ||mu_s(F)||^2; homogeneous of degree four.
inline double phi(const CellField& f) { return 0.5 * mu_norm2(f); }

/// The gradient field of one structure: mu_s(F) . reflect(s, F).
inline CellField gradient_component(Structure s, const CellField& f) {
  CellField w = CellField::zero(*f.mesh);
  const int si = static_cast<int>(s) - 1;
  MomentValue m = mu(f);
  for (int ci = 0; ci < f.mesh->cell_count(); ++ci)
    w.value[ci] = m.comp[si][ci] * reflect(s, f.value[ci]);
  return w;
}

/// L2 gradient of phi; cubic and homogeneous in F.
inline void grad_phi_into(const CellField& f, CellField& w) {
  w.mesh = f.mesh;
  w.value.resize(f.value.size());
  const std::array<TwoForm, 3> wh{kaehler_form(Structure::I),
                                  kaehler_form(Structure::J),
                                  kaehler_form(Structure::K)};
  for (std::size_t ci = 0; ci < f.value.size(); ++ci) {
    const Mat4& a = f.value[ci];
    const TwoForm p = pullback_kaehler_v(a);
    Mat4 g = Mat4::Zero();
    for (int s = 0; s < 3; ++s)
      g += -wedge_ratio(p, wh[s]) * reflect(kLeftStructures[s], a);
    w.value[ci] = g;
  }
}

inline CellField grad_phi(const CellField& f) {
  CellField w;
  grad_phi_into(f, w);
  return w;
}

struct HessianReport {
  Eigen::MatrixXd h;           // bilinear form in basis coordinates
  bool at_zero = false;        // true: the zero-locus formula was used
  Eigen::VectorXd eigenvalues; // ascending
  double min_eigenvalue = 0.0;
  int kernel_dim = 0;          // eigenvalues below kernel_tol in magnitude
};

/// Second derivative of phi restricted to the constrained subspace, as a
/// symmetric matrix in the coordinates of the spanning set.  At a zero of
/// the moment map this is the rank-one sum
///     H(b_a, b_b) = sum_cells vol . sum_s g(reflect(s,F), b_a) g(reflect(s,F), b_b),
/// which is positive semidefinite; away from zeros the exact second
/// derivative carries the extra mu-weighted term and the report is flagged.
inline HessianReport hessian_form(const ClosedBasis& basis, const CellField& f,
                                  double zero_tol = 1e-8,
                                  double kernel_tol = 1e-10) {
  detail::require_same_mesh(&basis.mesh(), f.mesh);
  const TorusMesh& mesh = basis.mesh();
  const int dim = basis.dim();
  const bool has_alpha = !basis.degenerate();

  HessianReport rep;
  rep.h = Eigen::MatrixXd::Zero(dim, dim);
  MomentValue m = mu(f);
  rep.at_zero = m.total_norm() <= zero_tol;

  const Mat4& ri = right_mul_i_matrix();
  std::vector<int> active;      // global basis indices touching this cell
  std::vector<double> g_val;    // g(reflect(s,F), basis element) per active
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const Cell& c = mesh.cells[ci];
    active.clear();
    for (int j = 0; j < 5; ++j) {
      if (c.v[j] == 0) continue;
      for (int comp = 0; comp < 4; ++comp)
        active.push_back(basis.hat_index(c.v[j], comp));
    }
    if (has_alpha) active.push_back(basis.alpha_index());

    for (int s = 0; s < 3; ++s) {
      const Structure st = kLeftStructures[s];
      const Mat4 r = reflect(st, f.value[ci]);
      g_val.clear();
      int k = 0;
      for (int j = 0; j < 5; ++j) {
        if (c.v[j] == 0) continue;
        const Vec4 rows = r * c.grad[j];
        for (int comp = 0; comp < 4; ++comp) g_val.push_back(rows[comp]);
        k += 4;
      }
      if (has_alpha) g_val.push_back(frob(r, basis.alpha()));

      for (std::size_t a = 0; a < active.size(); ++a)
        for (std::size_t b = a; b < active.size(); ++b) {
          const double v = c.volume * g_val[a] * g_val[b];
          rep.h(active[a], active[b]) += v;
          if (a != b) rep.h(active[b], active[a]) += v;
        }

      if (!rep.at_zero) {
        // extra term of the exact second derivative:
        //   sum vol . mu_s . g(reflect(s, b_a), b_b)
        const double ms = m.comp[s][ci];
        if (ms == 0.0) continue;
        const Mat4& ls = left_mul_matrix(st);
        // hat elements are rank one: e_comp (grad_j)^T, and
        // reflect(s, e_c g^T) = (-R_i e_c)(L_s^T g)^T.
        std::vector<Vec4> lg;  // L_s^T grad_j per local vertex
        for (int j = 0; j < 5; ++j) lg.push_back(ls.transpose() * c.grad[j]);
        const Mat4 ra = has_alpha ? Mat4(reflect(st, basis.alpha()))
                                  : Mat4(Mat4::Zero());
        // pair (hat_a, hat_b)
        int ia = 0;
        for (int ja = 0; ja < 5; ++ja) {
          if (c.v[ja] == 0) continue;
          for (int ca = 0; ca < 4; ++ca, ++ia) {
            const Vec4 rcol = -ri.col(ca);  // -R_i e_ca
            int ib = 0;
            for (int jb = 0; jb < 5; ++jb) {
              if (c.v[jb] == 0) continue;
              for (int cb = 0; cb < 4; ++cb, ++ib) {
                const double v = c.volume * ms * rcol[cb] *
                                 lg[ja].dot(c.grad[jb]);
                rep.h(active[ia], active[ib]) += v;
              }
            }
            if (has_alpha) {
              // g(reflect(s, hat_a), alpha) and the symmetric pairing
              const double v = c.volume * ms *
                               (rcol.transpose() * basis.alpha() * lg[ja])(0);
              rep.h(active[ia], active.back()) += v;
              rep.h(active.back(), active[ia]) += v;
            }
          }
        }
        if (has_alpha) {
          const double v = c.volume * ms * frob(ra, basis.alpha());
          rep.h(active.back(), active.back()) += v;
        }
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.h);
  rep.eigenvalues = es.eigenvalues();
  rep.min_eigenvalue = rep.eigenvalues.minCoeff();
  rep.kernel_dim = 0;
  for (int i = 0; i < dim; ++i)
    if (std::abs(rep.eigenvalues[i]) < kernel_tol) ++rep.kernel_dim;
  return rep;
}

}  // namespace polysymp
