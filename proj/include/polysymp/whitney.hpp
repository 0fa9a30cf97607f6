#pragma once

// Locally constant V-valued 1-forms on a triangulated torus, polyhedral
// potentials, the exterior derivative, Whitney matching residuals,
// cohomology periods, the L2 metric, and the orthogonal projection onto the
// subspace of Whitney forms whose cohomology class lies on a fixed ray.
//
// The closed subspace is parametrized explicitly: differentials of vertex
// hat potentials (one vertex gauge-fixed to zero) plus one constant field
// spanning the ray.  The projection solves the volume-weighted normal
// equations against that spanning set with a factorization computed once.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polysymp/quat_algebra.hpp"
#include "polysymp/torus_mesh.hpp"

namespace polysymp {

/// One constant 4x4 matrix per 4-cell: the value of a locally constant
/// V-valued 1-form on that cell's interior.
struct CellField {
  const TorusMesh* mesh = nullptr;
  std::vector<Mat4> value;

  static CellField zero(const TorusMesh& m) {
    CellField f;
    f.mesh = &m;
    f.value.assign(m.cell_count(), Mat4::Zero());
    return f;
  }

  static CellField constant(const TorusMesh& m, const Mat4& a) {
    CellField f;
    f.mesh = &m;
    f.value.assign(m.cell_count(), a);
    return f;
  }

  CellField& operator+=(const CellField& o) {
    for (std::size_t i = 0; i < value.size(); ++i) value[i] += o.value[i];
    return *this;
  }
  CellField& operator-=(const CellField& o) {
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= o.value[i];
    return *this;
  }
  CellField& operator*=(double t) {
    for (auto& a : value) a *= t;
    return *this;
  }
  CellField operator+(const CellField& o) const {
    CellField r = *this;
    r += o;
    return r;
  }
  CellField operator-(const CellField& o) const {
    CellField r = *this;
    r -= o;
    return r;
  }
  CellField operator*(double t) const {
    CellField r = *this;
    r *= t;
    return r;
  }
};

/// A polyhedral function M -> V: one value per vertex, interpolated
/// affinely inside each cell through the cell's lift.
struct Potential {
  const TorusMesh* mesh = nullptr;
  std::vector<Vec4> value;

  static Potential zero(const TorusMesh& m) {
    Potential u;
    u.mesh = &m;
    u.value.assign(m.vertex_count(), Vec4::Zero());
    return u;
  }
};

struct MeshMismatchError : std::runtime_error {
  MeshMismatchError() : std::runtime_error("operands live on different meshes") {}
};

struct WhitneyError : std::runtime_error {
  double residual;
  int face;
  WhitneyError(double r, int f)
      : std::runtime_error("form is not Whitney: residual " +
                           std::to_string(r) + " on face " + std::to_string(f)),
        residual(r),
        face(f) {}
};

struct FaceConsistencyError : std::runtime_error {
  int face;
  explicit FaceConsistencyError(int f)
      : std::runtime_error("map lifts disagree across face " + std::to_string(f)),
        face(f) {}
};

namespace detail {
inline void require_same_mesh(const TorusMesh* a, const TorusMesh* b) {
  if (a == nullptr || b == nullptr || a->hash() != b->hash())
    throw MeshMismatchError{};
}
}  // namespace detail

/// Exterior derivative of a potential: per cell, the unique constant matrix
/// agreeing with the affine interpolant of the vertex values on the lift.
inline CellField differentiate(const Potential& u) {
  CellField f = CellField::zero(*u.mesh);
  const auto& cells = u.mesh->cells;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    Mat4 a = Mat4::Zero();
    for (int j = 0; j < 5; ++j)
      a += u.value[c.v[j]] * c.grad[j].transpose();
    f.value[ci] = a;
  }
  return f;
}

/// Differential of a polyhedral map, from the lifted vertex images.
/// Rejects maps whose cell lifts do not glue across some face by one common
/// lattice vector.
inline CellField diff_of_map(const PolyMap& f, double tol = 1e-9) {
  if (f.mesh == nullptr) throw MeshMismatchError{};
  const TorusMesh& mesh = *f.mesh;
  for (int fi = 0; fi < mesh.face_count(); ++fi) {
    const Face& face = mesh.faces[fi];
    Vec4 delta0;
    for (int r = 0; r < 4; ++r) {
      Vec4 d = f.cell_lifts[face.cell[0]][face.slot_local[0][r]] -
               f.cell_lifts[face.cell[1]][face.slot_local[1][r]];
      if (r == 0) {
        delta0 = d;
        Vec4 rounded = mesh.lattice.round_to_lattice(d);
        if ((d - rounded).lpNorm<Eigen::Infinity>() > tol)
          throw FaceConsistencyError(fi);
      } else if ((d - delta0).lpNorm<Eigen::Infinity>() > tol) {
        throw FaceConsistencyError(fi);
      }
    }
  }
  CellField df = CellField::zero(mesh);
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const Cell& c = mesh.cells[ci];
    Mat4 u;
    for (int j = 0; j < 4; ++j)
      u.col(j) = f.cell_lifts[ci][j + 1] - f.cell_lifts[ci][0];
    df.value[ci] = u * c.edge_inv;
  }
  return df;
}

struct WhitneyReport {
  std::vector<double> per_face;
  double max = 0.0;
  int argmax = -1;
};

/// Per-face Whitney matching residual: the largest discrepancy of the two
/// incident cell values on the face's shared tangent frame.
inline WhitneyReport whitney_residual(const CellField& f) {
  const TorusMesh& mesh = *f.mesh;
  WhitneyReport rep;
  rep.per_face.resize(mesh.face_count());
  for (int fi = 0; fi < mesh.face_count(); ++fi) {
    const Face& face = mesh.faces[fi];
    const Mat4 d = f.value[face.cell[0]] - f.value[face.cell[1]];
    double r = 0.0;
    for (const Vec4& t : face.frame) r = std::max(r, (d * t).norm());
    rep.per_face[fi] = r;
    if (r > rep.max) {
      rep.max = r;
      rep.argmax = fi;
    }
  }
  return rep;
}

/// Cohomology class of a Whitney form: column k is the period along the
/// k-th generator loop.  Non-Whitney input is rejected (the periods would
/// be path dependent).
inline Mat4 cohomology_class(const CellField& f, double tol = 1e-9) {
  const TorusMesh& mesh = *f.mesh;
  WhitneyReport rep = whitney_residual(f);
  if (rep.max > tol) throw WhitneyError(rep.max, rep.argmax);
  Mat4 p;
  for (int k = 0; k < 4; ++k) {
    Vec4 s = Vec4::Zero();
    for (auto [ei, dir] : mesh.loops[k]) {
      const Edge& e = mesh.edges[ei];
      s += dir * (f.value[e.cell] * e.disp);
    }
    p.col(k) = s;
  }
  return p;
}

/// L2 inner product: sum over cells of the Frobenius pairing, weighted by
/// cell volume.
inline double inner_g(const CellField& f1, const CellField& f2) {
  detail::require_same_mesh(f1.mesh, f2.mesh);
  const auto& cells = f1.mesh->cells;
  double s = 0.0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    s += cells[ci].volume * frob(f1.value[ci], f2.value[ci]);
  return s;
}

inline double norm_g(const CellField& f) { return std::sqrt(inner_g(f, f)); }

/// Per-cell circle action: the value on cell s rotates by angle theta_s in
/// the complex structure of V (right multiplication by i).
inline CellField torus_act(const std::vector<double>& phases, const CellField& f) {
  if (phases.size() != f.value.size())
    throw std::invalid_argument("torus_act: one phase per cell expected");
  CellField r = f;
  const Mat4& ri = right_mul_i_matrix();
  for (std::size_t ci = 0; ci < f.value.size(); ++ci)
    r.value[ci] = std::cos(phases[ci]) * f.value[ci] +
                  std::sin(phases[ci]) * (ri * f.value[ci]);
  return r;
}

/// Spanning set of the closed forms with class on the ray of alpha:
/// differentials of the vertex hat potentials (vertex 0 gauge-fixed) times
/// four components, plus the constant field alpha.  The volume-weighted
/// Gram matrix is factorized once; projections are least-squares solves
/// against it.
class ClosedBasis {
 public:
  ClosedBasis(const TorusMesh& mesh, const Mat4& alpha)
      : mesh_(&mesh), alpha_(alpha) {
    has_alpha_ = alpha.lpNorm<Eigen::Infinity>() > 0.0;
    const int nv = mesh.vertex_count();
    dim_ = 4 * (nv - 1) + (has_alpha_ ? 1 : 0);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim_, dim_);
    for (const Cell& c : mesh.cells) {
      for (int i = 0; i < 5; ++i) {
        if (c.v[i] == 0) continue;
        for (int j = 0; j < 5; ++j) {
          if (c.v[j] == 0) continue;
          const double s = c.volume * c.grad[i].dot(c.grad[j]);
          for (int comp = 0; comp < 4; ++comp)
            gram(hat_index(c.v[i], comp), hat_index(c.v[j], comp)) += s;
        }
        if (has_alpha_) {
          for (int comp = 0; comp < 4; ++comp) {
            const double s = c.volume * alpha_.row(comp).dot(c.grad[i]);
            gram(hat_index(c.v[i], comp), dim_ - 1) += s;
            gram(dim_ - 1, hat_index(c.v[i], comp)) += s;
          }
        }
      }
      if (has_alpha_)
        gram(dim_ - 1, dim_ - 1) += c.volume * frob(alpha_, alpha_);
    }
    gram_ = gram;
    ldlt_.compute(gram);
    if (ldlt_.info() != Eigen::Success ||
        ldlt_.vectorD().minCoeff() <= 0.0)
      throw std::runtime_error("ClosedBasis: Gram matrix is not positive definite");
  }

  const TorusMesh& mesh() const { return *mesh_; }
  const Mat4& alpha() const { return alpha_; }
  bool degenerate() const { return !has_alpha_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  int hat_index(int vertex, int comp) const { return 4 * (vertex - 1) + comp; }
  int alpha_index() const { return has_alpha_ ? dim_ - 1 : -1; }

  /// The field with the given coordinates in the spanning set.
  CellField materialize(const Eigen::VectorXd& x) const {
    CellField f = CellField::zero(*mesh_);
    materialize_into(x, f);
    return f;
  }

  void materialize_into(const Eigen::VectorXd& x, CellField& f) const {
    check_coords(x);
    f.mesh = mesh_;
    f.value.resize(mesh_->cell_count());
    const double xa = has_alpha_ ? x[dim_ - 1] : 0.0;
    for (int ci = 0; ci < mesh_->cell_count(); ++ci) {
      const Cell& c = mesh_->cells[ci];
      Mat4& a = f.value[ci];
      if (has_alpha_)
        a = xa * alpha_;
      else
        a.setZero();
      for (int j = 0; j < 5; ++j) {
        if (c.v[j] == 0) continue;
        const int base = hat_index(c.v[j], 0);
        for (int comp = 0; comp < 4; ++comp)
          a.row(comp) += x[base + comp] * c.grad[j].transpose();
      }
    }
  }

  /// Inner products of a field against every spanning element.
  Eigen::VectorXd adjoint(const CellField& f) const {
    Eigen::VectorXd y(dim_);
    adjoint_into(f, y);
    return y;
  }

  void adjoint_into(const CellField& f, Eigen::VectorXd& y) const {
    detail::require_same_mesh(mesh_, f.mesh);
    y.setZero(dim_);
    for (int ci = 0; ci < mesh_->cell_count(); ++ci) {
      const Cell& c = mesh_->cells[ci];
      const Mat4& a = f.value[ci];
      for (int j = 0; j < 5; ++j) {
        if (c.v[j] == 0) continue;
        const Vec4 rows = a * c.grad[j];  // component r: a.row(r) . grad_j
        const int base = hat_index(c.v[j], 0);
        for (int comp = 0; comp < 4; ++comp)
          y[base + comp] += c.volume * rows[comp];
      }
      if (has_alpha_) y[dim_ - 1] += c.volume * frob(alpha_, a);
    }
  }

  /// Coordinates of the orthogonal projection of f onto the subspace.
  Eigen::VectorXd coords(const CellField& f) const {
    return ldlt_.solve(adjoint(f));
  }

  /// Solves the Gram system for a given right-hand side.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& y) const {
    return ldlt_.solve(y);
  }

  /// Orthogonal projection onto the subspace, materialized.
  CellField project(const CellField& f) const { return materialize(coords(f)); }

  CellField basis_element(int i) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
    e[i] = 1.0;
    return materialize(e);
  }

  /// G-inner product of two coordinate vectors.
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return x.dot(gram_ * y);
  }

 private:
  void check_coords(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("coordinate vector has wrong dimension");
  }

  const TorusMesh* mesh_;
  Mat4 alpha_;
  bool has_alpha_;
  int dim_;
  Eigen::MatrixXd gram_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

inline ClosedBasis build_closed_basis(const TorusMesh& mesh, const Mat4& alpha) {
  return ClosedBasis(mesh, alpha);
}

// --- Independent dimension checks -----------------------------------------
//
// The Whitney matching conditions form a sparse linear system on the raw
// per-cell coefficients.  For the standard lattice its entries (and those of
// the period map) are integers after scaling by m, so the nullity can be
// certified exactly by Gaussian elimination over a prime field: the mod-p
// nullity is always an upper bound for the real nullity, and the explicit
// spanning set provides the matching lower bound.

/// Whitney matching conditions as a sparse matrix acting on the stacked
/// row-major cell coefficients (16 per cell).  Entries are scaled by m so
/// they are integers on the standard lattice.
inline Eigen::SparseMatrix<double> whitney_constraint_matrix(const TorusMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (const Face& face : mesh.faces) {
    for (int t = 0; t < 3; ++t) {
      Vec4 frame = mesh.lattice.inverse * face.frame[t] * mesh.m;
      for (int comp = 0; comp < 4; ++comp) {
        for (int d = 0; d < 4; ++d) {
          if (frame[d] == 0.0) continue;
          trip.emplace_back(row, 16 * face.cell[0] + 4 * comp + d, frame[d]);
          trip.emplace_back(row, 16 * face.cell[1] + 4 * comp + d, -frame[d]);
        }
        ++row;
      }
    }
  }
  Eigen::SparseMatrix<double> a(row, 16 * mesh.cell_count());
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// The sixteen period functionals (entries of the cohomology class) as rows
/// of a sparse matrix, scaled by m as above.
inline Eigen::SparseMatrix<double> period_matrix(const TorusMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < 4; ++k) {
    for (auto [ei, dir] : mesh.loops[k]) {
      const Edge& e = mesh.edges[ei];
      Vec4 disp = mesh.lattice.inverse * e.disp * mesh.m;
      for (int r = 0; r < 4; ++r)
        for (int d = 0; d < 4; ++d) {
          if (disp[d] == 0.0) continue;
          trip.emplace_back(4 * r + k, 16 * e.cell + 4 * r + d, dir * disp[d]);
        }
    }
  }
  Eigen::SparseMatrix<double> p(16, 16 * mesh.cell_count());
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

/// Exact nullity of a sparse integer matrix over GF(p).  The result is an
/// upper bound on the real nullity of the same matrix; combined with an
/// explicit independent set in the kernel it pins the dimension.
inline int nullity_mod_p(const Eigen::SparseMatrix<double>& a,
                         std::uint64_t p = 2147483629ULL) {
  const int cols = static_cast<int>(a.cols());
  using Row = std::vector<std::pair<int, std::uint64_t>>;  // sorted by column

  auto mod = [p](long long v) {
    long long r = v % static_cast<long long>(p);
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<long long>(p) : r);
  };
  auto pow_mod = [p](std::uint64_t b, std::uint64_t e) {
    unsigned __int128 r = 1, x = b % p;
    while (e) {
      if (e & 1) r = r * x % p;
      x = x * x % p;
      e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
  };
  auto inv_mod = [&](std::uint64_t v) { return pow_mod(v, p - 2); };

  std::vector<Row> pivot_rows(cols);  // indexed by pivot column, empty = none
  std::vector<bool> has_pivot(cols, false);
  int rank = 0;

  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(a);
  Row work, reduced;
  for (int ri = 0; ri < ar.rows(); ++ri) {
    work.clear();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, ri);
         it; ++it) {
      long long v = static_cast<long long>(std::llround(it.value()));
      if (static_cast<double>(v) != it.value())
        throw std::invalid_argument("nullity_mod_p: matrix is not integral");
      std::uint64_t mv = mod(v);
      if (mv != 0) work.emplace_back(static_cast<int>(it.col()), mv);
    }
    while (!work.empty()) {
      const int lead = work.front().first;
      if (!has_pivot[lead]) {
        // normalize so the leading entry is 1 and store as a new pivot row
        std::uint64_t inv = inv_mod(work.front().second);
        for (auto& e : work) e.second = e.second * inv % p;
        pivot_rows[lead] = work;
        has_pivot[lead] = true;
        ++rank;
        break;
      }
      // subtract lead_coeff * pivot_row (both sorted by column)
      const Row& piv = pivot_rows[lead];
      const std::uint64_t coef = work.front().second;
      reduced.clear();
      std::size_t i = 0, j = 0;
      while (i < work.size() || j < piv.size()) {
        if (j == piv.size() || (i < work.size() && work[i].first < piv[j].first)) {
          reduced.push_back(work[i++]);
        } else if (i == work.size() || piv[j].first < work[i].first) {
          std::uint64_t v = mod(-static_cast<long long>(
              static_cast<unsigned __int128>(coef) * piv[j].second % p));
          if (v != 0) reduced.emplace_back(piv[j].first, v);
          ++j;
        } else {
          std::uint64_t v =
              mod(static_cast<long long>(work[i].second) -
                  static_cast<long long>(
                      static_cast<unsigned __int128>(coef) * piv[j].second % p));
          if (v != 0) reduced.emplace_back(work[i].first, v);
          ++i;
          ++j;
        }
      }
      work.swap(reduced);
    }
  }
  return cols - rank;
}

/// Constraint rows pinning the cohomology class to the ray of alpha:
/// pairings of the period matrix against an integer basis of the orthogonal
/// complement of alpha in matrix space.  Requires an integer alpha.
inline Eigen::SparseMatrix<double> class_ray_constraints(const TorusMesh& mesh,
                                                         const Mat4& alpha) {
  Eigen::Matrix<double, 16, 1> av;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) av[4 * r + c] = alpha(r, c);
  for (int k = 0; k < 16; ++k)
    if (std::llround(av[k]) != av[k])
      throw std::invalid_argument("class_ray_constraints: alpha must be integral");

  // Integer spanning set of alpha-perp: for every coordinate pair (k, l),
  // the vector av[l] e_k - av[k] e_l kills alpha.  Their span is exactly
  // alpha-perp (rank 15 for alpha != 0); independence is certified by the
  // rank computation downstream, so redundant rows are harmless.
  Eigen::SparseMatrix<double> periods = period_matrix(mesh);
  std::vector<Eigen::Triplet<double>> ct;
  int row = 0;
  for (int k = 0; k < 16; ++k)
    for (int l = k + 1; l < 16; ++l) {
      if (av[k] == 0.0 && av[l] == 0.0) continue;
      if (av[l] != 0.0) ct.emplace_back(row, k, av[l]);
      if (av[k] != 0.0) ct.emplace_back(row, l, -av[k]);
      ++row;
    }
  Eigen::SparseMatrix<double> comb(row, 16);
  comb.setFromTriplets(ct.begin(), ct.end());
  return comb * periods;
}

}  // namespace polysymp
