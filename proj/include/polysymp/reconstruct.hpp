#pragma once

// Recovering a polyhedral map from a Whitney form with integral class, and
// certifying the symplectic property cell by cell.
//
// The primitive is built on the edge graph: vertex images accumulate edge
// increments along the spanning tree, every non-tree edge must close up
// modulo the lattice, and per-cell lifts are rebuilt from the cell's own
// affine data so the round trip through the differential is exact up to
// roundoff.

#include <Eigen/Dense>

#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "polysymp/quat_algebra.hpp"
#include "polysymp/torus_mesh.hpp"
#include "polysymp/whitney.hpp"

namespace polysymp {

struct IntegralClassReport {
  bool integral = false;
  double max_deviation = 0.0;
  Eigen::Matrix4i rounded;  // lattice coordinates of the periods
};

/// Tests whether the period matrix, expressed in lattice coordinates, is
/// entrywise within tol of integers.
inline IntegralClassReport is_integral_class(const Mat4& periods,
                                             const Lattice& lattice,
                                             double tol = 1e-3) {
  IntegralClassReport rep;
  const Mat4 n = lattice.inverse * periods;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      rep.rounded(r, c) = static_cast<int>(std::lround(n(r, c)));
      rep.max_deviation =
          std::max(rep.max_deviation, std::abs(n(r, c) - rep.rounded(r, c)));
    }
  rep.integral = rep.max_deviation <= tol;
  return rep;
}

struct ClosureError : std::runtime_error {
  int edge;
  double defect;
  ClosureError(int e, double d)
      : std::runtime_error("primitive: edge " + std::to_string(e) +
                           " fails to close modulo the lattice (defect " +
                           std::to_string(d) + ")"),
        edge(e),
        defect(d) {}
};

struct PrimitiveResult {
  PolyMap map;
  double max_closure_defect = 0.0;
  int worst_edge = -1;
};

/// Integrates a Whitney form with integral class into a polyhedral map.
/// Vertex images are path sums over the spanning tree from the base vertex;
/// all remaining edges are checked to close modulo the lattice and the
/// worst defect is reported.
inline PrimitiveResult primitive(const CellField& f, int base_vertex = 0,
                                 double whitney_tol = 1e-9,
                                 double class_tol = 1e-3,
                                 double closure_tol = 1e-6) {
  const TorusMesh& mesh = *f.mesh;
  if (base_vertex < 0 || base_vertex >= mesh.vertex_count())
    throw std::invalid_argument("primitive: base vertex out of range");

  const Mat4 periods = cohomology_class(f, whitney_tol);
  const IntegralClassReport icls =
      is_integral_class(periods, mesh.lattice, class_tol);
  if (!icls.integral)
    throw std::invalid_argument(
        "primitive: cohomology class is not integral (deviation " +
        std::to_string(icls.max_deviation) + ")");

  const int nv = mesh.vertex_count();
  std::vector<Vec4> image(nv);
  std::vector<bool> known(nv, false);
  image[base_vertex] = mesh.vertices[base_vertex];
  known[base_vertex] = true;

  // Walk the spanning tree outward from the base vertex.
  std::vector<std::vector<int>> children(nv);
  for (int v = 0; v < nv; ++v)
    if (mesh.tree_parent[v] >= 0) children[mesh.tree_parent[v]].push_back(v);
  auto edge_increment = [&](int ei) {
    const Edge& e = mesh.edges[ei];
    return Vec4(f.value[e.cell] * e.disp);
  };
  std::queue<int> todo;
  todo.push(base_vertex);
  // paths from base may go against the tree orientation: walk both ways
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    for (int w : children[v])
      if (!known[w]) {
        image[w] = image[v] + mesh.tree_dir[w] * edge_increment(mesh.tree_edge[w]);
        known[w] = true;
        todo.push(w);
      }
    int p = mesh.tree_parent[v];
    if (p >= 0 && !known[p]) {
      image[p] = image[v] - mesh.tree_dir[v] * edge_increment(mesh.tree_edge[v]);
      known[p] = true;
      todo.push(p);
    }
  }

  // Every edge must close up modulo the lattice.
  PrimitiveResult result;
  for (int ei = 0; ei < static_cast<int>(mesh.edges.size()); ++ei) {
    const Edge& e = mesh.edges[ei];
    const Vec4 delta = image[e.va] + edge_increment(ei) - image[e.vb];
    const Vec4 defect = delta - mesh.lattice.round_to_lattice(delta);
    const double d = defect.lpNorm<Eigen::Infinity>();
    if (d > result.max_closure_defect) {
      result.max_closure_defect = d;
      result.worst_edge = ei;
    }
  }
  if (result.max_closure_defect > closure_tol)
    throw ClosureError(result.worst_edge, result.max_closure_defect);

  result.map.mesh = &mesh;
  result.map.vertex_images = std::move(image);
  result.map.cell_lifts.resize(mesh.cell_count());
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const Cell& c = mesh.cells[ci];
    std::array<Vec4, 5>& q = result.map.cell_lifts[ci];
    q[0] = result.map.vertex_images[c.v[0]];
    for (int j = 1; j < 5; ++j)
      q[j] = q[0] + f.value[ci] * (c.lift_geom[j] - c.lift_geom[0]);
  }
  return result;
}

struct SymplecticReport {
  double max_defect = 0.0;          // ||F* omega_V - omega_V|| per cell, max
  double max_asd_defect = 0.0;      // anti-selfdual part of F* omega_V, max
  int worst_cell = -1;
  std::vector<double> per_cell;
  bool verdict = false;
  // The limit map can in principle ramify along the 3-skeleton; nothing
  // here decides injectivity.
  std::string homeomorphism = "unknown";
};

/// Cell-by-cell certificate that the form is the differential of a
/// symplectic map: the pulled-back symplectic form must equal omega_V on
/// every cell.  The anti-selfdual defect (the moment-map certificate) is
/// reported separately.
inline SymplecticReport verify_symplectic(const CellField& f, double tol = 1e-6) {
  const TorusMesh& mesh = *f.mesh;
  SymplecticReport rep;
  rep.per_cell.resize(mesh.cell_count());
  const TwoForm wv = kaehler_form(Structure::V);
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const TwoForm p = pullback(f.value[ci], wv);
    const double defect = (p - wv).norm();
    const double asd = sd_asd_split(p).second.norm();
    rep.per_cell[ci] = defect;
    if (defect > rep.max_defect) {
      rep.max_defect = defect;
      rep.worst_cell = ci;
    }
    rep.max_asd_defect = std::max(rep.max_asd_defect, asd);
  }
  rep.verdict = rep.max_defect <= tol;
  return rep;
}

}  // namespace polysymp
