#pragma once

// Euclidean triangulations of the 4-torus M = V / lattice.
//
// The triangulation is the Kuhn (Freudenthal) subdivision of the m^4 cubical
// grid: each sub-cube splits into 24 path simplices, one per permutation of
// the axes, giving 24 m^4 positively oriented 4-cells.  All combinatorial
// data is computed in integer grid units (one unit = 1/m of a lattice cell),
// so face and edge identification modulo the lattice is exact.
//
// Every 3-face carries one shared tangent frame handed to both incident
// cells, so the Whitney matching condition downstream is literal equality of
// matrix-vector products.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polysymp/quat_algebra.hpp"

namespace polysymp {

using GridPoint = std::array<int, 4>;  // integer lift, units of 1/m

struct Lattice {
  Mat4 generators;  // columns are the four lattice generators in V
  Mat4 inverse;

  static Lattice standard() {
    Lattice l;
    l.generators = Mat4::Identity();
    l.inverse = Mat4::Identity();
    return l;
  }

  static Lattice from_generators(const Mat4& gen) {
    if (!(gen.determinant() > 0.0))
      throw std::invalid_argument("lattice generators must be independent with det > 0");
    Lattice l;
    l.generators = gen;
    l.inverse = gen.inverse();
    return l;
  }

  double det() const { return generators.determinant(); }

  /// Nearest lattice vector to v, and the rounded integer coordinates.
  Vec4 round_to_lattice(const Vec4& v, Eigen::Vector4i* coords = nullptr) const {
    Vec4 c = inverse * v;
    Eigen::Vector4i n;
    for (int k = 0; k < 4; ++k) n[k] = static_cast<int>(std::lround(c[k]));
    if (coords) *coords = n;
    return generators * n.cast<double>();
  }
};

struct Cell {
  std::array<int, 5> v;           // vertex ids
  std::array<GridPoint, 5> lift;  // integer lifts, mutually consistent
  std::array<Vec4, 5> lift_geom;  // the same lifts in V
  Mat4 edge_inv;                  // inverse of [p1-p0 ... p4-p0]
  std::array<Vec4, 5> grad;       // gradients of the barycentric coordinates
  double volume;
};

struct Face {
  std::array<int, 2> cell;
  std::array<int, 2> local_facet;               // omitted local vertex
  std::array<std::array<int, 4>, 2> slot_local; // local vertex per canonical slot
  std::array<Vec4, 2> lattice_shift;            // lift translation per side, in V
  std::array<Vec4, 3> frame;                    // shared tangent basis
};

struct Edge {
  int va, vb;
  GridPoint disp_int;  // integer lift difference vb - va
  Vec4 disp;           // the same in V
  int cell;            // one incident 4-cell
};

namespace detail {

struct ArrayHashKeyLess {
  template <std::size_t N>
  bool operator()(const std::array<int, N>& a, const std::array<int, N>& b) const {
    return a < b;
  }
};

inline int floor_div(int a, int b) {
  int q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace detail

class TorusMesh {
 public:
  Lattice lattice;
  int m = 0;
  std::vector<Vec4> vertices;  // fundamental-domain positions
  std::vector<Cell> cells;
  std::vector<Face> faces;
  std::vector<Edge> edges;

  // spanning tree of the edge graph, rooted at vertex 0
  std::vector<int> tree_parent;       // parent vertex (-1 at the root)
  std::vector<int> tree_edge;         // edge id towards the parent
  std::vector<int> tree_dir;          // +1 if the edge runs parent -> child
  std::vector<int> tree_order;        // vertices in BFS order

  // generator loops: per axis, (edge id, direction) with direction +1 when
  // the edge displacement is traversed as stored
  std::array<std::vector<std::pair<int, int>>, 4> loops;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int cell_count() const { return static_cast<int>(cells.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  double total_volume() const {
    double s = 0.0;
    for (const Cell& c : cells) s += c.volume;
    return s;
  }

  int vertex_id(const GridPoint& g) const {
    int id = 0;
    for (int k = 3; k >= 0; --k) {
      int c = g[k] % m;
      if (c < 0) c += m;
      id = id * m + c;
    }
    return id;
  }

  Vec4 grid_to_v(const GridPoint& g) const {
    Vec4 u;
    for (int k = 0; k < 4; ++k) u[k] = static_cast<double>(g[k]) / m;
    return lattice.generators * u;
  }

  /// Looks up the 1-simplex through the integer points (a, b).
  /// Returns (edge id, +1) when the stored displacement runs a -> b,
  /// (edge id, -1) for the reverse, (-1, 0) if absent.
  std::pair<int, int> find_edge(const GridPoint& a, const GridPoint& b) const {
    auto key = edge_key(a, b);
    auto it = edge_index_.find(key.first);
    if (it == edge_index_.end()) return {-1, 0};
    return {it->second, key.second};
  }

  std::uint64_t hash() const { return hash_; }
  std::string hash_hex() const {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx",
                  static_cast<unsigned long long>(hash_));
    return buf;
  }

  friend TorusMesh build_mesh(const Lattice& lattice, int m);

 private:
  using EdgeKey = std::array<int, 8>;
  using FaceKey = std::array<int, 16>;

  std::map<EdgeKey, int> edge_index_;
  std::uint64_t hash_ = 0;

  std::pair<EdgeKey, int> edge_key(GridPoint a, GridPoint b) const {
    int dir = 1;
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) {
      std::swap(a, b);
      dir = -1;
    }
    for (int k = 0; k < 4; ++k) {
      int t = m * detail::floor_div(a[k], m);
      a[k] -= t;
      b[k] -= t;
    }
    EdgeKey key{a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]};
    return {key, dir};
  }
};

/// A polyhedral self-map of the torus: one image per vertex plus, for each
/// 4-cell, lifted images of its five vertices.  Across every interior face
/// the two cell lifts differ by a single common lattice vector; that
/// invariant is certified where maps are consumed, not assumed.
struct PolyMap {
  const TorusMesh* mesh = nullptr;
  std::vector<Vec4> vertex_images;
  std::vector<std::array<Vec4, 5>> cell_lifts;

  static PolyMap identity(const TorusMesh& mesh) {
    return linear(mesh, Mat4::Identity());
  }

  /// The map induced by a linear endomorphism of V.  Descends to the torus
  /// exactly when the matrix maps the lattice into itself.
  static PolyMap linear(const TorusMesh& mesh, const Mat4& a) {
    PolyMap f;
    f.mesh = &mesh;
    f.vertex_images.reserve(mesh.vertices.size());
    for (const Vec4& p : mesh.vertices) f.vertex_images.push_back(a * p);
    f.cell_lifts.reserve(mesh.cells.size());
    for (const Cell& c : mesh.cells) {
      std::array<Vec4, 5> q;
      for (int j = 0; j < 5; ++j) q[j] = a * c.lift_geom[j];
      f.cell_lifts.push_back(q);
    }
    return f;
  }

  PolyMap translated(const Vec4& v) const {
    PolyMap f = *this;
    for (Vec4& p : f.vertex_images) p += v;
    for (auto& q : f.cell_lifts)
      for (Vec4& p : q) p += v;
    return f;
  }
};

inline TorusMesh build_mesh(const Lattice& lattice, int m) {
  if (m < 2)
    throw std::invalid_argument(
        "build_mesh: subdivision count m must be at least 2");

  TorusMesh mesh;
  mesh.lattice = lattice;
  mesh.m = m;

  const int nv = m * m * m * m;
  mesh.vertices.resize(nv);
  for (int g3 = 0; g3 < m; ++g3)
    for (int g2 = 0; g2 < m; ++g2)
      for (int g1 = 0; g1 < m; ++g1)
        for (int g0 = 0; g0 < m; ++g0) {
          GridPoint g{g0, g1, g2, g3};
          mesh.vertices[mesh.vertex_id(g)] = mesh.grid_to_v(g);
        }

  // Path simplices of every grid cube, positively oriented.
  std::array<int, 4> perm;
  for (int c3 = 0; c3 < m; ++c3)
    for (int c2 = 0; c2 < m; ++c2)
      for (int c1 = 0; c1 < m; ++c1)
        for (int c0 = 0; c0 < m; ++c0) {
          GridPoint base{c0, c1, c2, c3};
          perm = {0, 1, 2, 3};
          do {
            Cell cell;
            cell.lift[0] = base;
            for (int t = 0; t < 4; ++t) {
              cell.lift[t + 1] = cell.lift[t];
              cell.lift[t + 1][perm[t]] += 1;
            }
            Mat4 e;
            auto fill = [&] {
              for (int j = 0; j < 5; ++j) {
                cell.lift_geom[j] = mesh.grid_to_v(cell.lift[j]);
                cell.v[j] = mesh.vertex_id(cell.lift[j]);
              }
              for (int j = 0; j < 4; ++j)
                e.col(j) = cell.lift_geom[j + 1] - cell.lift_geom[0];
            };
            fill();
            if (e.determinant() < 0.0) {
              std::swap(cell.lift[3], cell.lift[4]);
              fill();
            }
            double det = e.determinant();
            cell.volume = det / 24.0;
            cell.edge_inv = e.inverse();
            Vec4 gsum = Vec4::Zero();
            for (int j = 0; j < 4; ++j) {
              cell.grad[j + 1] = cell.edge_inv.row(j).transpose();
              gsum += cell.grad[j + 1];
            }
            cell.grad[0] = -gsum;
            mesh.cells.push_back(cell);
          } while (std::next_permutation(perm.begin(), perm.end()));
        }

  // Identify 3-faces: canonical key is the sorted facet modulo a common
  // lattice translation.
  struct FacetRef {
    int cell, facet;
    std::array<int, 4> slot_local;
    GridPoint shift;
  };
  std::map<TorusMesh::FaceKey, std::vector<FacetRef>> facet_map;
  std::vector<TorusMesh::FaceKey> facet_order;
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const Cell& cell = mesh.cells[ci];
    for (int omit = 0; omit < 5; ++omit) {
      std::array<std::pair<GridPoint, int>, 4> pts;  // (lift, local index)
      int n = 0;
      for (int j = 0; j < 5; ++j)
        if (j != omit) pts[n++] = {cell.lift[j], j};
      std::sort(pts.begin(), pts.end());
      GridPoint shift;
      for (int k = 0; k < 4; ++k)
        shift[k] = m * detail::floor_div(pts[0].first[k], m);
      TorusMesh::FaceKey key;
      FacetRef ref;
      ref.cell = ci;
      ref.facet = omit;
      ref.shift = shift;
      for (int r = 0; r < 4; ++r) {
        ref.slot_local[r] = pts[r].second;
        for (int k = 0; k < 4; ++k)
          key[4 * r + k] = pts[r].first[k] - shift[k];
      }
      auto [it, fresh] = facet_map.try_emplace(key);
      if (fresh) facet_order.push_back(key);
      it->second.push_back(ref);
    }
  }
  for (const auto& key : facet_order) {
    const auto& refs = facet_map.at(key);
    if (refs.size() != 2)
      throw std::runtime_error("build_mesh: 3-face not shared by exactly two cells");
    Face f;
    for (int s = 0; s < 2; ++s) {
      f.cell[s] = refs[s].cell;
      f.local_facet[s] = refs[s].facet;
      f.slot_local[s] = refs[s].slot_local;
      f.lattice_shift[s] = mesh.grid_to_v(refs[s].shift);
    }
    GridPoint r0{key[0], key[1], key[2], key[3]};
    for (int r = 1; r < 4; ++r) {
      GridPoint rr{key[4 * r], key[4 * r + 1], key[4 * r + 2], key[4 * r + 3]};
      GridPoint d;
      for (int k = 0; k < 4; ++k) d[k] = rr[k] - r0[k];
      f.frame[r - 1] = mesh.grid_to_v(d);
    }
    mesh.faces.push_back(f);
  }

  // Edge graph: all 1-simplices, again identified modulo translation.
  for (int ci = 0; ci < mesh.cell_count(); ++ci) {
    const Cell& cell = mesh.cells[ci];
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b) {
        auto key = mesh.edge_key(cell.lift[a], cell.lift[b]);
        auto it = mesh.edge_index_.find(key.first);
        if (it != mesh.edge_index_.end()) continue;
        Edge e;
        int la = key.second > 0 ? a : b;
        int lb = key.second > 0 ? b : a;
        e.va = cell.v[la];
        e.vb = cell.v[lb];
        for (int k = 0; k < 4; ++k)
          e.disp_int[k] = cell.lift[lb][k] - cell.lift[la][k];
        e.disp = mesh.grid_to_v(e.disp_int);
        e.cell = ci;
        mesh.edge_index_.emplace(key.first, static_cast<int>(mesh.edges.size()));
        mesh.edges.push_back(e);
      }
  }

  // Spanning tree by BFS from vertex 0 over the edge list.
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int ei = 0; ei < static_cast<int>(mesh.edges.size()); ++ei) {
    adj[mesh.edges[ei].va].push_back({ei, +1});
    adj[mesh.edges[ei].vb].push_back({ei, -1});
  }
  mesh.tree_parent.assign(nv, -2);
  mesh.tree_edge.assign(nv, -1);
  mesh.tree_dir.assign(nv, 0);
  std::queue<int> bfs;
  bfs.push(0);
  mesh.tree_parent[0] = -1;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    mesh.tree_order.push_back(v);
    for (auto [ei, dir] : adj[v]) {
      const Edge& e = mesh.edges[ei];
      int w = dir > 0 ? e.vb : e.va;
      if (mesh.tree_parent[w] != -2) continue;
      mesh.tree_parent[w] = v;
      mesh.tree_edge[w] = ei;
      mesh.tree_dir[w] = dir;  // +1: edge displacement runs parent -> child
      bfs.push(w);
    }
  }
  if (static_cast<int>(mesh.tree_order.size()) != nv)
    throw std::runtime_error("build_mesh: edge graph is not connected");

  // One generator loop per axis, made of unit axis edges.
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < m; ++j) {
      GridPoint a{0, 0, 0, 0}, b{0, 0, 0, 0};
      a[k] = j;
      b[k] = j + 1;
      auto [ei, dir] = mesh.find_edge(a, b);
      if (ei < 0) throw std::runtime_error("build_mesh: missing axis edge");
      mesh.loops[k].push_back({ei, dir});
    }
  }

  // FNV-1a over the identifying parameters.
  auto fnv = [](std::uint64_t h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
    return h;
  };
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv(h, "torus-mesh-v1", 13);
  std::int64_t m64 = m;
  h = fnv(h, &m64, sizeof m64);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double g = lattice.generators(r, c);
      h = fnv(h, &g, sizeof g);
    }
  mesh.hash_ = h;

  return mesh;
}

}  // namespace polysymp
