#pragma once

// File formats.  All JSON documents round-trip doubles exactly (shortest
// round-trip representation on write, exact parse on read); the CSV trace
// is written with %.17g so reruns are byte-identical.

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polysymp/flow.hpp"
#include "polysymp/quat_algebra.hpp"
#include "polysymp/reconstruct.hpp"
#include "polysymp/torus_mesh.hpp"
#include "polysymp/whitney.hpp"

namespace polysymp {

using Json = nlohmann::json;

inline Json to_json(const Vec4& v) { return Json{v[0], v[1], v[2], v[3]}; }

inline Vec4 vec4_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::invalid_argument("expected a 4-vector");
  return Vec4(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>());
}

inline Json to_json_rowmajor(const Mat4& a) {
  Json j = Json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) j.push_back(a(r, c));
  return j;
}

inline Mat4 mat4_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 16)
    throw std::invalid_argument("expected 16 row-major matrix entries");
  Mat4 a;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = j[4 * r + c].get<double>();
  return a;
}

// --- mesh -------------------------------------------------------------------

inline Json mesh_document(const TorusMesh& mesh) {
  Json doc;
  doc["format"] = "torus-mesh-v1";
  doc["hash"] = mesh.hash_hex();
  doc["m"] = mesh.m;
  Json gen = Json::array();
  for (int c = 0; c < 4; ++c) gen.push_back(to_json(mesh.lattice.generators.col(c)));
  doc["lattice"] = gen;
  Json verts = Json::array();
  for (const Vec4& v : mesh.vertices) verts.push_back(to_json(v));
  doc["vertices"] = verts;
  Json cells = Json::array();
  for (const Cell& c : mesh.cells) {
    Json jc;
    jc["v"] = c.v;
    Json lifts = Json::array();
    for (const Vec4& p : c.lift_geom) lifts.push_back(to_json(p));
    jc["lift"] = lifts;
    cells.push_back(jc);
  }
  doc["cells"] = cells;
  Json faces = Json::array();
  for (const Face& f : mesh.faces) {
    Json jf;
    jf["cells"] = f.cell;
    Json frame = Json::array();
    for (const Vec4& t : f.frame) frame.push_back(to_json(t));
    jf["frame"] = frame;
    faces.push_back(jf);
  }
  doc["faces"] = faces;
  return doc;
}

// --- fields and potentials --------------------------------------------------

inline Json field_document(const CellField& f) {
  Json doc;
  doc["format"] = "cellfield-v1";
  doc["mesh"] = f.mesh->hash_hex();
  Json cells = Json::array();
  for (const Mat4& a : f.value) cells.push_back(to_json_rowmajor(a));
  doc["cells"] = cells;
  return doc;
}

inline CellField field_from_document(const Json& doc, const TorusMesh& mesh) {
  if (doc.value("format", "") != "cellfield-v1")
    throw std::invalid_argument("not a cellfield document");
  if (doc.value("mesh", "") != mesh.hash_hex())
    throw std::invalid_argument("cellfield was written for a different mesh");
  const Json& cells = doc.at("cells");
  if (static_cast<int>(cells.size()) != mesh.cell_count())
    throw std::invalid_argument("cellfield has the wrong number of cells");
  CellField f = CellField::zero(mesh);
  for (int ci = 0; ci < mesh.cell_count(); ++ci)
    f.value[ci] = mat4_from_json(cells[ci]);
  return f;
}

inline Json potential_document(const Potential& u) {
  Json doc;
  doc["format"] = "potential-v1";
  doc["mesh"] = u.mesh->hash_hex();
  Json verts = Json::array();
  for (const Vec4& v : u.value) verts.push_back(to_json(v));
  doc["vertices"] = verts;
  return doc;
}

inline Potential potential_from_document(const Json& doc, const TorusMesh& mesh) {
  if (doc.value("format", "") != "potential-v1")
    throw std::invalid_argument("not a potential document");
  if (doc.value("mesh", "") != mesh.hash_hex())
    throw std::invalid_argument("potential was written for a different mesh");
  const Json& verts = doc.at("vertices");
  if (static_cast<int>(verts.size()) != mesh.vertex_count())
    throw std::invalid_argument("potential has the wrong number of vertices");
  Potential u = Potential::zero(mesh);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    u.value[v] = vec4_from_json(verts[v]);
  return u;
}

// --- polyhedral maps ----------------------------------------------------------

inline Json polymap_document(const PolyMap& map, double max_closure_defect,
                             const std::string& homeomorphism = "unknown") {
  Json doc;
  doc["format"] = "polymap-v1";
  doc["mesh"] = map.mesh->hash_hex();
  Json imgs = Json::array();
  for (const Vec4& v : map.vertex_images) imgs.push_back(to_json(v));
  doc["vertex_images"] = imgs;
  Json lifts = Json::array();
  for (const auto& q : map.cell_lifts) {
    Json jc = Json::array();
    for (const Vec4& p : q) jc.push_back(to_json(p));
    lifts.push_back(jc);
  }
  doc["cell_lifts"] = lifts;
  doc["max_closure_defect"] = max_closure_defect;
  doc["homeomorphism"] = homeomorphism;
  return doc;
}

inline PolyMap polymap_from_document(const Json& doc, const TorusMesh& mesh) {
  if (doc.value("format", "") != "polymap-v1")
    throw std::invalid_argument("not a polymap document");
  if (doc.value("mesh", "") != mesh.hash_hex())
    throw std::invalid_argument("polymap was written for a different mesh");
  PolyMap map;
  map.mesh = &mesh;
  for (const Json& v : doc.at("vertex_images"))
    map.vertex_images.push_back(vec4_from_json(v));
  for (const Json& jc : doc.at("cell_lifts")) {
    std::array<Vec4, 5> q;
    for (int j = 0; j < 5; ++j) q[j] = vec4_from_json(jc[j]);
    map.cell_lifts.push_back(q);
  }
  if (static_cast<int>(map.vertex_images.size()) != mesh.vertex_count() ||
      static_cast<int>(map.cell_lifts.size()) != mesh.cell_count())
    throw std::invalid_argument("polymap does not match the mesh");
  return map;
}

/// Long-format point table of the lifted images, for external plotting of
/// 2D coordinate projections.
inline std::string polymap_points_csv(const PolyMap& map) {
  std::string out = "cell,vertex,x1,y1,x2,y2\n";
  char buf[200];
  for (std::size_t ci = 0; ci < map.cell_lifts.size(); ++ci)
    for (int j = 0; j < 5; ++j) {
      const Vec4& p = map.cell_lifts[ci][j];
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g\n", ci, j,
                    p[0], p[1], p[2], p[3]);
      out += buf;
    }
  return out;
}

// --- traces and summaries -----------------------------------------------------

inline std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out = "t,h,norm2,phi,muI2,muJ2,muK2,tau\n";
  char buf[256];
  for (const TraceRecord& r : trace) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.h,
                  r.norm2, r.phi, r.mu2_i, r.mu2_j, r.mu2_k, r.tau);
    out += buf;
  }
  return out;
}

inline Json summary_document(const FlowResult& result) {
  Json doc;
  doc["status"] = to_string(result.status);
  doc["steps"] = result.steps;
  doc["final_mu_norm"] = result.final_mu_norm;
  doc["tau"] = result.tau;
  doc["classification"] = result.classification;
  if (!result.message.empty()) doc["message"] = result.message;
  return doc;
}

// --- small file helpers -------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline Json read_json_file(const std::string& path) {
  return Json::parse(read_text_file(path));
}

inline void write_json_file(const std::string& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace polysymp
