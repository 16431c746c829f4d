// Polyhedral mesh construction, validation, generators and persistence.

#include <weberlab/mesh.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace weberlab {

using json = nlohmann::json;

std::string to_string(DomainKind kind) {
  switch (kind) {
  case DomainKind::solid_cube: return "solid_cube";
  case DomainKind::hollow_cube: return "hollow_cube";
  case DomainKind::through_hole_cube: return "through_hole_cube";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "solid_cube") return DomainKind::solid_cube;
  if (name == "hollow_cube") return DomainKind::hollow_cube;
  if (name == "through_hole_cube") return DomainKind::through_hole_cube;
  throw MeshError("unknown domain kind '" + name +
                  "' (expected solid_cube, hollow_cube or through_hole_cube)");
}

std::size_t PolyMesh::local_face_index(std::size_t t, std::size_t f) const {
  const auto& fl = cells.at(t).faces;
  auto it = std::find(fl.begin(), fl.end(), f);
  if (it == fl.end())
    throw MeshError("face " + std::to_string(f) + " is not a face of cell " + std::to_string(t));
  return static_cast<std::size_t>(it - fl.begin());
}

Point3 PolyMesh::outward_normal(std::size_t t, std::size_t f) const {
  return double(cells[t].orientations[local_face_index(t, f)]) * faces[f].normal;
}

//------------------------------------------------------------------------------
// Geometry helpers
//------------------------------------------------------------------------------

namespace {

double max_pairwise_distance(const std::vector<Point3>& pts) {
  double d = 0.;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

double point_segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  Point3 ab = b - a;
  double len2 = ab.squaredNorm();
  double s = len2 > 0. ? std::clamp((p - a).dot(ab) / len2, 0., 1.) : 0.;
  return (p - (a + s * ab)).norm();
}

// Distance from p to a planar polygon (loop with unit normal n).
double point_polygon_distance(const Point3& p, const std::vector<Point3>& loop, const Point3& n) {
  const double plane = (p - loop[0]).dot(n);
  const Point3 q = p - plane * n;
  // crossing-number test in the plane (polygon may be non-convex)
  Point3 u = (std::abs(n.x()) < 0.9 ? Point3::UnitX() : Point3::UnitY());
  u = (u - u.dot(n) * n).normalized();
  Point3 w = n.cross(u);
  bool inside = false;
  const double qx = q.dot(u), qy = q.dot(w);
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    double xi = loop[i].dot(u), yi = loop[i].dot(w);
    double xj = loop[j].dot(u), yj = loop[j].dot(w);
    if (((yi > qy) != (yj > qy)) && (qx < (xj - xi) * (qy - yi) / (yj - yi) + xi)) inside = !inside;
  }
  if (inside) return std::abs(plane);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i)
    d = std::min(d, point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]));
  return d;
}

void check_finite(const Point3& p, const std::string& what) {
  if (!p.allFinite()) throw MeshError(what + " has non-finite coordinates");
}

using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Faces of `set` are closed iff every edge is used exactly twice within the set.
bool is_closed_surface(const PolyMesh& mesh, const std::vector<std::size_t>& set) {
  std::map<Edge, int> count;
  for (std::size_t f : set) {
    const auto& v = mesh.faces[f].vertices;
    for (std::size_t i = 0; i < v.size(); ++i) ++count[make_edge(v[i], v[(i + 1) % v.size()])];
  }
  return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

// Edge-connected components of a face subset, each sorted, ordered by smallest face id.
std::vector<std::vector<std::size_t>> edge_components(const PolyMesh& mesh,
                                                      const std::vector<std::size_t>& set) {
  std::map<Edge, std::vector<std::size_t>> by_edge;
  for (std::size_t f : set) {
    const auto& v = mesh.faces[f].vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
      by_edge[make_edge(v[i], v[(i + 1) % v.size()])].push_back(f);
  }
  std::map<std::size_t, std::size_t> parent;
  for (std::size_t f : set) parent[f] = f;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [e, fs] : by_edge)
    for (std::size_t i = 1; i < fs.size(); ++i) {
      std::size_t a = find(fs[0]), b = find(fs[i]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t f : set) groups[find(f)].push_back(f);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> boundary_components(const PolyMesh& mesh) {
  std::vector<std::size_t> bnd;
  for (const auto& f : mesh.faces)
    if (f.is_boundary()) bnd.push_back(f.id);
  return edge_components(mesh, bnd);
}

//------------------------------------------------------------------------------
// Construction and validation
//------------------------------------------------------------------------------

PolyMesh build_mesh(const MeshInput& in) {
  PolyMesh mesh;
  mesh.vertices = in.vertices;
  const std::size_t nv = in.vertices.size(), nc = in.cells.size(), nf = in.faces.size();
  if (nc == 0) throw MeshError("mesh has no cells");
  if (!in.eta.empty() && in.eta.size() != nc)
    throw MeshError("eta has " + std::to_string(in.eta.size()) + " entries for " + std::to_string(nc) + " cells");
  for (std::size_t i = 0; i < nv; ++i) check_finite(in.vertices[i], "vertex " + std::to_string(i));

  // incidence consistency
  std::vector<std::set<std::size_t>> cells_of_face(nf);
  for (std::size_t t = 0; t < nc; ++t) {
    if (in.cells[t].faces.size() < 4)
      throw MeshError("cell " + std::to_string(t) + " has fewer than 4 faces");
    std::set<std::size_t> seen;
    for (std::size_t f : in.cells[t].faces) {
      if (f >= nf)
        throw MeshError("cell " + std::to_string(t) + " references missing face " + std::to_string(f));
      if (!seen.insert(f).second)
        throw MeshError("cell " + std::to_string(t) + " lists face " + std::to_string(f) + " twice");
      cells_of_face[f].insert(t);
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fc = in.faces[f].cells;
    if (fc.empty() || fc.size() > 2)
      throw MeshError("face " + std::to_string(f) + " must have 1 or 2 incident cells");
    if (fc.size() == 2 && fc[0] == fc[1])
      throw MeshError("face " + std::to_string(f) + " lists cell " + std::to_string(fc[0]) + " twice");
    for (std::size_t t : fc)
      if (t >= nc)
        throw MeshError("face " + std::to_string(f) + " references missing cell " + std::to_string(t));
    if (std::set<std::size_t>(fc.begin(), fc.end()) != cells_of_face[f])
      throw MeshError("face " + std::to_string(f) + " cell list disagrees with the cells' face lists");
    if (in.faces[f].vertices.size() < 3)
      throw MeshError("face " + std::to_string(f) + " has fewer than 3 vertices");
    for (std::size_t v : in.faces[f].vertices)
      if (v >= nv)
        throw MeshError("face " + std::to_string(f) + " references missing vertex " + std::to_string(v));
  }

  // Sigma orientation lookup
  std::vector<int> sigma_of(nf, 0);
  std::vector<Point3> sigma_normal;
  for (std::size_t i = 0; i < in.sigma_sets.size(); ++i) {
    Point3 n = in.sigma_sets[i].normal;
    check_finite(n, "cutting surface normal");
    if (n.norm() == 0.) throw MeshError("cutting surface " + std::to_string(i + 1) + " has zero normal");
    sigma_normal.push_back(n.normalized());
    for (std::size_t f : in.sigma_sets[i].faces) {
      if (f >= nf) throw MeshError("cutting surface references missing face " + std::to_string(f));
      if (sigma_of[f] != 0) throw MeshError("face " + std::to_string(f) + " lies on two cutting surfaces");
      sigma_of[f] = int(i) + 1;
    }
  }

  // faces: loop geometry
  mesh.faces.resize(nf);
  std::vector<Point3> loop_normal(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto& F = mesh.faces[f];
    F.id = f;
    F.vertices = in.faces[f].vertices;
    std::vector<Point3> pts;
    for (std::size_t v : F.vertices) pts.push_back(in.vertices[v]);
    F.center = Point3::Zero();
    for (const auto& p : pts) F.center += p;
    F.center /= double(pts.size());
    Point3 nw = Point3::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) nw += pts[i].cross(pts[(i + 1) % pts.size()]);
    nw *= 0.5;
    F.diameter = max_pairwise_distance(pts);
    F.area = nw.norm();
    if (!(F.diameter > 0.) || !(F.area > 1e-14 * F.diameter * F.diameter))
      throw MeshError("face " + std::to_string(f) + " is degenerate");
    loop_normal[f] = nw / F.area;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs((pts[i] - F.center).dot(loop_normal[f])) > 1e-12 * F.diameter)
        throw MeshError("face " + std::to_string(f) + " is not planar within tolerance");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point3& a = pts[i];
      const Point3& b = pts[(i + 1) % pts.size()];
      if ((a - F.center).cross(b - F.center).dot(loop_normal[f]) <= 1e-14 * F.diameter * F.diameter)
        throw MeshError("face " + std::to_string(f) + ": fan triangle " + std::to_string(i) +
                        " from the face center is degenerate or inverted");
    }
    F.inradius = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
      F.inradius = std::min(F.inradius, point_segment_distance(F.center, pts[i], pts[(i + 1) % pts.size()]));
  }

  // cells: star point, outward loop signs
  mesh.cells.resize(nc);
  std::vector<std::vector<int>> loop_sign(nc);  // n_{T,F} = loop_sign * loop_normal
  for (std::size_t t = 0; t < nc; ++t) {
    auto& T = mesh.cells[t];
    T.id = t;
    T.faces = in.cells[t].faces;
    std::set<std::size_t> vs;
    for (std::size_t f : T.faces) vs.insert(in.faces[f].vertices.begin(), in.faces[f].vertices.end());
    T.vertices.assign(vs.begin(), vs.end());
    std::vector<Point3> pts;
    for (std::size_t v : T.vertices) pts.push_back(in.vertices[v]);
    if (in.cells[t].star_point) {
      T.center = *in.cells[t].star_point;
      check_finite(T.center, "star point of cell " + std::to_string(t));
    } else {
      T.center = Point3::Zero();
      for (const auto& p : pts) T.center += p;
      T.center /= double(pts.size());
    }
    T.diameter = max_pairwise_distance(pts);
    T.eta = in.eta.empty() ? 1. : in.eta.at(t);
    if (!(T.eta > 0.) || !std::isfinite(T.eta))
      throw MeshError("cell " + std::to_string(t) + " has non-positive eta");
    T.volume = 0.;
    T.inradius = std::numeric_limits<double>::infinity();
    T.star_shaped = true;
    Point3 closure = Point3::Zero();
    for (std::size_t f : T.faces) {
      const auto& F = mesh.faces[f];
      double side = (F.center - T.center).dot(loop_normal[f]);
      int s = side >= 0. ? 1 : -1;
      loop_sign[t].push_back(s);
      Point3 n = double(s) * loop_normal[f];
      T.volume += F.area * (F.center - T.center).dot(n) / 3.;
      closure += F.area * n;
      std::vector<Point3> fp;
      for (std::size_t v : F.vertices) fp.push_back(in.vertices[v]);
      for (std::size_t i = 0; i < fp.size(); ++i) {
        const Point3& a = fp[i];
        const Point3& b = fp[(i + 1) % fp.size()];
        double vol = double(s) * (F.center - T.center).dot((a - F.center).cross(b - F.center)) / 6.;
        if (!(vol > 1e-14 * std::pow(T.diameter, 3))) T.star_shaped = false;
      }
      T.inradius = std::min(T.inradius, point_polygon_distance(T.center, fp, loop_normal[f]));
    }
    if (!(T.volume > 0.)) throw MeshError("cell " + std::to_string(t) + " has non-positive volume");
    if ((closure.array().abs() > 1e-12 * T.diameter * T.diameter).any())
      throw MeshError("cell " + std::to_string(t) + " is not closed (face area vectors do not sum to zero)");
  }

  // face orientation and frames
  for (std::size_t f = 0; f < nf; ++f) {
    auto& F = mesh.faces[f];
    std::vector<std::size_t> fc = in.faces[f].cells;
    std::sort(fc.begin(), fc.end());
    auto outward_of = [&](std::size_t t) {
      return double(loop_sign[t][mesh.local_face_index(t, f)]) * loop_normal[f];
    };
    if (fc.size() == 1) {
      if (sigma_of[f]) throw MeshError("cutting-surface face " + std::to_string(f) + " is a boundary face");
      F.cell_plus = fc[0];
      F.normal = outward_of(fc[0]);
    } else if (sigma_of[f]) {
      const Point3& ns = sigma_normal[sigma_of[f] - 1];
      double c = ns.dot(loop_normal[f]);
      if (std::abs(std::abs(c) - 1.) > 1e-12)
        throw MeshError("cutting-surface face " + std::to_string(f) + " is not orthogonal to the surface normal");
      std::size_t plus = outward_of(fc[0]).dot(ns) > 0. ? fc[0] : fc[1];
      F.cell_plus = plus;
      F.cell_minus = plus == fc[0] ? fc[1] : fc[0];
      F.normal = outward_of(plus);
      F.cutting_surface = sigma_of[f];
    } else {
      F.cell_plus = fc[0];
      F.cell_minus = fc[1];
      F.normal = outward_of(fc[0]);
    }
    const Point3& n = F.normal;
    int k = 0;
    for (int a = 1; a < 3; ++a)
      if (std::abs(n[a]) < std::abs(n[k])) k = a;
    Point3 e = Point3::Unit(k);
    F.tangent1 = (e - e.dot(n) * n).normalized();
    F.tangent2 = n.cross(F.tangent1);
  }

  // orientation signs
  for (std::size_t t = 0; t < nc; ++t) {
    auto& T = mesh.cells[t];
    for (std::size_t i = 0; i < T.faces.size(); ++i) {
      Point3 nt = double(loop_sign[t][i]) * loop_normal[T.faces[i]];
      T.orientations.push_back(nt.dot(mesh.faces[T.faces[i]].normal) > 0. ? 1 : -1);
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& F = mesh.faces[f];
    int sp = mesh.cells[F.cell_plus].orientations[mesh.local_face_index(F.cell_plus, f)];
    if (sp != 1) throw MeshError("face " + std::to_string(f) + ": inconsistent orientation");
    if (F.cell_minus) {
      int sm = mesh.cells[*F.cell_minus].orientations[mesh.local_face_index(*F.cell_minus, f)];
      if (sm != -1)
        throw MeshError("interface " + std::to_string(f) + ": incident cells do not see opposite normals");
    }
  }

  // global quantities
  mesh.h = 0.;
  mesh.eta_min = std::numeric_limits<double>::infinity();
  mesh.eta_max = 0.;
  for (const auto& T : mesh.cells) {
    mesh.h = std::max(mesh.h, T.diameter);
    mesh.eta_min = std::min(mesh.eta_min, T.eta);
    mesh.eta_max = std::max(mesh.eta_max, T.eta);
  }

  // topology
  if (in.beta1 < 0 || in.beta2 < 0) throw MeshError("Betti numbers must be non-negative");
  auto& topo = mesh.topology;
  topo.beta1 = in.beta1;
  topo.beta2 = in.beta2;
  if (!in.sigma_sets.empty() && int(in.sigma_sets.size()) != in.beta1)
    throw MeshError("number of cutting surfaces differs from beta1");
  if (in.sigma_sets.empty() && in.beta1 > 0) mesh.sigma_missing = true;
  for (std::size_t i = 0; i < in.sigma_sets.size(); ++i) {
    CuttingSurface cs{in.sigma_sets[i].faces, sigma_normal[i]};
    std::sort(cs.faces.begin(), cs.faces.end());
    if (cs.faces.empty()) throw MeshError("cutting surface " + std::to_string(i + 1) + " is empty");
    double offset = cs.normal.dot(mesh.faces[cs.faces[0]].center);
    for (std::size_t f : cs.faces) {
      const auto& F = mesh.faces[f];
      for (std::size_t v : F.vertices)
        if (std::abs(cs.normal.dot(mesh.vertices[v]) - offset) > 1e-12 * F.diameter)
          throw MeshError("cutting surface " + std::to_string(i + 1) + " is not planar");
    }
    if (edge_components(mesh, cs.faces).size() != 1)
      throw MeshError("cutting surface " + std::to_string(i + 1) + " is not connected");
    topo.sigma_sets.push_back(std::move(cs));
  }

  std::vector<std::size_t> boundary;
  for (const auto& F : mesh.faces)
    if (F.is_boundary()) boundary.push_back(F.id);
  if (in.gamma_sets) {
    topo.gamma_sets = *in.gamma_sets;
    if (int(topo.gamma_sets.size()) != in.beta2 + 1)
      throw MeshError("gamma_sets must contain beta2 + 1 face sets");
  } else if (in.beta2 == 0) {
    topo.gamma_sets = {boundary};
  } else {
    // outer component first: it holds the face with smallest center x
    auto comps = edge_components(mesh, boundary);
    auto outer = std::min_element(comps.begin(), comps.end(), [&](const auto& a, const auto& b) {
      auto mx = [&](const auto& c) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t f : c) m = std::min(m, mesh.faces[f].center.x());
        return m;
      };
      return mx(a) < mx(b);
    });
    std::rotate(comps.begin(), outer, outer + 1);
    topo.gamma_sets = comps;
    if (int(comps.size()) != in.beta2 + 1)
      throw MeshError("boundary has " + std::to_string(comps.size()) +
                      " connected components, inconsistent with beta2");
  }
  std::vector<int> seen(nf, 0);
  for (std::size_t j = 0; j < topo.gamma_sets.size(); ++j) {
    auto& g = topo.gamma_sets[j];
    std::sort(g.begin(), g.end());
    for (std::size_t f : g) {
      if (f >= nf || !mesh.faces[f].is_boundary())
        throw MeshError("boundary set " + std::to_string(j) + " contains a non-boundary face");
      if (seen[f]++) throw MeshError("boundary sets overlap at face " + std::to_string(f));
      mesh.faces[f].boundary_component = int(j);
    }
    if (!is_closed_surface(mesh, g))
      throw MeshError("boundary set " + std::to_string(j) + " is not a closed surface");
  }
  for (std::size_t f : boundary)
    if (!seen[f]) throw MeshError("boundary face " + std::to_string(f) + " belongs to no boundary set");

  return mesh;
}

MeshInput to_input(const PolyMesh& mesh) {
  MeshInput in;
  in.vertices = mesh.vertices;
  for (const auto& T : mesh.cells) in.cells.push_back({T.faces, T.center});
  for (const auto& F : mesh.faces) {
    MeshInput::Face f{F.vertices, {F.cell_plus}};
    if (F.cell_minus) f.cells.push_back(*F.cell_minus);
    in.faces.push_back(std::move(f));
  }
  in.beta1 = mesh.topology.beta1;
  in.beta2 = mesh.topology.beta2;
  in.gamma_sets = mesh.topology.gamma_sets;
  in.sigma_sets = mesh.topology.sigma_sets;
  for (const auto& T : mesh.cells) in.eta.push_back(T.eta);
  return in;
}

//------------------------------------------------------------------------------
// Structured generators
//------------------------------------------------------------------------------

PolyMesh gen_structured(DomainKind kind, int n) {
  if (n < 1) throw MeshError("divisions per axis must be positive");
  if (kind != DomainKind::solid_cube && n % 3 != 0)
    throw MeshError(to_string(kind) + " needs divisions divisible by 3 so that the hole of side 1/3 "
                    "is resolved by the grid (got " + std::to_string(n) + ")");
  const int lo = n / 3, hi = 2 * n / 3;
  auto removed = [&](int i, int j, int k) {
    switch (kind) {
    case DomainKind::solid_cube: return false;
    case DomainKind::hollow_cube: return i >= lo && i < hi && j >= lo && j < hi && k >= lo && k < hi;
    case DomainKind::through_hole_cube: return i >= lo && i < hi && j >= lo && j < hi;
    }
    return false;
  };
  auto exists = [&](int i, int j, int k) {
    return i >= 0 && j >= 0 && k >= 0 && i < n && j < n && k < n && !removed(i, j, k);
  };

  MeshInput in;
  std::map<std::array<int, 3>, std::size_t> vid;
  auto vertex = [&](int i, int j, int k) {
    auto [it, fresh] = vid.try_emplace({i, j, k}, in.vertices.size());
    if (fresh) in.vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);
    return it->second;
  };
  std::map<std::array<int, 3>, std::size_t> cid;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (exists(i, j, k)) {
          cid[{i, j, k}] = in.cells.size();
          in.cells.push_back({});
        }

  const int sigma_j = n / 2;
  std::vector<std::size_t> sigma_faces;
  // face with lower corner c normal to axis a sits between cells c - e_a and c
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
          std::array<int, 3> c{i, j, k}, m{i, j, k};
          m[a] -= 1;
          bool hc = exists(c[0], c[1], c[2]), hm = exists(m[0], m[1], m[2]);
          if (!hc && !hm) continue;
          const int b = (a + 1) % 3, d = (a + 2) % 3;
          std::array<int, 3> p1 = c, p2 = c, p3 = c;
          p1[b] += 1;
          p2[b] += 1;
          p2[d] += 1;
          p3[d] += 1;
          MeshInput::Face F;
          F.vertices = {vertex(c[0], c[1], c[2]), vertex(p1[0], p1[1], p1[2]), vertex(p2[0], p2[1], p2[2]),
                        vertex(p3[0], p3[1], p3[2])};
          std::size_t f = in.faces.size();
          if (hm) {
            F.cells.push_back(cid[m]);
            in.cells[cid[m]].faces.push_back(f);
          }
          if (hc) {
            F.cells.push_back(cid[c]);
            in.cells[cid[c]].faces.push_back(f);
          }
          if (kind == DomainKind::through_hole_cube && a == 1 && j == sigma_j && i < lo) sigma_faces.push_back(f);
          in.faces.push_back(std::move(F));
        }
  for (auto& C : in.cells) std::sort(C.faces.begin(), C.faces.end());

  if (kind == DomainKind::hollow_cube) in.beta2 = 1;
  if (kind == DomainKind::through_hole_cube) {
    in.beta1 = 1;
    in.sigma_sets.push_back({sigma_faces, Point3::UnitY()});
  }
  return build_mesh(in);
}

//------------------------------------------------------------------------------
// Eta assignment
//------------------------------------------------------------------------------

std::string EtaSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (second) os << "checker:" << first << "," << *second;
  if (second && block > 0.) os << "@" << block;
  else os << first;
  return os.str();
}

EtaSpec EtaSpec::parse(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || !(v > 0.) || !std::isfinite(v))
      throw MeshError("invalid eta specification '" + text + "' (expected a positive number or checker:A,B[@block])");
    return v;
  };
  const std::string prefix = "checker:";
  if (text.rfind(prefix, 0) == 0) {
    std::string rest = text.substr(prefix.size());
    double block = 0.;
    if (auto at = rest.find('@'); at != std::string::npos) {
      block = number(rest.substr(at + 1));
      rest = rest.substr(0, at);
    }
    auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw MeshError("invalid eta specification '" + text + "' (expected checker:A,B)");
    return checkerboard(number(rest.substr(0, comma)), number(rest.substr(comma + 1)), block);
  }
  return uniform(number(text));
}

PolyMesh with_eta(const PolyMesh& mesh, const EtaSpec& eta) {
  PolyMesh out = mesh;
  for (auto& T : out.cells) {
    if (!eta.second) {
      T.eta = eta.first;
      continue;
    }
    const double s = eta.block > 0. ? eta.block : std::cbrt(T.volume);
    long parity = std::lround(std::floor(T.center.x() / s)) + std::lround(std::floor(T.center.y() / s)) +
                  std::lround(std::floor(T.center.z() / s));
    T.eta = (parity % 2 == 0) ? eta.first : *eta.second;
  }
  out.eta_min = std::numeric_limits<double>::infinity();
  out.eta_max = 0.;
  for (const auto& T : out.cells) {
    out.eta_min = std::min(out.eta_min, T.eta);
    out.eta_max = std::max(out.eta_max, T.eta);
  }
  return out;
}

PolyMesh scaled_eta(const PolyMesh& mesh, double factor) {
  PolyMesh out = mesh;
  for (auto& T : out.cells) T.eta *= factor;
  out.eta_min *= factor;
  out.eta_max *= factor;
  return out;
}

//------------------------------------------------------------------------------
// JSON persistence
//------------------------------------------------------------------------------

namespace {

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw MeshError(what + " must be an array of 3 numbers");
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw MeshError(what + " must be an array of 3 numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

std::vector<std::size_t> index_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw MeshError(what + " must be an array of indices");
  std::vector<std::size_t> out;
  for (const auto& x : j) {
    if (!x.is_number_integer() || x.get<long long>() < 0)
      throw MeshError(what + " must contain non-negative integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw MeshError(where + ": missing field '" + key + "'");
  return j.at(key);
}

json mesh_json(const PolyMesh& mesh) {
  json j;
  j["vertices"] = json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back(point_json(v));
  j["cells"] = json::array();
  for (const auto& T : mesh.cells) j["cells"].push_back({{"faces", T.faces}, {"star_point", point_json(T.center)}});
  j["faces"] = json::array();
  for (const auto& F : mesh.faces) {
    std::vector<std::size_t> cs{F.cell_plus};
    if (F.cell_minus) cs.push_back(*F.cell_minus);
    j["faces"].push_back({{"vertices", F.vertices}, {"cells", cs}});
  }
  json topo;
  topo["beta1"] = mesh.topology.beta1;
  topo["beta2"] = mesh.topology.beta2;
  topo["gamma_sets"] = mesh.topology.gamma_sets;
  topo["sigma_sets"] = json::array();
  for (const auto& s : mesh.topology.sigma_sets)
    topo["sigma_sets"].push_back({{"faces", s.faces}, {"normal", point_json(s.normal)}});
  j["topology"] = topo;
  j["eta"] = json::array();
  for (const auto& T : mesh.cells) j["eta"].push_back(T.eta);
  return j;
}

}  // namespace

std::string mesh_to_json_string(const PolyMesh& mesh) { return mesh_json(mesh).dump(); }

PolyMesh mesh_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MeshError(std::string("mesh file is not valid JSON: ") + e.what());
  }
  MeshInput in;
  const auto& verts = require(j, "vertices", "mesh");
  if (!verts.is_array()) throw MeshError("mesh: 'vertices' must be an array");
  for (std::size_t i = 0; i < verts.size(); ++i) in.vertices.push_back(point_from(verts[i], "vertex " + std::to_string(i)));
  const auto& cells = require(j, "cells", "mesh");
  if (!cells.is_array()) throw MeshError("mesh: 'cells' must be an array");
  for (std::size_t t = 0; t < cells.size(); ++t) {
    std::string where = "cell " + std::to_string(t);
    MeshInput::Cell c;
    c.faces = index_list(require(cells[t], "faces", where), where + " faces");
    if (cells[t].contains("star_point")) c.star_point = point_from(cells[t]["star_point"], where + " star_point");
    in.cells.push_back(std::move(c));
  }
  const auto& faces = require(j, "faces", "mesh");
  if (!faces.is_array()) throw MeshError("mesh: 'faces' must be an array");
  for (std::size_t f = 0; f < faces.size(); ++f) {
    std::string where = "face " + std::to_string(f);
    in.faces.push_back({index_list(require(faces[f], "vertices", where), where + " vertices"),
                        index_list(require(faces[f], "cells", where), where + " cells")});
  }
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    if (!t.is_object()) throw MeshError("mesh: 'topology' must be an object");
    auto betti = [&](const char* key) {
      if (!t.contains(key)) return 0;
      if (!t[key].is_number_integer()) throw MeshError(std::string("topology: '") + key + "' must be an integer");
      return t[key].get<int>();
    };
    in.beta1 = betti("beta1");
    in.beta2 = betti("beta2");
    if (t.contains("gamma_sets")) {
      if (!t["gamma_sets"].is_array()) throw MeshError("topology: 'gamma_sets' must be an array");
      std::vector<std::vector<std::size_t>> g;
      for (const auto& s : t["gamma_sets"]) g.push_back(index_list(s, "gamma set"));
      in.gamma_sets = g;
    }
    if (t.contains("sigma_sets")) {
      if (!t["sigma_sets"].is_array()) throw MeshError("topology: 'sigma_sets' must be an array");
      for (const auto& s : t["sigma_sets"])
        in.sigma_sets.push_back({index_list(require(s, "faces", "sigma set"), "sigma set faces"),
                                 point_from(require(s, "normal", "sigma set"), "sigma set normal")});
    }
  }
  if (j.contains("eta")) {
    if (!j["eta"].is_array()) throw MeshError("mesh: 'eta' must be an array");
    for (const auto& e : j["eta"]) {
      if (!e.is_number()) throw MeshError("mesh: 'eta' entries must be numbers");
      in.eta.push_back(e.get<double>());
    }
  }
  return build_mesh(in);
}

PolyMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot open mesh file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return mesh_from_json_string(ss.str());
}

void save_mesh(const PolyMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw MeshError("cannot write mesh file '" + path + "'");
  os << mesh_json(mesh).dump(1) << "\n";
}

std::string mesh_content_hash(const PolyMesh& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : mesh_to_json_string(mesh)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

//------------------------------------------------------------------------------
// Regularity
//------------------------------------------------------------------------------

RegularityReport regularity_report(const PolyMesh& mesh) {
  RegularityReport r;
  r.h = mesh.h;
  r.min_cell_inradius_ratio = std::numeric_limits<double>::infinity();
  r.min_face_inradius_ratio = std::numeric_limits<double>::infinity();
  for (const auto& T : mesh.cells) {
    r.min_cell_inradius_ratio = std::min(r.min_cell_inradius_ratio, T.inradius / T.diameter);
    r.max_faces_per_cell = std::max(r.max_faces_per_cell, T.faces.size());
    if (!T.star_shaped) ++r.non_star_shaped_cells;
    for (std::size_t f : T.faces)
      r.max_cell_face_diameter_ratio = std::max(r.max_cell_face_diameter_ratio, T.diameter / mesh.faces[f].diameter);
  }
  for (const auto& F : mesh.faces)
    r.min_face_inradius_ratio = std::min(r.min_face_inradius_ratio, F.inradius / F.diameter);
  return r;
}

}  // namespace weberlab
