// Polyhedral meshes with oriented faces, topology annotations and regularity diagnostics.
//
// Provides:
//  - PolyMesh: cells, faces, local face frames, orientation signs, boundary components
//    and cutting-surface face sets
//  - structured hexahedral generators for the unit cube, the hollow cube and the cube with
//    a through channel
//  - JSON load/save and validation
//  - regularity report
//
#ifndef WEBERLAB_MESH_HPP
#define WEBERLAB_MESH_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace weberlab {

using Point3 = Eigen::Vector3d;

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class DomainKind { solid_cube, hollow_cube, through_hole_cube };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct FaceGeometry {
  std::size_t id = 0;
  std::vector<std::size_t> vertices;  // ordered loop
  Point3 center;                      // x_F, frame origin
  Point3 tangent1;
  Point3 tangent2;
  Point3 normal;                      // n_F; (tangent1, tangent2, normal) is right-handed
  double diameter = 0.;
  double inradius = 0.;
  double area = 0.;
  std::size_t cell_plus = 0;          // n_F points outward from this cell
  std::optional<std::size_t> cell_minus;
  int boundary_component = -1;        // j in 0..beta2 for boundary faces
  int cutting_surface = 0;            // i in 1..beta1, 0 if not on a cutting surface

  bool is_boundary() const { return !cell_minus.has_value(); }
};

struct CellGeometry {
  std::size_t id = 0;
  std::vector<std::size_t> faces;
  std::vector<int> orientations;      // epsilon_{T,F}, aligned with faces
  std::vector<std::size_t> vertices;
  Point3 center;                      // x_T, star point
  double diameter = 0.;
  double inradius = 0.;
  double volume = 0.;
  double eta = 1.;
  bool star_shaped = true;
};

struct CuttingSurface {
  std::vector<std::size_t> faces;
  Point3 normal;
};

struct Topology {
  int beta1 = 0;
  int beta2 = 0;
  std::vector<std::vector<std::size_t>> gamma_sets;  // Gamma_0 .. Gamma_beta2
  std::vector<CuttingSurface> sigma_sets;            // Sigma_1 .. Sigma_beta1
};

struct PolyMesh {
  std::vector<Point3> vertices;
  std::vector<CellGeometry> cells;
  std::vector<FaceGeometry> faces;
  Topology topology;

  double h = 0.;
  double eta_min = 1.;
  double eta_max = 1.;
  // beta1 > 0 was declared but no cutting surface was supplied
  bool sigma_missing = false;

  std::size_t n_cells() const { return cells.size(); }
  std::size_t n_faces() const { return faces.size(); }
  double kappa_eta() const { return eta_max / eta_min; }

  // Position of face f in the face list of cell t; throws if not incident.
  std::size_t local_face_index(std::size_t t, std::size_t f) const;
  // n_{T,F} for an incident pair
  Point3 outward_normal(std::size_t t, std::size_t f) const;
};

// Raw connectivity as read from file or produced by a generator; geometry is derived.
struct MeshInput {
  struct Cell {
    std::vector<std::size_t> faces;
    std::optional<Point3> star_point;
  };
  struct Face {
    std::vector<std::size_t> vertices;
    std::vector<std::size_t> cells;
  };
  std::vector<Point3> vertices;
  std::vector<Cell> cells;
  std::vector<Face> faces;
  int beta1 = 0;
  int beta2 = 0;
  std::optional<std::vector<std::vector<std::size_t>>> gamma_sets;
  std::vector<CuttingSurface> sigma_sets;
  std::vector<double> eta;
};

// Derives all geometry, orientations and frames, then validates every mesh invariant.
PolyMesh build_mesh(const MeshInput& input);

MeshInput to_input(const PolyMesh& mesh);

PolyMesh gen_structured(DomainKind kind, int divisions);

// Piecewise-constant eta: uniform value, or a two-value checkerboard over cubic blocks.
struct EtaSpec {
  double first = 1.;
  std::optional<double> second;  // checkerboard when set
  double block = 0.;             // checkerboard block edge; 0 uses each cell's own size

  static EtaSpec uniform(double value) { return {value, std::nullopt, 0.}; }
  static EtaSpec checkerboard(double a, double b, double block = 0.) { return {a, b, block}; }
  bool is_checkerboard() const { return second.has_value(); }
  std::string describe() const;
  static EtaSpec parse(const std::string& text);
};

PolyMesh with_eta(const PolyMesh& mesh, const EtaSpec& eta);
PolyMesh scaled_eta(const PolyMesh& mesh, double factor);

PolyMesh load_mesh(const std::string& path);
void save_mesh(const PolyMesh& mesh, const std::string& path);
std::string mesh_to_json_string(const PolyMesh& mesh);
PolyMesh mesh_from_json_string(const std::string& text);
// FNV-1a hash of the canonical JSON serialization, as 16 hex digits
std::string mesh_content_hash(const PolyMesh& mesh);

struct RegularityReport {
  double h = 0.;
  double min_cell_inradius_ratio = 0.;   // min r_T/h_T
  double min_face_inradius_ratio = 0.;   // min r_F/h_F
  double max_cell_face_diameter_ratio = 0.;  // max h_T/h_F over incidences
  std::size_t max_faces_per_cell = 0;
  std::size_t non_star_shaped_cells = 0;
};

RegularityReport regularity_report(const PolyMesh& mesh);

// Connected components of the boundary faces (edge adjacency), sorted by smallest face id.
std::vector<std::vector<std::size_t>> boundary_components(const PolyMesh& mesh);

}  // namespace weberlab

#endif
