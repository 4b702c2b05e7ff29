// Polygonal mesh data model for 2D hybrid discretizations: vertices, oriented
// faces with global normals, elements with per-face orientation signs, and the
// geometric quantities (diameters, areas, centroids) the local operators need.
//
// Provides:
//  - Mesh construction from vertex coordinates and element vertex loops
//  - A structured triangular generator on the unit square
//  - A plain-text reader/writer (format documented in the README)

#ifndef HHO2D_MESH_HPP
#define HHO2D_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hho2d {

using Vector2 = Eigen::Vector2d;

struct Point {
  double x = 0.;
  double y = 0.;

  Vector2 to_vector() const { return Vector2(x, y); }
};

inline double distance(const Point &a, const Point &b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Straight mesh face (an edge in 2D). The normal is stored once, globally,
/// pointing out of the owner element; the neighbor sees the opposite sign.
struct Face {
  std::array<int, 2> vertices;  // endpoints, in the owner's traversal order
  double length = 0.;           // h_F
  Point midpoint;
  Vector2 tangent;  // unit vector from vertices[0] to vertices[1]
  Vector2 normal;   // unit vector, rotate(tangent, -pi/2): out of the owner
  int owner = -1;
  int neighbor = -1;  // -1 on the boundary

  bool on_boundary() const { return neighbor < 0; }
};

/// Convex or non-convex polygonal element with a counterclockwise vertex loop.
struct Element {
  std::vector<int> vertices;    // CCW loop
  std::vector<int> faces;       // face ids, one per loop edge
  std::vector<int> face_signs;  // +1/-1: outward normal = sign * face normal
  double area = 0.;
  Point centroid;
  double diameter = 0.;  // h_T

  int n_faces() const { return static_cast<int>(faces.size()); }
};

/// Immutable mesh. Construction computes face topology, orientation signs,
/// and geometry, and validates the basic integrity invariants.
class Mesh {
public:
  /// Build from vertex coordinates and per-element vertex loops. Throws
  /// std::runtime_error on clockwise loops, dangling indices, degenerate
  /// elements, or faces shared by more than two elements.
  Mesh(std::vector<Point> vertices, const std::vector<std::vector<int>> &element_vertices);

  int n_vertices() const { return static_cast<int>(m_vertices.size()); }
  int n_faces() const { return static_cast<int>(m_faces.size()); }
  int n_elements() const { return static_cast<int>(m_elements.size()); }
  int n_interior_faces() const { return m_n_interior; }
  int n_boundary_faces() const { return n_faces() - m_n_interior; }

  const Point &vertex(int i) const { return m_vertices[i]; }
  const Face &face(int i) const { return m_faces[i]; }
  const Element &element(int i) const { return m_elements[i]; }

  /// Largest element diameter.
  double mesh_size() const { return m_h; }
  double total_area() const { return m_total_area; }

  /// n_TF for the local face index `lf` of element `el`.
  Vector2 outward_normal(int el, int lf) const {
    const Element &T = m_elements[el];
    return T.face_signs[lf] * m_faces[T.faces[lf]].normal;
  }

private:
  std::vector<Point> m_vertices;
  std::vector<Face> m_faces;
  std::vector<Element> m_elements;
  double m_h = 0.;
  double m_total_area = 0.;
  int m_n_interior = 0;
};

/// n x n grid of squares on [0,1]^2, each split along the lower-left to
/// upper-right diagonal. Throws std::invalid_argument when n < 1.
Mesh build_structured_triangular(int n);

/// Per-entity geometry tables, handy for diagnostics and golden tests.
struct GeometryReport {
  struct ElementRow {
    double diameter;
    double area;
    Point centroid;
  };
  struct FaceRow {
    double length;
    Vector2 normal;
  };
  std::vector<ElementRow> elements;
  std::vector<FaceRow> faces;
  double mesh_size = 0.;
};

GeometryReport geometry_report(const Mesh &mesh);

/// Read a mesh from the plain-text format ('#' starts a comment):
///   vertices N
///   x y          (N lines)
///   elements M
///   p v0 ... v_{p-1}   (M lines)
Mesh load_mesh(std::istream &in);
Mesh load_mesh_file(const std::string &path);

void save_mesh(const Mesh &mesh, std::ostream &out);

}  // namespace hho2d

#endif
