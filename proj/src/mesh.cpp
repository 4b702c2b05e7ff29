#include "hho2d/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hho2d {

namespace {

double signed_area(const std::vector<Point> &verts, const std::vector<int> &loop) {
  double a = 0.;
  const int p = static_cast<int>(loop.size());
  for (int i = 0; i < p; i++) {
    const Point &v0 = verts[loop[i]];
    const Point &v1 = verts[loop[(i + 1) % p]];
    a += v0.x * v1.y - v1.x * v0.y;
  }
  return 0.5 * a;
}

Point polygon_centroid(const std::vector<Point> &verts, const std::vector<int> &loop, double area) {
  double cx = 0., cy = 0.;
  const int p = static_cast<int>(loop.size());
  for (int i = 0; i < p; i++) {
    const Point &v0 = verts[loop[i]];
    const Point &v1 = verts[loop[(i + 1) % p]];
    const double cross = v0.x * v1.y - v1.x * v0.y;
    cx += (v0.x + v1.x) * cross;
    cy += (v0.y + v1.y) * cross;
  }
  return Point{cx / (6. * area), cy / (6. * area)};
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, const std::vector<std::vector<int>> &element_vertices)
    : m_vertices(std::move(vertices)) {
  if (m_vertices.empty() || element_vertices.empty())
    throw std::runtime_error("mesh: empty vertex or element list");
  for (const Point &v : m_vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw std::runtime_error("mesh: non-finite vertex coordinates");
  }

  m_elements.reserve(element_vertices.size());
  // Edge key (min,max vertex id) -> face id, used to pair the two traversals
  // of every interior edge.
  std::map<std::pair<int, int>, int> edge_to_face;

  for (int el = 0; el < static_cast<int>(element_vertices.size()); el++) {
    const std::vector<int> &loop = element_vertices[el];
    if (loop.size() < 3) throw std::runtime_error("mesh: element with fewer than 3 vertices");
    for (int v : loop) {
      if (v < 0 || v >= n_vertices()) throw std::runtime_error("mesh: dangling vertex index");
    }

    Element T;
    T.vertices = loop;
    T.area = signed_area(m_vertices, loop);
    if (!(T.area > 0.))
      throw std::runtime_error("mesh: element " + std::to_string(el) +
                               " has non-positive area (clockwise or degenerate loop)");
    T.centroid = polygon_centroid(m_vertices, loop, T.area);

    T.diameter = 0.;
    for (size_t i = 0; i < loop.size(); i++)
      for (size_t j = i + 1; j < loop.size(); j++)
        T.diameter = std::max(T.diameter, distance(m_vertices[loop[i]], m_vertices[loop[j]]));

    const int p = static_cast<int>(loop.size());
    for (int i = 0; i < p; i++) {
      const int a = loop[i];
      const int b = loop[(i + 1) % p];
      const auto key = std::minmax(a, b);
      auto it = edge_to_face.find(key);
      if (it == edge_to_face.end()) {
        Face F;
        F.vertices = {a, b};
        const Point &pa = m_vertices[a];
        const Point &pb = m_vertices[b];
        F.length = distance(pa, pb);
        if (!(F.length > 0.)) throw std::runtime_error("mesh: zero-length face");
        F.midpoint = Point{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
        F.tangent = Vector2(pb.x - pa.x, pb.y - pa.y) / F.length;
        F.normal = Vector2(F.tangent.y(), -F.tangent.x());
        F.owner = el;
        const int fid = static_cast<int>(m_faces.size());
        m_faces.push_back(F);
        edge_to_face.emplace(key, fid);
        T.faces.push_back(fid);
        T.face_signs.push_back(+1);
      } else {
        Face &F = m_faces[it->second];
        if (F.neighbor >= 0)
          throw std::runtime_error("mesh: face shared by more than two elements");
        F.neighbor = el;
        T.faces.push_back(it->second);
        // Both loops are CCW, so the second traversal runs b -> a.
        T.face_signs.push_back(F.vertices[0] == a ? +1 : -1);
      }
    }
    m_elements.push_back(std::move(T));
  }

  for (const Face &F : m_faces)
    if (F.on_boundary()) continue; else m_n_interior++;

  // Integrity checks: closed-boundary identity per element and geometry
  // consistency of the stored quantities.
  for (int el = 0; el < n_elements(); el++) {
    const Element &T = m_elements[el];
    Vector2 closure = Vector2::Zero();
    double perimeter = 0.;
    for (int lf = 0; lf < T.n_faces(); lf++) {
      const Face &F = m_faces[T.faces[lf]];
      closure += F.length * outward_normal(el, lf);
      perimeter += F.length;
      if (F.length > T.diameter * (1. + 1e-14))
        throw std::runtime_error("mesh: face longer than element diameter");
    }
    if (closure.norm() > 1e-12 * perimeter)
      throw std::runtime_error("mesh: element " + std::to_string(el) +
                               " violates the closed-boundary identity");
    m_h = std::max(m_h, T.diameter);
    m_total_area += T.area;
  }
}

Mesh build_structured_triangular(int n) {
  if (n < 1) throw std::invalid_argument("build_structured_triangular: n must be >= 1");

  std::vector<Point> vertices;
  vertices.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; j++)
    for (int i = 0; i <= n; i++)
      vertices.push_back(Point{static_cast<double>(i) / n, static_cast<double>(j) / n});

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::vector<int>> elements;
  elements.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; j++) {
    for (int i = 0; i < n; i++) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      // Diagonal from lower-left to upper-right.
      elements.push_back({v00, v10, v11});
      elements.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), elements);
}

GeometryReport geometry_report(const Mesh &mesh) {
  GeometryReport report;
  report.mesh_size = mesh.mesh_size();
  report.elements.reserve(mesh.n_elements());
  for (int el = 0; el < mesh.n_elements(); el++) {
    const Element &T = mesh.element(el);
    report.elements.push_back({T.diameter, T.area, T.centroid});
  }
  report.faces.reserve(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); f++) {
    const Face &F = mesh.face(f);
    report.faces.push_back({F.length, F.normal});
  }
  return report;
}

Mesh load_mesh(std::istream &in) {
  // Tokenize, dropping '#' comments.
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }

  size_t pos = 0;
  auto next = [&](const char *what) -> const std::string & {
    if (pos >= tokens.size())
      throw std::runtime_error(std::string("mesh file: unexpected end of input, expected ") + what);
    return tokens[pos++];
  };
  auto next_int = [&](const char *what) {
    const std::string &t = next(what);
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception &) {
      throw std::runtime_error(std::string("mesh file: expected integer for ") + what);
    }
    if (used != t.size())
      throw std::runtime_error(std::string("mesh file: expected integer for ") + what);
    return v;
  };
  auto next_real = [&](const char *what) {
    const std::string &t = next(what);
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception &) {
      throw std::runtime_error(std::string("mesh file: expected number for ") + what);
    }
    if (used != t.size())
      throw std::runtime_error(std::string("mesh file: expected number for ") + what);
    return v;
  };

  if (next("'vertices'") != "vertices") throw std::runtime_error("mesh file: missing 'vertices' header");
  const int nv = next_int("vertex count");
  if (nv < 3) throw std::runtime_error("mesh file: malformed vertex count");
  std::vector<Point> vertices(nv);
  for (int i = 0; i < nv; i++) {
    vertices[i].x = next_real("vertex x");
    vertices[i].y = next_real("vertex y");
  }

  if (next("'elements'") != "elements") throw std::runtime_error("mesh file: missing 'elements' header");
  const int ne = next_int("element count");
  if (ne < 1) throw std::runtime_error("mesh file: malformed element count");
  std::vector<std::vector<int>> elements(ne);
  for (int e = 0; e < ne; e++) {
    const int p = next_int("element vertex count");
    if (p < 3) throw std::runtime_error("mesh file: element with fewer than 3 vertices");
    elements[e].resize(p);
    for (int i = 0; i < p; i++) elements[e][i] = next_int("element vertex index");
  }
  if (pos != tokens.size()) throw std::runtime_error("mesh file: trailing tokens");

  return Mesh(std::move(vertices), elements);
}

Mesh load_mesh_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return load_mesh(in);
}

void save_mesh(const Mesh &mesh, std::ostream &out) {
  out << "vertices " << mesh.n_vertices() << "\n";
  char buf[128];
  for (int i = 0; i < mesh.n_vertices(); i++) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", mesh.vertex(i).x, mesh.vertex(i).y);
    out << buf;
  }
  out << "elements " << mesh.n_elements() << "\n";
  for (int e = 0; e < mesh.n_elements(); e++) {
    const Element &T = mesh.element(e);
    out << T.vertices.size();
    for (int v : T.vertices) out << ' ' << v;
    out << "\n";
  }
}

}  // namespace hho2d
