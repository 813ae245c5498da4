#pragma once

#include "shapes.hpp"

namespace reachlab {

//! Contents of an OBJ-subset file: vertices, optional per-vertex normals,
//! closed polylines (`l`) or triangles (`f`), and corner flags.
struct ObjData {
  int dim = 2;
  std::vector<Point> vertices;
  std::vector<Point> normals;
  std::vector<std::vector<std::int64_t>> loops;
  std::vector<std::array<std::int64_t, 3>> faces;
  std::vector<std::int64_t> flagged;
};

inline void write_obj(std::ostream& os, const ObjData& d) {
  auto coords = [&](const char* tag, const Point& p) {
    os << tag;
    for (int a = 0; a < d.dim; ++a) os << ' ' << format_double(p[a]);
    os << '\n';
  };
  for (const auto& p : d.vertices) coords("v", p);
  for (const auto& n : d.normals) coords("vn", n);
  for (auto i : d.flagged) os << "# flag " << i + 1 << '\n';
  for (const auto& loop : d.loops) {
    os << 'l';
    for (auto i : loop) os << ' ' << i + 1;
    os << ' ' << loop.front() + 1 << '\n';
  }
  for (const auto& f : d.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline ObjData read_obj(std::istream& is) {
  ObjData d;
  d.dim = 0;
  std::string line;
  std::size_t lineno = 0;
  auto read_point = [&](const std::vector<std::string>& w) {
    int n = static_cast<int>(w.size()) - 1;
    if (n != 2 && n != 3) throw FormatError("expected 2 or 3 coordinates", lineno);
    if (d.dim == 0) d.dim = n;
    if (n != d.dim) throw FormatError("coordinate count differs from earlier lines", lineno);
    Point p{0, 0, 0};
    for (int a = 0; a < n; ++a) p[a] = parse_double(w[a + 1], lineno);
    return p;
  };
  auto read_index = [&](const std::string& s) {
    auto v = detail::parse_int(s, lineno);
    if (v < 1) throw FormatError("indices are 1-based", lineno);
    return v - 1;
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto w = detail::split_words(line);
    if (w.empty()) continue;
    if (w[0] == "#") {
      if (w.size() == 3 && w[1] == "flag") d.flagged.push_back(read_index(w[2]));
      continue;
    }
    if (w[0] == "v") d.vertices.push_back(read_point(w));
    else if (w[0] == "vn") d.normals.push_back(read_point(w));
    else if (w[0] == "l") {
      if (w.size() < 4) throw FormatError("polyline needs at least two vertices and a closing index", lineno);
      std::vector<std::int64_t> loop;
      for (std::size_t k = 1; k < w.size(); ++k) loop.push_back(read_index(w[k]));
      if (loop.front() != loop.back()) throw FormatError("polyline is not closed (last index must repeat the first)", lineno);
      loop.pop_back();
      d.loops.push_back(loop);
    } else if (w[0] == "f") {
      if (w.size() != 4) throw FormatError("faces must be triangles", lineno);
      d.faces.push_back({read_index(w[1]), read_index(w[2]), read_index(w[3])});
    } else
      throw FormatError("unsupported record '" + w[0] + "'", lineno);
  }
  if (d.dim == 0) throw FormatError("no vertices", lineno);
  auto nv = static_cast<std::int64_t>(d.vertices.size());
  if (!d.normals.empty() && d.normals.size() != d.vertices.size())
    throw FormatError("normal count does not match vertex count", lineno);
  for (const auto& l : d.loops)
    for (auto i : l)
      if (i >= nv) throw FormatError("polyline index out of range", lineno);
  for (const auto& f : d.faces)
    for (auto i : f)
      if (i >= nv) throw FormatError("face index out of range", lineno);
  for (auto i : d.flagged)
    if (i >= nv) throw FormatError("flag index out of range", lineno);
  return d;
}

inline ObjData to_obj(const PointedSample& ps) {
  ObjData d;
  d.dim = ps.dim;
  d.vertices = ps.points;
  d.normals = ps.normals;
  d.loops = ps.loops;
  for (std::size_t i = 0; i < ps.flagged.size(); ++i)
    if (ps.flagged[i]) d.flagged.push_back(static_cast<std::int64_t>(i));
  return d;
}

inline ObjData to_obj(const TriMesh& m) {
  ObjData d;
  d.dim = 3;
  d.vertices = m.vertices;
  d.normals = m.normals;
  d.faces = m.faces;
  return d;
}

inline PointedSample to_sample(const ObjData& d) {
  if (d.normals.empty()) throw InvalidArgument("OBJ data carries no normals");
  PointedSample ps;
  ps.dim = d.dim;
  ps.points = d.vertices;
  ps.normals = d.normals;
  ps.loops = d.loops;
  ps.flagged.assign(d.vertices.size(), false);
  for (auto i : d.flagged) ps.flagged[i] = true;
  return ps;
}

inline TriMesh to_mesh(const ObjData& d) {
  if (d.dim != 3 || d.faces.empty()) throw InvalidArgument("OBJ data is not a triangle mesh");
  TriMesh m;
  m.vertices = d.vertices;
  m.normals = d.normals;
  m.faces = d.faces;
  return m;
}

inline void save_obj(const std::string& path, const ObjData& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_obj(os, d);
}

inline ObjData load_obj(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_obj(is);
}

} // namespace reachlab
