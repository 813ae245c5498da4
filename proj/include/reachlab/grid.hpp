#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "common.hpp"

namespace reachlab {

//! Lattice geometry shared by grids and distance fields.
struct Geometry {
  int dim = 2;
  std::array<std::int64_t, 3> size{1, 1, 1};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double spacing = 1.0;

  std::int64_t cell_count() const { return size[0] * size[1] * size[2]; }
  std::int64_t stride(int axis) const {
    std::int64_t s = 1;
    for (int a = 0; a < axis; ++a) s *= size[a];
    return s;
  }
  std::array<std::int64_t, 3> coords(std::int64_t idx) const {
    std::array<std::int64_t, 3> c{0, 0, 0};
    c[0] = idx % size[0];
    idx /= size[0];
    c[1] = idx % size[1];
    c[2] = idx / size[1];
    return c;
  }
  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k = 0) const {
    return i + size[0] * (j + size[1] * k);
  }
  Point center(std::int64_t idx) const {
    auto c = coords(idx);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = origin[a] + static_cast<double>(c[a]) * spacing;
    return p;
  }
  bool on_edge(std::int64_t idx) const {
    auto c = coords(idx);
    for (int a = 0; a < dim; ++a)
      if (c[a] == 0 || c[a] == size[a] - 1) return true;
    return false;
  }
  bool operator==(const Geometry&) const = default;
};

struct BinaryGrid {
  Geometry geom;
  std::vector<std::uint8_t> cells; // 0 or 1, axis 0 fastest

  BinaryGrid() = default;
  explicit BinaryGrid(Geometry g) : geom(g), cells(static_cast<std::size_t>(g.cell_count()), 0) {}

  bool occupied(std::int64_t idx) const { return cells[static_cast<std::size_t>(idx)] != 0; }
  std::int64_t occupied_count() const {
    std::int64_t n = 0;
    for (auto c : cells) n += c;
    return n;
  }
  bool operator==(const BinaryGrid&) const = default;
};

inline void validate(const Geometry& g) {
  if (g.dim != 2 && g.dim != 3) throw InvalidArgument("grid dimension must be 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (g.size[a] < 1) throw InvalidArgument("grid extents must be >= 1");
    if (a >= g.dim && g.size[a] != 1) throw InvalidArgument("unused axes must have extent 1");
  }
  if (!(g.spacing > 0.0) || !std::isfinite(g.spacing)) throw InvalidArgument("spacing must be positive and finite");
}

inline void validate(const BinaryGrid& g) {
  validate(g.geom);
  if (static_cast<std::int64_t>(g.cells.size()) != g.geom.cell_count())
    throw InvalidArgument("occupancy length does not match extents");
  for (auto c : g.cells)
    if (c > 1) throw InvalidArgument("occupancy values must be 0 or 1");
}

inline bool is_trivial(const BinaryGrid& g) {
  auto n = g.occupied_count();
  return n == 0 || n == g.geom.cell_count();
}

inline void require_nontrivial(const BinaryGrid& g, const char* who) {
  validate(g);
  if (is_trivial(g)) throw InvalidArgument(std::string(who) + ": grid is all-empty or all-full");
}

inline void require_same_geometry(const BinaryGrid& a, const BinaryGrid& b) {
  if (!(a.geom == b.geom)) throw GeometryMismatch("grids have different geometry");
}

//! Calls fn(neighbor_index) for each face neighbor inside the lattice;
//! returns true if the cell sits on the lattice edge.
template <class F>
bool for_each_face_neighbor(const Geometry& g, std::int64_t idx, F&& fn) {
  auto c = g.coords(idx);
  bool edge = false;
  for (int a = 0; a < g.dim; ++a) {
    std::int64_t st = g.stride(a);
    if (c[a] > 0) fn(idx - st); else edge = true;
    if (c[a] + 1 < g.size[a]) fn(idx + st); else edge = true;
  }
  return edge;
}

inline bool is_boundary_cell(const BinaryGrid& g, std::int64_t idx) {
  if (!g.occupied(idx)) return false;
  bool touches = false;
  bool edge = for_each_face_neighbor(g.geom, idx, [&](std::int64_t nb) {
    if (!g.occupied(nb)) touches = true;
  });
  return touches || edge;
}

//! Occupied cells with a face neighbor that is empty or outside the lattice.
inline std::vector<std::int64_t> boundary_cells(const BinaryGrid& g) {
  require_nontrivial(g, "boundary_cells");
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < g.geom.cell_count(); ++i)
    if (is_boundary_cell(g, i)) out.push_back(i);
  return out;
}

inline double cell_volume(const Geometry& g) { return std::pow(g.spacing, g.dim); }

inline double volume(const BinaryGrid& g) {
  return static_cast<double>(g.occupied_count()) * cell_volume(g.geom);
}

inline double symmetric_difference_volume(const BinaryGrid& a, const BinaryGrid& b) {
  require_same_geometry(a, b);
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) n += (a.cells[i] != b.cells[i]);
  return static_cast<double>(n) * cell_volume(a.geom);
}

//! Cells in exactly one grid with no cell of the other grid among their
//! 3^n - 1 neighbors (faces, edges, corners): the symmetric difference left
//! over after one cell of chessboard dilation slack.
inline std::vector<std::int64_t> slack_difference_cells(const BinaryGrid& a, const BinaryGrid& b) {
  require_same_geometry(a, b);
  const Geometry& g = a.geom;
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < g.cell_count(); ++i) {
    bool ia = a.occupied(i), ib = b.occupied(i);
    if (ia == ib) continue;
    const BinaryGrid& other = ia ? b : a;
    auto c = g.coords(i);
    bool near = false;
    const int dz = g.dim == 3 ? 1 : 0;
    for (int z = -dz; z <= dz && !near; ++z)
      for (int y = -1; y <= 1 && !near; ++y)
        for (int x = -1; x <= 1 && !near; ++x) {
          std::int64_t q[3] = {c[0] + x, c[1] + y, c[2] + z};
          bool in = true;
          for (int ax = 0; ax < 3; ++ax) in = in && q[ax] >= 0 && q[ax] < g.size[ax];
          if (in && other.occupied(g.index(q[0], q[1], q[2]))) near = true;
        }
    if (!near) out.push_back(i);
  }
  return out;
}

inline double slack_difference_volume(const BinaryGrid& a, const BinaryGrid& b) {
  return static_cast<double>(slack_difference_cells(a, b).size()) * cell_volume(a.geom);
}

// ---- RGRID 1 -------------------------------------------------------------

inline void write_rgrid(std::ostream& os, const BinaryGrid& g) {
  validate(g);
  const auto& ge = g.geom;
  os << "RGRID 1\n";
  os << "dim " << ge.dim << "\n";
  os << "size";
  for (int a = 0; a < ge.dim; ++a) os << ' ' << ge.size[a];
  os << "\norigin";
  for (int a = 0; a < ge.dim; ++a) os << ' ' << format_double(ge.origin[a]);
  os << "\nspacing " << format_double(ge.spacing) << "\n";
  os << "data raw\n";
  os.write(reinterpret_cast<const char*>(g.cells.data()), static_cast<std::streamsize>(g.cells.size()));
}

namespace detail {
inline std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

inline std::string read_header_line(std::istream& is, std::size_t line) {
  std::string s;
  if (!std::getline(is, s)) throw FormatError("unexpected end of header", line);
  return s;
}

inline std::int64_t parse_int(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("expected an integer, got '" + s + "'", line);
  return v;
}
} // namespace detail

inline BinaryGrid read_rgrid(std::istream& is) {
  using detail::read_header_line;
  using detail::split_words;
  if (read_header_line(is, 1) != "RGRID 1") throw FormatError("missing 'RGRID 1' magic", 1);
  Geometry ge;
  auto w = split_words(read_header_line(is, 2));
  if (w.size() != 2 || w[0] != "dim") throw FormatError("expected 'dim <2|3>'", 2);
  ge.dim = static_cast<int>(detail::parse_int(w[1], 2));
  if (ge.dim != 2 && ge.dim != 3) throw FormatError("dim must be 2 or 3", 2);
  w = split_words(read_header_line(is, 3));
  if (w.size() != static_cast<std::size_t>(ge.dim) + 1 || w[0] != "size") throw FormatError("expected 'size' with one extent per axis", 3);
  for (int a = 0; a < ge.dim; ++a) {
    ge.size[a] = detail::parse_int(w[a + 1], 3);
    if (ge.size[a] < 1) throw FormatError("extents must be >= 1", 3);
  }
  w = split_words(read_header_line(is, 4));
  if (w.size() != static_cast<std::size_t>(ge.dim) + 1 || w[0] != "origin") throw FormatError("expected 'origin' with one coordinate per axis", 4);
  for (int a = 0; a < ge.dim; ++a) ge.origin[a] = parse_double(w[a + 1], 4);
  w = split_words(read_header_line(is, 5));
  if (w.size() != 2 || w[0] != "spacing") throw FormatError("expected 'spacing <h>'", 5);
  ge.spacing = parse_double(w[1], 5);
  if (!(ge.spacing > 0.0) || !std::isfinite(ge.spacing)) throw FormatError("spacing must be positive and finite", 5);
  if (read_header_line(is, 6) != "data raw") throw FormatError("expected 'data raw'", 6);
  BinaryGrid g(ge);
  is.read(reinterpret_cast<char*>(g.cells.data()), static_cast<std::streamsize>(g.cells.size()));
  auto got = is.gcount();
  if (got != static_cast<std::streamsize>(g.cells.size()))
    throw FormatError("payload truncated at byte offset " + std::to_string(got), 7);
  for (std::size_t i = 0; i < g.cells.size(); ++i)
    if (g.cells[i] > 1) throw FormatError("payload byte offset " + std::to_string(i) + " is not 0x00/0x01", 7);
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload", 7);
  return g;
}

inline void save_rgrid(const std::string& path, const BinaryGrid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_rgrid(os, g);
}

inline BinaryGrid load_rgrid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_rgrid(is);
}

} // namespace reachlab
