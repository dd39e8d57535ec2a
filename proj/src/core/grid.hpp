#pragma once
// Cell-centered square lattice over a planar domain (disk or axis-aligned
// rectangle), with gauge variables carried on the links between neighboring
// cell centers.  Sites hold complex order-parameter samples; an x-link joins
// site (i,j) to (i+1,j) and a y-link joins (i,j) to (i,j+1).

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace glx {

using Real = double;
using Cplx = std::complex<double>;
using RVec = std::vector<Real>;
using CVec = std::vector<Cplx>;

constexpr Real kPi = 3.14159265358979323846264338327950288;

struct Domain {
  enum class Shape { Disk, Rect };
  Shape shape = Shape::Disk;
  // disk parameters
  Real cx = 0.0, cy = 0.0, R = 1.0;
  // rectangle corners (rx0,ry0) .. (rx1,ry1)
  Real rx0 = 0.0, ry0 = 0.0, rx1 = 1.0, ry1 = 1.0;

  static Domain disk(Real cx, Real cy, Real R);
  static Domain rect(Real x0, Real y0, Real x1, Real y1);

  bool contains(Real x, Real y) const;
  // Positive inside, negative outside.
  Real boundary_distance(Real x, Real y) const;
  // For a inside and b outside, the fraction t in (0,1] with a+t(b-a) on the
  // boundary.  Used by the unequal-arm boundary stencil.
  Real exit_fraction(Real ax, Real ay, Real bx, Real by) const;
  void bounding_box(Real& x0, Real& y0, Real& x1, Real& y1) const;
  Real area() const;
};

struct Grid {
  int nx = 0, ny = 0;
  Real x0 = 0.0, y0 = 0.0, h = 0.0;

  Real xc(int i) const { return x0 + (i + 0.5) * h; }
  Real yc(int j) const { return y0 + (j + 0.5) * h; }
  long idx(int i, int j) const { return static_cast<long>(j) * nx + i; }
  long cells() const { return static_cast<long>(nx) * ny; }
  bool valid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  // Square cells; n cells across the longer bounding-box side.
  static Grid cover(const Domain& dom, int n);
};

struct Mask {
  std::vector<uint8_t> in;
  long n_in = 0;

  static Mask build(const Grid& g, const Domain& dom);
  bool operator()(const Grid& g, int i, int j) const {
    return g.valid(i, j) && in[g.idx(i, j)] != 0;
  }
};

// Gauge link field: ax(i,j) lives on the x-link out of site (i,j) and is
// meaningful for i < nx-1; ay(i,j) on the y-link, meaningful for j < ny-1.
// Both arrays are stored at full nx*ny size for uniform indexing.
struct Gauge {
  RVec ax, ay;
  static Gauge zero(const Grid& g) {
    Gauge a;
    a.ax.assign(g.cells(), 0.0);
    a.ay.assign(g.cells(), 0.0);
    return a;
  }
};

// A link is active iff both endpoint sites are inside the domain mask.
inline bool x_link_active(const Grid& g, const Mask& m, int i, int j) {
  return i + 1 < g.nx && m(g, i, j) && m(g, i + 1, j);
}
inline bool y_link_active(const Grid& g, const Mask& m, int i, int j) {
  return j + 1 < g.ny && m(g, i, j) && m(g, i, j + 1);
}
// A plaquette (i,j) spans sites (i,j),(i+1,j),(i+1,j+1),(i,j+1).
inline bool plaquette_active(const Grid& g, const Mask& m, int i, int j) {
  return i + 1 < g.nx && j + 1 < g.ny && m(g, i, j) && m(g, i + 1, j) &&
         m(g, i + 1, j + 1) && m(g, i, j + 1);
}

// Bilinear interpolation of a complex site field at an arbitrary point.
Cplx interp_site(const Grid& g, const CVec& u, Real x, Real y);
Real interp_site_real(const Grid& g, const RVec& f, Real x, Real y);

}  // namespace glx
