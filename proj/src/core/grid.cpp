#include "core/grid.hpp"

#include <algorithm>

namespace glx {

Domain Domain::disk(Real cx, Real cy, Real R) {
  Domain d;
  d.shape = Shape::Disk;
  d.cx = cx;
  d.cy = cy;
  d.R = R;
  return d;
}

Domain Domain::rect(Real x0, Real y0, Real x1, Real y1) {
  Domain d;
  d.shape = Shape::Rect;
  d.rx0 = x0;
  d.ry0 = y0;
  d.rx1 = x1;
  d.ry1 = y1;
  return d;
}

bool Domain::contains(Real x, Real y) const {
  return boundary_distance(x, y) > 0.0;
}

Real Domain::boundary_distance(Real x, Real y) const {
  if (shape == Shape::Disk) {
    return R - std::hypot(x - cx, y - cy);
  }
  Real d = x - rx0;
  d = std::min(d, rx1 - x);
  d = std::min(d, y - ry0);
  d = std::min(d, ry1 - y);
  return d;
}

Real Domain::exit_fraction(Real ax, Real ay, Real bx, Real by) const {
  const Real dx = bx - ax, dy = by - ay;
  if (shape == Shape::Disk) {
    // |a + t d - c|^2 = R^2, smallest root in (0,1].
    const Real px = ax - cx, py = ay - cy;
    const Real A = dx * dx + dy * dy;
    const Real B = 2.0 * (px * dx + py * dy);
    const Real C = px * px + py * py - R * R;
    const Real disc = B * B - 4.0 * A * C;
    if (A <= 0.0 || disc < 0.0) return 1.0;
    const Real s = std::sqrt(disc);
    const Real t1 = (-B - s) / (2.0 * A);
    const Real t2 = (-B + s) / (2.0 * A);
    Real t = 1.0;
    if (t1 > 0.0 && t1 <= 1.0) {
      t = t1;
    } else if (t2 > 0.0 && t2 <= 1.0) {
      t = t2;
    }
    return t;
  }
  Real t = 1.0;
  auto clip = [&](Real p, Real q) {
    // segment crosses plane p + t q = 0 at t = -p/q
    if (q != 0.0) {
      const Real tc = -p / q;
      if (tc > 0.0 && tc < t) t = tc;
    }
  };
  clip(ax - rx0, dx);    // x = rx0
  clip(rx1 - ax, -dx);   // x = rx1
  clip(ay - ry0, dy);    // y = ry0
  clip(ry1 - ay, -dy);   // y = ry1
  return t;
}

void Domain::bounding_box(Real& x0, Real& y0, Real& x1, Real& y1) const {
  if (shape == Shape::Disk) {
    x0 = cx - R;
    y0 = cy - R;
    x1 = cx + R;
    y1 = cy + R;
  } else {
    x0 = rx0;
    y0 = ry0;
    x1 = rx1;
    y1 = ry1;
  }
}

Real Domain::area() const {
  if (shape == Shape::Disk) return kPi * R * R;
  return (rx1 - rx0) * (ry1 - ry0);
}

Grid Grid::cover(const Domain& dom, int n) {
  if (n < 2) throw std::invalid_argument("grid resolution must be >= 2");
  Real x0, y0, x1, y1;
  dom.bounding_box(x0, y0, x1, y1);
  const Real w = x1 - x0, ht = y1 - y0;
  Grid g;
  g.h = std::max(w, ht) / n;
  g.nx = std::max(2, static_cast<int>(std::lround(w / g.h)));
  g.ny = std::max(2, static_cast<int>(std::lround(ht / g.h)));
  g.x0 = x0;
  g.y0 = y0;
  return g;
}

Mask Mask::build(const Grid& g, const Domain& dom) {
  Mask m;
  m.in.assign(g.cells(), 0);
  m.n_in = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (dom.contains(g.xc(i), g.yc(j))) {
        m.in[g.idx(i, j)] = 1;
        ++m.n_in;
      }
    }
  }
  return m;
}

namespace {
template <typename T>
T interp_impl(const Grid& g, const std::vector<T>& f, Real x, Real y) {
  // clamp to the cell-center hull so boundary queries stay defined
  Real fx = (x - g.x0) / g.h - 0.5;
  Real fy = (y - g.y0) / g.h - 0.5;
  fx = std::clamp(fx, 0.0, static_cast<Real>(g.nx - 1));
  fy = std::clamp(fy, 0.0, static_cast<Real>(g.ny - 1));
  int i = std::min(static_cast<int>(fx), g.nx - 2);
  int j = std::min(static_cast<int>(fy), g.ny - 2);
  if (g.nx < 2 || g.ny < 2) return f[g.idx(0, 0)];
  const Real tx = fx - i, ty = fy - j;
  const T f00 = f[g.idx(i, j)], f10 = f[g.idx(i + 1, j)];
  const T f01 = f[g.idx(i, j + 1)], f11 = f[g.idx(i + 1, j + 1)];
  return f00 * ((1 - tx) * (1 - ty)) + f10 * (tx * (1 - ty)) +
         f01 * ((1 - tx) * ty) + f11 * (tx * ty);
}
}  // namespace

Cplx interp_site(const Grid& g, const CVec& u, Real x, Real y) {
  return interp_impl<Cplx>(g, u, x, y);
}

Real interp_site_real(const Grid& g, const RVec& f, Real x, Real y) {
  return interp_impl<Real>(g, f, x, y);
}

}  // namespace glx
