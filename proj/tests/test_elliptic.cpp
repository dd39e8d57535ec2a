// Elliptic solver tests against radial closed forms (values frozen from
// tools/oracles/elliptic_oracle.py) and against exact discrete identities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "../src/core/elliptic.hpp"
#include "../src/core/lorentz.hpp"
#include "../src/core/rng.hpp"

#include <cmath>
#include <stdexcept>

using namespace glx;

namespace {
// tools/oracles/elliptic_oracle.py
constexpr Real kXi0Center = -0.21015168517488803;
constexpr Real kXi0R015 = -0.20570253667414985;
constexpr Real kXi0R035 = -0.18577675130619242;
constexpr Real kXi0R055 = -0.14928055861244184;
constexpr Real kXi0R075 = -0.095112822977126468;
constexpr Real kJ0Disk = 0.16842088929814547;
constexpr Real kXi0HessXX = 0.39492415741255598;
constexpr Real kGreenR025 = 1.2037449534208248;
constexpr Real kGreenR05 = 0.57076252253391411;
constexpr Real kGreenSmoothCenter = -0.21661392738620046;
constexpr Real kTwoPi = 6.2831853071795865;
constexpr Real kHoleC1 = 1.2708054346679894;
constexpr Real kUStarCenter = -1.8862943611198906;
constexpr Real kUStarR05 = -1.7612943611198906;
constexpr Real kUStarR2 = -0.69314718055994531;

Real disk_xi0_error(int n, const Domain& dom) {
  const Grid g = Grid::cover(dom, n);
  Xi0Solution s = solve_xi0(g, dom);
  const Real samples[4][3] = {{0.15, 0.0, kXi0R015},
                              {0.0, 0.35, kXi0R035},
                              {0.55 * std::sqrt(0.5), 0.55 * std::sqrt(0.5),
                               kXi0R055},
                              {0.75, 0.0, kXi0R075}};
  Real err = 0;
  for (const auto& sm : samples)
    err = std::max(err,
                   std::abs(interp_site_real(g, s.xi, sm[0], sm[1]) - sm[2]));
  return err;
}
}  // namespace

TEST_CASE("screened solve on the disk reproduces the radial closed form") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 256);
  Xi0Solution s = solve_xi0(g, dom);

  CHECK(s.residual <= 1e-9);
  CHECK(std::abs(s.xi_min - kXi0Center) < 1e-3);
  CHECK(std::abs(s.px) <= g.h);
  CHECK(std::abs(s.py) <= g.h);
  CHECK(std::abs(interp_site_real(g, s.xi, 0.15, 0.0) - kXi0R015) < 1e-3);
  CHECK(std::abs(interp_site_real(g, s.xi, 0.0, 0.75) - kXi0R075) < 1e-3);
  CHECK(s.j0 == doctest::Approx(kJ0Disk).epsilon(0.01));

  // Discrete maximum principle: the field is nonpositive.
  const Mask m = Mask::build(g, dom);
  Real mx = -1;
  for (long k = 0; k < g.cells(); ++k)
    if (m.in[k]) mx = std::max(mx, s.xi[k]);
  CHECK(mx <= 1e-9);

  // Hessian at the minimum: the radial solution has an isotropic Hessian.
  CHECK(s.qxx == doctest::Approx(kXi0HessXX).epsilon(0.02));
  CHECK(s.qyy == doctest::Approx(kXi0HessXX).epsilon(0.02));
  CHECK(std::abs(s.qxy) < 0.02);
}

TEST_CASE("refinement order of the boundary-fitted stencil is near two") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Real e128 = disk_xi0_error(128, dom);
  const Real e256 = disk_xi0_error(256, dom);
  const Real order = std::log2(e128 / e256);
  CHECK(order >= 1.7);
}

TEST_CASE("square domain minimum sits at the center") {
  const Domain dom = Domain::rect(-1, -1, 1, 1);
  const Grid g = Grid::cover(dom, 128);
  Xi0Solution s = solve_xi0(g, dom);
  CHECK(std::abs(s.px) <= g.h);
  CHECK(std::abs(s.py) <= g.h);
  CHECK(s.xi_min < 0);
}

TEST_CASE("ambiguous minima are rejected with candidates listed") {
  const Domain dom = Domain::rect(-1, -1, 1, 1);
  const Grid g = Grid::cover(dom, 64);
  const Mask m = Mask::build(g, dom);
  RVec f(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Real x = g.xc(i), y = g.yc(j);
      const Real dl = (x - 0.5) * (x - 0.5) + y * y;
      const Real dr = (x + 0.5) * (x + 0.5) + y * y;
      f[g.idx(i, j)] = std::min(dl, dr);
    }
  CHECK_THROWS_AS(locate_quadratic_min(g, m, f), std::runtime_error);
}

TEST_CASE("unit-source kernel matches the radial closed form") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 256);
  GreenKernel kern(g, dom);

  RVec G = kern.field(0.0, 0.0);
  CHECK(std::abs(interp_site_real(g, G, 0.25, 0.0) - kGreenR025) < 5e-3);
  CHECK(std::abs(interp_site_real(g, G, 0.0, 0.5) - kGreenR05) < 5e-3);
  CHECK(std::abs(kern.smooth_at(0.0, 0.0, 0.0, 0.0) - kGreenSmoothCenter) <
        5e-3);

  // Positive near the pole: the log term dominates.
  CHECK(interp_site_real(g, G, 0.05, 0.0) > 0);

  // Source mass: both the lattice row sum over a ball and the contour form.
  CHECK(kern.mass_in_ball(G, 0.0, 0.0, 0.3) ==
        doctest::Approx(kTwoPi).epsilon(0.01));
  CHECK(kern.flux_identity(0.0, 0.0, 0.2) ==
        doctest::Approx(kTwoPi).epsilon(0.01));

  CHECK_THROWS_AS(kern.field(0.99, 0.0), std::invalid_argument);
}

TEST_CASE("kernel gradient magnitude has a stable weak-type norm") {
  const Domain dom = Domain::disk(0, 0, 1);
  Real norms[2];
  int idx = 0;
  for (int n : {128, 256}) {
    const Grid g = Grid::cover(dom, n);
    GreenKernel kern(g, dom);
    RVec mag = kern.grad_magnitude(0.2, -0.1);
    Profile pr = profile_of_real_field(g, Mask::build(g, dom), mag);
    norms[idx++] = lorentz_setsup(pr);
  }
  CHECK(norms[0] == doctest::Approx(norms[1]).epsilon(0.02));
}

TEST_CASE("superposition is linear, symmetric, and carries mass per pole") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 128);
  GreenKernel kern(g, dom);

  const std::vector<std::array<Real, 2>> both = {{0.4, 0.0}, {-0.4, 0.0}};
  RVec phi = solve_phi(kern, both);
  RVec pa = solve_phi(kern, {{0.4, 0.0}});
  RVec pb = solve_phi(kern, {{-0.4, 0.0}});
  Real lin = 0;
  for (long k = 0; k < g.cells(); ++k)
    lin = std::max(lin, std::abs(phi[k] - pa[k] - pb[k]));
  CHECK(lin <= 1e-9);

  // Mirror symmetry of the pole pair maps to mirror symmetry of the field.
  const Mask m = Mask::build(g, dom);
  Real asym = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!m(g, i, j) || !m(g, g.nx - 1 - i, j)) continue;
      asym = std::max(asym, std::abs(phi[g.idx(i, j)] -
                                     phi[g.idx(g.nx - 1 - i, j)]));
    }
  CHECK(asym <= 1e-8);

  CHECK(kern.mass_in_ball(phi, 0.4, 0.0, 0.2) ==
        doctest::Approx(kTwoPi).epsilon(0.015));

  CHECK_THROWS_AS(solve_phi(kern, {{0.1, 0.1}, {0.1, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("hole function: closed form, exact identities, antisymmetry") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 256);
  const Mask m = Mask::build(g, dom);

  HoleSpec hole;
  hole.cells = cells_in_disk(g, m, 0.0, 0.0, 0.25);
  hole.degree = 1;
  HoleSolution sol = solve_hole_function(g, m, {hole});

  // Staircase hole boundary costs O(h) in the constant; the identities are
  // exact at the discrete level.
  CHECK(sol.c[0] == doctest::Approx(kHoleC1).epsilon(0.05));
  CHECK(sol.c[0] > 0);
  CHECK(std::abs(sol.quad_energy - sol.pairing) <= 1e-9 * sol.pairing);
  CHECK(std::abs(sol.flux[0] - kTwoPi) <= 1e-9);

  // Radially decreasing outward from the hole.
  Real prev = interp_site_real(g, sol.h, 0.3, 0.0);
  for (Real r : {0.5, 0.7, 0.9}) {
    const Real v = interp_site_real(g, sol.h, r, 0.0);
    CHECK(v < prev);
    prev = v;
  }

  // Degree sign flip negates the field.
  HoleSpec anti = hole;
  anti.degree = -1;
  HoleSolution msol = solve_hole_function(g, m, {anti});
  Real diff = 0;
  for (long k = 0; k < g.cells(); ++k)
    diff = std::max(diff, std::abs(msol.h[k] + sol.h[k]));
  CHECK(diff <= 1e-12);

  // Overlap rejection.
  HoleSpec o1, o2;
  o1.cells = {hole.cells[0], hole.cells[1]};
  o1.degree = 1;
  o2.cells = {hole.cells[1]};
  o2.degree = 1;
  CHECK_THROWS_AS(solve_hole_function(g, m, {o1, o2}), std::invalid_argument);
}

TEST_CASE("hole function degenerates to the unit-source kernel") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 128);
  const Mask m = Mask::build(g, dom);
  GreenKernel kern(g, dom);
  RVec G = kern.field(0.0, 0.0);

  Real prev_dist = -1;
  std::vector<Real> dists;
  for (Real r : {0.2, 0.1, 0.05}) {
    HoleSpec hole;
    hole.cells = cells_in_disk(g, m, 0.0, 0.0, r);
    hole.degree = 1;
    HoleSolution sol = solve_hole_function(g, m, {hole});
    Real dist = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!m(g, i, j)) continue;
        const Real rr = std::hypot(g.xc(i), g.yc(j));
        if (rr < 0.45) continue;
        dist = std::max(dist, std::abs(sol.h[g.idx(i, j)] - G[g.idx(i, j)]));
      }
    dists.push_back(dist);
  }
  CHECK(dists[1] < dists[0]);
  CHECK(dists[2] < dists[1]);
  (void)prev_dist;
}

TEST_CASE("measure potential matches the uniform-disk closed form") {
  const int n = 512;  // exercises the iterative solver path
  const Grid g = Grid::cover(Domain::disk(0, 0, 4), n);
  UStarField us = solve_ustar(4.0, n, uniform_disk_density(g, 1.0));

  CHECK(std::abs(us.value_at(0.0, 0.0) - kUStarCenter) < 1e-3);
  CHECK(std::abs(us.value_at(0.5, 0.0) - kUStarR05) < 1e-3);
  CHECK(std::abs(us.value_at(0.0, 2.0) - kUStarR2) < 1e-3);
  CHECK(us.source_mass() == doctest::Approx(kTwoPi).epsilon(1e-6));

  // Reflection symmetry of the density carries to the potential.
  for (Real x : {0.3, 1.1, 2.2})
    CHECK(std::abs(us.value_at(x, 0.4) - us.value_at(-x, 0.4)) <= 1e-8);

  // Continuum flux through the circle r=2: all the mass is enclosed.
  const int M = 720;
  Real flux = 0;
  for (int t = 0; t < M; ++t) {
    const Real a = 2.0 * kPi * (t + 0.5) / M;
    const Real cx = std::cos(a), cy = std::sin(a);
    auto gp = us.blowdown_grad_perp(2.0 * cx, 2.0 * cy, 0.0, 0.0, 1.0);
    const Real gx = gp[1], gy = -gp[0];
    flux += (gx * cx + gy * cy) * (2.0 * kPi * 2.0 / M);
  }
  CHECK(flux == doctest::Approx(kTwoPi).epsilon(0.01));
}

TEST_CASE("measure potential of a point mass is the free logarithm") {
  const int n = 256;
  const Grid g = Grid::cover(Domain::disk(0, 0, 4), n);
  RVec dens = one_cell_density(g, 0.0, 0.0);
  UStarField us = solve_ustar(4.0, n, dens);

  // The mass sits at the deposited cell's center; compare against the exact
  // logarithm centered there.
  long kd = -1;
  for (long k = 0; k < g.cells(); ++k)
    if (dens[k] > 0) kd = k;
  const int di = static_cast<int>(kd % g.nx);
  const int dj = static_cast<int>(kd / g.nx);
  const Real qx = g.xc(di), qy = g.yc(dj);
  for (Real r : {0.5, 1.0, 2.0}) {
    const Real exact = std::log(std::hypot(r - qx, qy) / 4.0);
    CHECK(std::abs(us.value_at(r, 0.0) - exact) < 5e-3);
  }

  // Precondition guards.
  RVec heavy = dens;
  for (auto& v : heavy) v *= 2.0;
  CHECK_THROWS_AS(solve_ustar(4.0, n, heavy), std::invalid_argument);
  // Negative mass at an in-mask cell, compensated to keep unit total.
  RVec neg = dens;
  const Real h2 = g.h * g.h;
  neg[kd] = -1.0 / h2;
  neg[kd + 1] += 3.0 / h2;
  neg[kd - 1] -= 1.0 / h2;
  CHECK_THROWS_AS(solve_ustar(4.0, n, neg), std::invalid_argument);
}

TEST_CASE("zero-flux graph solve inverts the link Laplacian") {
  const Domain dom = Domain::disk(0, 0, 1);
  const Grid g = Grid::cover(dom, 128);
  const Mask m = Mask::build(g, dom);
  NeumannLaplacian lap(g, m);

  Rng rng(20260822u);
  RVec psi_true(g.cells(), 0.0);
  for (long k = 0; k < g.cells(); ++k)
    if (m.in[k]) psi_true[k] = rng.uniform(-1.0, 1.0);

  // Apply the graph Laplacian over active links.
  RVec rhs(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (x_link_active(g, m, i, j)) {
        const Real d = psi_true[g.idx(i, j)] - psi_true[g.idx(i + 1, j)];
        rhs[g.idx(i, j)] += d;
        rhs[g.idx(i + 1, j)] -= d;
      }
      if (y_link_active(g, m, i, j)) {
        const Real d = psi_true[g.idx(i, j)] - psi_true[g.idx(i, j + 1)];
        rhs[g.idx(i, j)] += d;
        rhs[g.idx(i, j + 1)] -= d;
      }
    }

  RVec psi = lap.solve(rhs);

  // The result matches up to the grounded constant.
  Real shift = 0;
  long cnt = 0;
  for (long k = 0; k < g.cells(); ++k)
    if (m.in[k]) {
      shift += psi[k] - psi_true[k];
      ++cnt;
    }
  shift /= static_cast<Real>(cnt);
  Real dev = 0;
  for (long k = 0; k < g.cells(); ++k)
    if (m.in[k]) dev = std::max(dev, std::abs(psi[k] - psi_true[k] - shift));
  CHECK(dev <= 1e-8);

  // A source with nonzero total flux is rejected.
  RVec bad(g.cells(), 0.0);
  bad[g.idx(g.nx / 2, g.ny / 2)] = 1.0;
  CHECK_THROWS_AS(lap.solve(bad), std::invalid_argument);
}
