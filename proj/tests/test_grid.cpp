#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "core/field_io.hpp"
#include "core/grid.hpp"
#include "core/rng.hpp"

using namespace glx;

TEST_CASE("disk domain geometry") {
  const Domain d = Domain::disk(0.25, -0.5, 2.0);
  CHECK(d.contains(0.25, -0.5));
  CHECK(d.contains(2.0, -0.5));
  CHECK_FALSE(d.contains(2.5, -0.5));
  CHECK(d.boundary_distance(0.25, -0.5) == doctest::Approx(2.0));
  CHECK(d.area() == doctest::Approx(4.0 * kPi));

  // segment from center straight out: crossing at t = R / |b-a|
  const Real t = d.exit_fraction(0.25, -0.5, 0.25 + 4.0, -0.5);
  CHECK(t == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rect domain geometry") {
  const Domain d = Domain::rect(0.0, 0.0, 2.0, 1.0);
  CHECK(d.contains(1.0, 0.5));
  CHECK_FALSE(d.contains(-0.1, 0.5));
  CHECK(d.area() == doctest::Approx(2.0));
  const Real t = d.exit_fraction(1.9, 0.5, 2.3, 0.5);
  CHECK(t == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("grid covers bounding box with square cells") {
  const Domain d = Domain::disk(0.0, 0.0, 1.0);
  const Grid g = Grid::cover(d, 64);
  CHECK(g.nx == 64);
  CHECK(g.ny == 64);
  CHECK(g.h == doctest::Approx(2.0 / 64));
  CHECK(g.xc(0) == doctest::Approx(-1.0 + g.h / 2));
  CHECK(g.xc(63) == doctest::Approx(1.0 - g.h / 2));

  const Mask m = Mask::build(g, d);
  // mask area converges to the disk area
  const Real a = m.n_in * g.h * g.h;
  CHECK(a == doctest::Approx(kPi).epsilon(0.05));
  // center cells are inside, corner cells are not
  CHECK(m(g, 32, 32));
  CHECK_FALSE(m(g, 0, 0));
}

TEST_CASE("link and plaquette activity need both endpoints inside") {
  const Domain d = Domain::disk(0.0, 0.0, 1.0);
  const Grid g = Grid::cover(d, 32);
  const Mask m = Mask::build(g, d);
  int nlinks = 0, nplaq = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (x_link_active(g, m, i, j)) ++nlinks;
      if (plaquette_active(g, m, i, j)) ++nplaq;
    }
  }
  CHECK(nlinks > 0);
  CHECK(nplaq > 0);
  CHECK(nplaq < nlinks);
}

TEST_CASE("bilinear interpolation reproduces affine fields") {
  const Domain d = Domain::rect(0.0, 0.0, 1.0, 1.0);
  const Grid g = Grid::cover(d, 16);
  RVec f(g.cells());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      f[g.idx(i, j)] = 2.0 * g.xc(i) - 3.0 * g.yc(j) + 0.5;
  const Real v = interp_site_real(g, f, 0.4321, 0.617);
  CHECK(v == doctest::Approx(2.0 * 0.4321 - 3.0 * 0.617 + 0.5).epsilon(1e-12));
}

TEST_CASE("field container round trip preserves bits") {
  const Domain d = Domain::rect(0.0, 0.0, 1.0, 1.0);
  const Grid g = Grid::cover(d, 8);
  Rng rng(7);
  RVec f(g.cells());
  for (auto& v : f) v = rng.normal();
  CVec u(g.cells());
  for (auto& z : u) z = Cplx(rng.normal(), rng.normal());
  Gauge a = Gauge::zero(g);
  for (auto& v : a.ax) v = rng.normal();
  for (auto& v : a.ay) v = rng.normal();

  const std::string dir = std::filesystem::temp_directory_path().string();
  save_real_field(dir + "/t_real.fld", g, f);
  save_complex_field(dir + "/t_cplx.fld", g, u);
  save_gauge_field(dir + "/t_gauge.fld", g, a);

  const LoadedField lr = load_field(dir + "/t_real.fld");
  REQUIRE(lr.kind == FieldKind::RealCell);
  CHECK(lr.grid.nx == g.nx);
  CHECK(lr.grid.h == g.h);
  for (long c = 0; c < g.cells(); ++c) CHECK(lr.real_data[c] == f[c]);

  const LoadedField lc = load_field(dir + "/t_cplx.fld");
  REQUIRE(lc.kind == FieldKind::ComplexCell);
  for (long c = 0; c < g.cells(); ++c) CHECK(lc.cplx_data[c] == u[c]);

  const LoadedField lg = load_field(dir + "/t_gauge.fld");
  REQUIRE(lg.kind == FieldKind::GaugeLinks);
  for (long c = 0; c < g.cells(); ++c) {
    CHECK(lg.gauge.ax[c] == a.ax[c]);
    CHECK(lg.gauge.ay[c] == a.ay[c]);
  }
}

TEST_CASE("rng streams are reproducible") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(124);
  CHECK(Rng(123).next_u64() != c.next_u64());
}
