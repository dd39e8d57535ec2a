#pragma once

#include "grid.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace glx {

using BoundaryFn = std::function<Real(Real, Real)>;

// Screened Poisson operator (-lap + c) on the in-mask cells of a domain,
// with Dirichlet data imposed where each grid arm crosses the true boundary
// (fractional-arm five-point stencil, second order in h). The matrix depends
// only on (grid, domain, c); the factorization is cached, so one instance
// serves any number of right-hand sides and boundary data sets.
//
// Solver policy: direct sparse LU when max(nx, ny) <= 256; stabilized
// bi-conjugate gradients with an incomplete-LU preconditioner above that,
// with a direct fallback. Every solve verifies the residual:
// max|Ax-b| <= 1e-9 * (1 + max|b|) or it throws.
class DirichletPoisson {
 public:
  DirichletPoisson(const Grid& g, const Domain& dom, Real c);
  ~DirichletPoisson();
  DirichletPoisson(DirichletPoisson&&) noexcept;
  DirichletPoisson& operator=(DirichletPoisson&&) noexcept;

  // rhs is a full-grid cell vector (entries outside the mask are ignored);
  // bc samples the Dirichlet data at the arm crossing points. The result is
  // a full-grid cell vector, zero outside the mask.
  RVec solve(const RVec& rhs, const BoundaryFn& bc) const;

  Real last_residual() const;
  int unknowns() const;
  const Mask& mask() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Unweighted graph Laplacian on the in-mask cell graph (active links only),
// i.e. the operator of the zero-flux discrete Neumann problem. Solves
// L psi = r with the first in-mask cell pinned to zero; r must sum to zero
// (enforced by subtracting its mean, with a tolerance guard). Used by the
// divergence-free gauge projection; the factorization is cached because the
// projection runs many times per minimization.
class NeumannLaplacian {
 public:
  NeumannLaplacian(const Grid& g, const Mask& m);
  ~NeumannLaplacian();
  NeumannLaplacian(NeumannLaplacian&&) noexcept;
  NeumannLaplacian& operator=(NeumannLaplacian&&) noexcept;

  RVec solve(const RVec& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sub-cell minimum location by a quadratic (Newton) refinement of the grid
// argmin, using central first and second differences on the 3x3 neighborhood.
// Throws if the argmin is ambiguous: another cell matches the minimum to
// within 1e-9 of the field's range while lying more than 2.5 cells away.
struct QuadMin {
  Real x = 0, y = 0;   // refined location
  Real value = 0;      // interpolated minimum value
  int i = 0, j = 0;    // grid argmin cell
};
QuadMin locate_quadratic_min(const Grid& g, const Mask& m, const RVec& f);

struct Xi0Solution {
  Grid grid;
  RVec xi;             // cell values, zero outside the mask
  Real px = 0, py = 0; // sub-cell location of the minimum
  Real xi_min = 0;     // interpolated minimum value
  Real j0 = 0;         // (1/2) int |grad xi|^2 + xi^2, via the pairing identity
  Real qxx = 0, qxy = 0, qyy = 0;  // second differences at the argmin cell
  Real residual = 0;
};

// Solves -lap(xi) + xi = -1 with zero boundary data and reports the minimum
// location, its value, the Hessian entries there, and the half squared
// H1 norm j0 = -(1/2) int xi (the two agree by the equation).
Xi0Solution solve_xi0(const Grid& g, const Domain& dom);

// Pole-parameterized kernel of (-lap + 1) with zero boundary data and source
// 2*pi*delta_p. Never discretizes the delta: solves the regular-part problem
// (-lap + 1) S = log|x-p| with S = log|x-p| on the boundary, and assembles
// G = -log|x-p| + S. One factorization serves all poles.
class GreenKernel {
 public:
  GreenKernel(const Grid& g, const Domain& dom);

  // Full G(., p) on cells. The pole must be at distance >= 4h from the
  // boundary or this throws. The value at the pole's own cell samples the
  // log singularity with the radius floored at a small fraction of h.
  RVec field(Real px, Real py) const;

  // Smooth part S(., p) = G + log|x-p| on cells.
  RVec smooth_part(Real px, Real py) const;

  // S(q, p) by bilinear interpolation of the smooth part with pole p.
  Real smooth_at(Real qx, Real qy, Real px, Real py) const;

  // |grad G| sampled at cell centers, with the gradient of the log term
  // taken analytically and the smooth part differenced centrally. This is
  // the field whose decreasing rearrangement feeds the weak-L2 norms.
  RVec grad_magnitude(Real px, Real py) const;

  // Discrete source mass: sum over cells within rho of p of
  // (-lap_h G + G) h^2, standard five-point Laplacian. Equals 2*pi up to
  // the lattice error of the log kernel. Requires B(p, rho+2h) in the mask.
  Real mass_in_ball(const RVec& g_field, Real px, Real py, Real rho) const;

  // Continuum-style flux identity: contour integral of -dG/dnu over the
  // circle of radius rho about p plus the integral of G over the enclosed
  // disk. Equals 2*pi up to interpolation error.
  Real flux_identity(Real px, Real py, Real rho) const;

  const Grid& grid() const { return g_; }
  const Mask& mask() const;

 private:
  RVec log_distance_rhs(Real px, Real py) const;

  Grid g_;
  Domain dom_;
  std::shared_ptr<DirichletPoisson> solver_;
};

// Superposition Phi = sum_i G_{a_i}. Points must be pairwise distinct and
// interior (>= 4h from the boundary).
RVec solve_phi(const GreenKernel& kernel,
               const std::vector<std::array<Real, 2>>& poles);

// A hole is a set of in-mask cells carrying a prescribed integer degree.
struct HoleSpec {
  std::vector<int> cells;  // grid cell indices
  Real degree = 0;
};

struct HoleSolution {
  RVec h;                   // cell values; hole cells carry their constant
  std::vector<Real> c;      // one constant per hole
  Real quad_energy = 0;     // sum of link differences^2 + h^2 cell masses
  Real pairing = 0;         // sum_i 2 pi d_i c_i
  std::vector<Real> flux;   // per hole: sum over crossing links of (c_i - h_nb)
};

// Minimizes (1/2) sum_links (dh)^2 + (1/2) sum_cells h^2 h_grid^2 minus
// sum_i 2 pi d_i c_i over fields vanishing outside the mask and constant on
// each hole. The gradient term runs over all links with an in-mask endpoint
// (out-of-mask neighbors contribute the zero Dirichlet value); the mass term
// runs over non-hole cells only. At the minimizer the quadratic energy equals
// the pairing exactly, and the per-hole flux equals 2 pi d_i exactly.
HoleSolution solve_hole_function(const Grid& g, const Mask& m,
                                 const std::vector<HoleSpec>& holes);

// Helper: the in-mask cells whose centers lie in B(center, r).
std::vector<int> cells_in_disk(const Grid& g, const Mask& m, Real cx, Real cy,
                               Real r);

// Poisson field of a unit measure: lap U = 2 pi mu on B(0, K), U = 0 on the
// boundary circle. The density lives on this object's own grid.
class UStarField {
 public:
  UStarField(Real K, int n, const RVec& density);

  Real value_at(Real x, Real y) const;  // bilinear, 0 outside the mask

  // (1/l) * rot90(grad U)((x - px)/l, (y - py)/l): the perpendicular
  // gradient of the blown-down potential U((. - p)/l).
  std::array<Real, 2> blowdown_grad_perp(Real x, Real y, Real px, Real py,
                                         Real l) const;

  // Discrete source mass sum over all in-mask cells of (-lap_h U) h^2 with
  // the fractional-arm stencil rows; equals 2*pi*total mass by construction.
  Real source_mass() const { return source_mass_; }

  const Grid& grid() const { return g_; }
  const RVec& values() const { return u_; }

 private:
  Grid g_;
  Mask m_;
  RVec u_;
  RVec gx_, gy_;  // central-difference gradient, for interpolation
  Real K_;
  Real source_mass_ = 0;
};

// Density builders on the UStarField grid (all normalized to unit mass).
RVec uniform_disk_density(const Grid& g, Real radius);
RVec one_cell_density(const Grid& g, Real x, Real y);

UStarField solve_ustar(Real K, int n, const RVec& density);

}  // namespace glx
