#pragma once

#include "elliptic.hpp"
#include "grid.hpp"

#include <array>
#include <vector>

namespace glx {

// Link-indexed real field (same layout as a gauge field).
using LinkField = Gauge;

// ---------------------------------------------------------------------------
// Energies. The covariant difference along an x-link is
//   (exp(-i h Ax) u_east - u_west) / h,
// which transforms exactly under the lattice gauge transform, so the energies
// below are gauge invariant to rounding. All sums run in a fixed row-major
// order for bit-stable results.
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
  Real kinetic = 0;    // (1/2) sum over active links of |D u|^2 h^2
  Real field = 0;      // (1/2) sum over active plaquettes of (curl A - h)^2 h^2
  Real potential = 0;  // sum over cells of (1-|u|^2)^2 h^2 / (4 eps^2)
  Real total = 0;
};

EnergyBreakdown energy_free(const Grid& g, const Mask& m, const CVec& u,
                            const Gauge& a, Real eps);
EnergyBreakdown energy_applied(const Grid& g, const Mask& m, const CVec& u,
                               const Gauge& a, Real eps, Real hex);
// Modulus-only energy: plain differences of |u| on links plus the potential;
// no gauge and no field term.
EnergyBreakdown energy_modulus(const Grid& g, const Mask& m, const CVec& u,
                               Real eps);

Real kinetic_energy(const Grid& g, const Mask& m, const CVec& u,
                    const Gauge& a);

// ---------------------------------------------------------------------------
// Gauge operations.
// ---------------------------------------------------------------------------

// u <- u exp(i chi), A <- A + grad_h chi on active links. Exact covariance:
// energies and currents are invariant to rounding.
void apply_gauge(const Grid& g, const Mask& m, CVec& u, Gauge& a,
                 const RVec& chi);

// Discrete divergence of a link field at cells (active links only).
RVec divergence(const Grid& g, const Mask& m, const Gauge& a);

// Divergence-free projection: gauge-transforms (u, A) by -psi where the
// graph Laplacian of psi matches h^2 div A. Afterwards max |div A| <= 1e-8.
void coulomb_project(const Grid& g, const Mask& m, const NeumannLaplacian& lap,
                     CVec& u, Gauge& a);

// ---------------------------------------------------------------------------
// Currents, curls, vorticity, winding.
// ---------------------------------------------------------------------------

// Gauge-invariant link current: Im(conj(u_west) exp(-i h Ax) u_east) / h.
LinkField current_field(const Grid& g, const Mask& m, const CVec& u,
                        const Gauge& a);

// Plaquette curl of a link field, stored at the plaquette's base cell index;
// zero on inactive plaquettes.
RVec curl_field(const Grid& g, const Mask& m, const Gauge& a);

// Vorticity mu = curl(j + A) on plaquettes.
RVec vorticity_field(const Grid& g, const Mask& m, const CVec& u,
                     const Gauge& a);

// Integer phase winding per plaquette: principal-value increments of arg(u)
// around the four corners, divided by 2 pi and rounded.
std::vector<int> winding_field(const Grid& g, const Mask& m, const CVec& u);

// Zeros of u located by plaquette winding plus a bilinear Newton refinement.
struct Zero {
  Real x = 0, y = 0;
  int winding = 0;
};
std::vector<Zero> find_zeros(const Grid& g, const Mask& m, const CVec& u);

// Degree of u along the circle of radius r about (cx, cy): at least 64
// samples (more when the circle is long), principal-value increments of the
// interpolated phase. Throws when |u| dips below 0.1 on the circle or when
// the winding misses an integer by more than 0.05.
int degree(const Grid& g, const CVec& u, Real cx, Real cy, Real r);

// ---------------------------------------------------------------------------
// Square-completion identities (both exact at the discrete level).
// ---------------------------------------------------------------------------

// Pointwise completion per link, with X a link field and u sampled at the
// link's base site:
//   |D u|^2 = |D u - i u X|^2 + 2 X j - X^2 |u|^2.
// Returns the two sides of the summed identity and their largest per-link
// defect (which is rounding only).
struct CellCompletion {
  Real lhs = 0;          // (1/2) sum |D u|^2 h^2
  Real completed = 0;    // (1/2) sum |D u - i u X|^2 h^2
  Real cross = 0;        // sum X j h^2
  Real square = 0;       // (1/2) sum X^2 |u|^2 h^2
  Real max_defect = 0;   // per-link identity residual
};
CellCompletion cell_completion(const Grid& g, const Mask& m, const CVec& u,
                               const Gauge& a, const LinkField& x);

// Region form on the dual grid. S is a set of plaquettes carrying values of
// H at their centers; P = grad(arg u) - A on the links interior to S (both
// adjacent plaquettes in S), with principal-value phase differences. Exact
// discrete identity:
//   (1/2)|P + rot_h H|^2 + (1/2)(curl A - H)^2
//     = (1/2)|P|^2 + (1/2)(curl A)^2 + (1/2)(|rot_h H|^2 + H^2)
//       - sum_S H (curl P + curl A) h^2 + contour,
// where rot_h H differences H across each link and the contour collects the
// boundary-link terms the summation by parts leaves behind. Plaquette-wise,
// (curl P + curl A) h^2 equals 2 pi (winding) exactly, so the cross term is
// the pairing of H with the enclosed vortices.
struct RegionCompletion {
  Real completed_kinetic = 0;  // (1/2) sum |P + rot H|^2 h^2 over interior links
  Real completed_field = 0;    // (1/2) sum (curl A - H)^2 h^2 over S
  Real base_kinetic = 0;       // (1/2) sum |P|^2 h^2
  Real base_field = 0;         // (1/2) sum (curl A)^2 h^2
  Real h_energy = 0;           // (1/2) sum (|rot H|^2 + H^2) h^2
  Real cross = 0;              // -sum H (curl P + curl A) h^2
  Real contour = 0;            // boundary-link sum
  Real defect = 0;             // |identity residual|
  Real winding_gap = 0;        // max |(curl P + curl A) h^2 - 2 pi w|
};
RegionCompletion region_completion(const Grid& g, const Mask& m, const CVec& u,
                                   const Gauge& a,
                                   const std::vector<uint8_t>& in_region,
                                   const RVec& h_values);

// ---------------------------------------------------------------------------
// Vortex balls.
// ---------------------------------------------------------------------------

// In-mask cells at boundary distance >= margin (the working subdomain that
// stays clear of the edge by one core scale).
Mask shrunk_mask(const Grid& g, const Domain& dom, Real margin);

// Cells where the modulus deviates from one by at least the threshold,
// restricted to the shrunken subdomain.
std::vector<long> bad_cells(const Grid& g, const Mask& working, const CVec& u,
                            Real threshold);

struct BallInfo {
  Real x = 0, y = 0, r = 0;
  Real ledger = 0;   // (1/2) int |D u|^2 over the annuli this ball swept
  int deg = 0;
  bool boundary = false;  // reaches the shrunken subdomain's edge
};

// Smallest ball containing two balls.
BallInfo enclosing_ball(const BallInfo& a, const BallInfo& b);

// Multiplicative ball growth with merge-on-touch. Seeds are one ball per bad
// cell (radius h/sqrt(2)). Each growth step scales every radius by the
// factor (1.02 by default, trimmed exactly at the target); balls that touch
// merge into their smallest enclosing ball, closest pair first, ties by
// lowest index; ledgers add on merge. Energy swept between radii is claimed
// link by link, so no annulus is double counted and the sum of ledgers never
// exceeds the total kinetic energy.
class BallConstruction {
 public:
  BallConstruction(const Grid& g, const Mask& m, const Domain& dom,
                   const CVec& u, const Gauge& a,
                   const std::vector<long>& seeds, Real factor = 1.02);

  // Grows until the sum of radii reaches the target (exact final step).
  void grow_to_total(Real target);

  const std::vector<BallInfo>& balls() const { return balls_; }
  Real total_radius() const;
  Real claimed_energy() const;

  // Degrees by summed plaquette winding inside each ball; balls whose
  // closure leaves the shrunken subdomain (margin from the true boundary)
  // are flagged and carry degree zero.
  void assign_degrees(Real boundary_margin);

 private:
  void merge_pass();
  void claim_annuli();

  const Grid& g_;
  const Mask& m_;
  Domain dom_;
  const CVec& u_;
  const Gauge& a_;
  Real factor_;
  std::vector<BallInfo> balls_;
  std::vector<uint8_t> claimed_x_, claimed_y_;
  std::vector<int> winding_;
  Real claimed_energy_ = 0;
};

// Net degree within distance t of a point (counts ball centers).
Real degree_within(const std::vector<BallInfo>& balls, Real px, Real py,
                   Real t);

// Radii t at which the circle about p meets some ball: the union of the
// intervals [dist - r, dist + r]. Returns the merged intervals; their total
// length is at most 2 sum r_i.
std::vector<std::array<Real, 2>> blocked_radii(
    const std::vector<BallInfo>& balls, Real px, Real py);

Real intervals_length(const std::vector<std::array<Real, 2>>& iv);

}  // namespace glx
