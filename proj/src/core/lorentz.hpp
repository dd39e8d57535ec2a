#pragma once
// Rearrangement-based norm machinery: decreasing rearrangement profiles,
// two-index Lorentz quasinorms, the set-sup (integral-form) norm for the
// weak-L2 scale, logarithmically weighted refinements, and a two-sided dual
// estimate for atomic measures paired against gradient test functions.
//
// Conventions (fixed project-wide):
//   quasinorm(p,q):  ( int_0^inf (t^{1/p} f*(t))^q dt/t )^{1/q},
//                    sup_t t^{1/p} f*(t) for q = inf.  No normalizing
//                    prefactor; an indicator of measure m has
//                    quasinorm(2,1) = 2 sqrt(m).
//   setsup:          sup_E |E|^{-1/2} int_E |f|, the integral form of the
//                    weak-L2 norm; for the planar field 1/|x| this equals
//                    2 sqrt(pi) on any disk centered at the pole.
//   lambda form:     int_0^inf lambda_f(s)^{1/2} ds; equals exactly half of
//                    quasinorm(2,1) for every f (substitute t = lambda(s)).

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace glx {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

// Step profile of a decreasing rearrangement: value v[k] on [k*w, (k+1)*w).
struct Profile {
  RVec v;
  Real w = 0.0;
  bool empty() const { return v.empty() || w <= 0.0; }
};

// Magnitudes of a field sampled on in-mask cells, sorted descending.
// Ties keep cell-index order so the profile is deterministic.
Profile rearrangement_profile(const RVec& magnitudes, Real cell_area);
Profile profile_of_real_field(const Grid& g, const Mask& m, const RVec& f);
Profile profile_of_complex_field(const Grid& g, const Mask& m, const CVec& u);

// Step profile sampled from an analytic decreasing rearrangement on (0,t_max],
// using right-endpoint values so the synthesized profile minorizes fstar.
Profile synthesize_profile(const std::function<Real(Real)>& fstar, Real t_max,
                           int steps);

Real lorentz_quasinorm(const Profile& pr, Real p, Real q);
Real lorentz_setsup(const Profile& pr);
Real lambda_form(const Profile& pr);

// Lorentz norm with Zygmund weight log^alpha(e + 1/t) inserted in the t-form.
Real lz_norm(const Profile& pr, Real p, Real q, Real alpha);

// Cell-wise |grad f| via centered differences (one-sided at mask edges).
RVec gradient_magnitude(const Grid& g, const Mask& m, const RVec& f);

// Test-function seminorm: quasinorm(2,1) of |grad f|.
Real x_norm(const Grid& g, const Mask& m, const RVec& f);

// ---- dual estimate for atomic measures ----

struct Atom {
  Real x = 0.0, y = 0.0;
  Real mass = 0.0;
};

struct DualEstimate {
  Real lower = 0.0;       // realized by an explicit test function
  Real upper = 0.0;       // pairing bound through a curl decomposition
  bool upper_known = false;
  std::string best_test;  // description of the maximizing test function
};

// Two-sided estimate of sup_f <T,f> / quasinorm(2,1)(|grad f|) over scalar
// test functions, for T an atomic measure.  The lower bound searches signed
// cones and capped-log bumps anchored at the atoms with local ascent on the
// radii; the upper bound writes T = curl V with V the sum of tangential pole
// fields (requires zero total mass) and applies the exact layer-cake duality
//   <curl V, f> = int V . grad-perp f <= setsup(V) * lambdaform(|grad f|)
// with lambdaform = quasinorm(2,1)/2, so upper = setsup(V)/2 in this
// convention (constant 1/2, exact, documented here).
DualEstimate x_dual_estimate(const Grid& g, const Mask& m,
                             const std::vector<Atom>& atoms,
                             Real max_radius);

// Step table "t,fstar" for plots and regression baselines.
void save_profile_csv(const std::string& path, const Profile& pr);

}  // namespace glx
