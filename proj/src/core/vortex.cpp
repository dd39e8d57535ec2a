#include "vortex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace glx {
namespace {

inline Cplx cov_x(const Grid& g, const CVec& u, const Gauge& a, int i, int j) {
  const Cplx rot = std::polar(1.0, -g.h * a.ax[g.idx(i, j)]);
  return (rot * u[g.idx(i + 1, j)] - u[g.idx(i, j)]) / g.h;
}
inline Cplx cov_y(const Grid& g, const CVec& u, const Gauge& a, int i, int j) {
  const Cplx rot = std::polar(1.0, -g.h * a.ay[g.idx(i, j)]);
  return (rot * u[g.idx(i, j + 1)] - u[g.idx(i, j)]) / g.h;
}

inline Real plaquette_curl(const Grid& g, const Gauge& a, int i, int j) {
  return (a.ax[g.idx(i, j)] + a.ay[g.idx(i + 1, j)] - a.ax[g.idx(i, j + 1)] -
          a.ay[g.idx(i, j)]) /
         g.h;
}

inline Real pv_arg(const Cplx& z) { return std::arg(z); }

}  // namespace

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

static EnergyBreakdown energy_impl(const Grid& g, const Mask& m, const CVec& u,
                                   const Gauge& a, Real eps, Real hex,
                                   bool applied) {
  EnergyBreakdown e;
  const Real h2 = g.h * g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (x_link_active(g, m, i, j)) {
        const Cplx d = cov_x(g, u, a, i, j);
        e.kinetic += 0.5 * std::norm(d) * h2;
      }
      if (y_link_active(g, m, i, j)) {
        const Cplx d = cov_y(g, u, a, i, j);
        e.kinetic += 0.5 * std::norm(d) * h2;
      }
      if (plaquette_active(g, m, i, j)) {
        const Real c = plaquette_curl(g, a, i, j) - (applied ? hex : 0.0);
        e.field += 0.5 * c * c * h2;
      }
      if (m(g, i, j)) {
        const Real q = 1.0 - std::norm(u[g.idx(i, j)]);
        e.potential += q * q * h2 / (4.0 * eps * eps);
      }
    }
  e.total = e.kinetic + e.field + e.potential;
  return e;
}

EnergyBreakdown energy_free(const Grid& g, const Mask& m, const CVec& u,
                            const Gauge& a, Real eps) {
  return energy_impl(g, m, u, a, eps, 0.0, false);
}

EnergyBreakdown energy_applied(const Grid& g, const Mask& m, const CVec& u,
                               const Gauge& a, Real eps, Real hex) {
  return energy_impl(g, m, u, a, eps, hex, true);
}

EnergyBreakdown energy_modulus(const Grid& g, const Mask& m, const CVec& u,
                               Real eps) {
  EnergyBreakdown e;
  const Real h2 = g.h * g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const long k = g.idx(i, j);
      if (x_link_active(g, m, i, j)) {
        const Real d = (std::abs(u[g.idx(i + 1, j)]) - std::abs(u[k])) / g.h;
        e.kinetic += 0.5 * d * d * h2;
      }
      if (y_link_active(g, m, i, j)) {
        const Real d = (std::abs(u[g.idx(i, j + 1)]) - std::abs(u[k])) / g.h;
        e.kinetic += 0.5 * d * d * h2;
      }
      if (m(g, i, j)) {
        const Real q = 1.0 - std::norm(u[k]);
        e.potential += q * q * h2 / (4.0 * eps * eps);
      }
    }
  e.total = e.kinetic + e.potential;
  return e;
}

Real kinetic_energy(const Grid& g, const Mask& m, const CVec& u,
                    const Gauge& a) {
  Real acc = 0;
  const Real h2 = g.h * g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (x_link_active(g, m, i, j))
        acc += 0.5 * std::norm(cov_x(g, u, a, i, j)) * h2;
      if (y_link_active(g, m, i, j))
        acc += 0.5 * std::norm(cov_y(g, u, a, i, j)) * h2;
    }
  return acc;
}

// ---------------------------------------------------------------------------
// Gauge operations
// ---------------------------------------------------------------------------

void apply_gauge(const Grid& g, const Mask& m, CVec& u, Gauge& a,
                 const RVec& chi) {
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const long k = g.idx(i, j);
      if (m(g, i, j)) u[k] *= std::polar(1.0, chi[k]);
      if (x_link_active(g, m, i, j))
        a.ax[k] += (chi[g.idx(i + 1, j)] - chi[k]) / g.h;
      if (y_link_active(g, m, i, j))
        a.ay[k] += (chi[g.idx(i, j + 1)] - chi[k]) / g.h;
    }
}

RVec divergence(const Grid& g, const Mask& m, const Gauge& a) {
  RVec div(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (x_link_active(g, m, i, j)) {
        const Real v = a.ax[g.idx(i, j)] / g.h;
        div[g.idx(i, j)] += v;
        div[g.idx(i + 1, j)] -= v;
      }
      if (y_link_active(g, m, i, j)) {
        const Real v = a.ay[g.idx(i, j)] / g.h;
        div[g.idx(i, j)] += v;
        div[g.idx(i, j + 1)] -= v;
      }
    }
  // Sign: outflow minus inflow at each cell.
  for (auto& v : div) v = -v;
  return div;
}

void coulomb_project(const Grid& g, const Mask& m, const NeumannLaplacian& lap,
                     CVec& u, Gauge& a) {
  RVec div = divergence(g, m, a);
  RVec rhs(g.cells(), 0.0);
  const Real h2 = g.h * g.h;
  for (long k = 0; k < g.cells(); ++k) rhs[k] = div[k] * h2;
  RVec psi = lap.solve(rhs);
  RVec chi(g.cells(), 0.0);
  for (long k = 0; k < g.cells(); ++k) chi[k] = -psi[k];
  apply_gauge(g, m, u, a, chi);
}

// ---------------------------------------------------------------------------
// Currents, curls, vorticity, winding
// ---------------------------------------------------------------------------

LinkField current_field(const Grid& g, const Mask& m, const CVec& u,
                        const Gauge& a) {
  LinkField j = Gauge::zero(g);
  for (int jj = 0; jj < g.ny; ++jj)
    for (int i = 0; i < g.nx; ++i) {
      const long k = g.idx(i, jj);
      if (x_link_active(g, m, i, jj)) {
        const Cplx rot = std::polar(1.0, -g.h * a.ax[k]);
        j.ax[k] = std::imag(std::conj(u[k]) * rot * u[g.idx(i + 1, jj)]) / g.h;
      }
      if (y_link_active(g, m, i, jj)) {
        const Cplx rot = std::polar(1.0, -g.h * a.ay[k]);
        j.ay[k] = std::imag(std::conj(u[k]) * rot * u[g.idx(i, jj + 1)]) / g.h;
      }
    }
  return j;
}

RVec curl_field(const Grid& g, const Mask& m, const Gauge& a) {
  RVec c(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (plaquette_active(g, m, i, j))
        c[g.idx(i, j)] = plaquette_curl(g, a, i, j);
  return c;
}

RVec vorticity_field(const Grid& g, const Mask& m, const CVec& u,
                     const Gauge& a) {
  LinkField j = current_field(g, m, u, a);
  for (long k = 0; k < g.cells(); ++k) {
    j.ax[k] += a.ax[k];
    j.ay[k] += a.ay[k];
  }
  return curl_field(g, m, j);
}

std::vector<int> winding_field(const Grid& g, const Mask& m, const CVec& u) {
  std::vector<int> w(g.cells(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!plaquette_active(g, m, i, j)) continue;
      const Cplx u00 = u[g.idx(i, j)];
      const Cplx u10 = u[g.idx(i + 1, j)];
      const Cplx u11 = u[g.idx(i + 1, j + 1)];
      const Cplx u01 = u[g.idx(i, j + 1)];
      const Real s = pv_arg(u10 * std::conj(u00)) +
                     pv_arg(u11 * std::conj(u10)) +
                     pv_arg(u01 * std::conj(u11)) +
                     pv_arg(u00 * std::conj(u01));
      w[g.idx(i, j)] = static_cast<int>(std::lround(s / (2.0 * kPi)));
    }
  return w;
}

std::vector<Zero> find_zeros(const Grid& g, const Mask& m, const CVec& u) {
  std::vector<Zero> zeros;
  std::vector<int> w = winding_field(g, m, u);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (w[g.idx(i, j)] == 0) continue;
      // Bilinear Newton refinement inside the plaquette square.
      const Cplx u00 = u[g.idx(i, j)];
      const Cplx u10 = u[g.idx(i + 1, j)];
      const Cplx u11 = u[g.idx(i + 1, j + 1)];
      const Cplx u01 = u[g.idx(i, j + 1)];
      Real s = 0.5, t = 0.5;
      for (int it = 0; it < 16; ++it) {
        const Cplx val = (1 - s) * (1 - t) * u00 + s * (1 - t) * u10 +
                         s * t * u11 + (1 - s) * t * u01;
        const Cplx ds = (1 - t) * (u10 - u00) + t * (u11 - u01);
        const Cplx dt = (1 - s) * (u01 - u00) + s * (u11 - u10);
        const Real a11 = ds.real(), a12 = dt.real();
        const Real a21 = ds.imag(), a22 = dt.imag();
        const Real det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-30) break;
        const Real step_s = (a22 * val.real() - a12 * val.imag()) / det;
        const Real step_t = (a11 * val.imag() - a21 * val.real()) / det;
        s = std::min(1.0, std::max(0.0, s - step_s));
        t = std::min(1.0, std::max(0.0, t - step_t));
        if (std::abs(step_s) + std::abs(step_t) < 1e-14) break;
      }
      Zero z;
      z.x = g.xc(i) + s * g.h;
      z.y = g.yc(j) + t * g.h;
      z.winding = w[g.idx(i, j)];
      zeros.push_back(z);
    }
  return zeros;
}

int degree(const Grid& g, const CVec& u, Real cx, Real cy, Real r) {
  const int min_samples = 64;
  const int by_arc = static_cast<int>(std::ceil(4.0 * 2.0 * kPi * r / g.h));
  const int M = std::max(min_samples, by_arc);
  Real total = 0;
  Cplx prev = interp_site(g, u, cx + r, cy);
  if (std::abs(prev) < 0.1)
    throw std::runtime_error("modulus too small on the degree circle");
  for (int t = 1; t <= M; ++t) {
    const Real a = 2.0 * kPi * t / M;
    const Cplx cur = interp_site(g, u, cx + r * std::cos(a), cy + r * std::sin(a));
    if (std::abs(cur) < 0.1)
      throw std::runtime_error("modulus too small on the degree circle");
    total += pv_arg(cur * std::conj(prev));
    prev = cur;
  }
  const Real d = total / (2.0 * kPi);
  const Real nearest = std::round(d);
  if (std::abs(d - nearest) > 0.05)
    throw std::runtime_error("winding along the circle is not near an integer");
  return static_cast<int>(nearest);
}

// ---------------------------------------------------------------------------
// Square-completion identities
// ---------------------------------------------------------------------------

CellCompletion cell_completion(const Grid& g, const Mask& m, const CVec& u,
                               const Gauge& a, const LinkField& x) {
  CellCompletion r;
  const Real h2 = g.h * g.h;
  auto accumulate = [&](const Cplx& du, const Cplx& base, Real xv) {
    const Real lhs = std::norm(du);
    const Cplx shifted = du - Cplx(0, 1) * base * xv;
    const Real comp = std::norm(shifted);
    const Real j = std::imag(std::conj(base) * du);
    const Real sq = xv * xv * std::norm(base);
    r.lhs += 0.5 * lhs * h2;
    r.completed += 0.5 * comp * h2;
    r.cross += xv * j * h2;
    r.square += 0.5 * sq * h2;
    r.max_defect =
        std::max(r.max_defect, std::abs(lhs - (comp + 2 * xv * j - sq)));
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const long k = g.idx(i, j);
      if (x_link_active(g, m, i, j))
        accumulate(cov_x(g, u, a, i, j), u[k], x.ax[k]);
      if (y_link_active(g, m, i, j))
        accumulate(cov_y(g, u, a, i, j), u[k], x.ay[k]);
    }
  return r;
}

RegionCompletion region_completion(const Grid& g, const Mask& m, const CVec& u,
                                   const Gauge& a,
                                   const std::vector<uint8_t>& in_region,
                                   const RVec& h_values) {
  RegionCompletion out;
  const Real h = g.h;
  const Real h2 = h * h;

  auto in_s = [&](int i, int j) {
    return g.valid(i, j) && in_region[g.idx(i, j)] != 0 &&
           plaquette_active(g, m, i, j);
  };
  auto px = [&](int i, int j) {
    return pv_arg(u[g.idx(i + 1, j)] * std::conj(u[g.idx(i, j)])) / h -
           a.ax[g.idx(i, j)];
  };
  auto py = [&](int i, int j) {
    return pv_arg(u[g.idx(i, j + 1)] * std::conj(u[g.idx(i, j)])) / h -
           a.ay[g.idx(i, j)];
  };

  std::vector<int> w = winding_field(g, m, u);

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      // Interior x-link: plaquettes above (i,j) and below (i,j-1) in S.
      if (in_s(i, j) && in_s(i, j - 1)) {
        const Real p = px(i, j);
        const Real rot = -(h_values[g.idx(i, j)] - h_values[g.idx(i, j - 1)]) / h;
        out.base_kinetic += 0.5 * p * p * h2;
        const Real c = p + rot;
        out.completed_kinetic += 0.5 * c * c * h2;
        out.h_energy += 0.5 * rot * rot * h2;
      }
      // Interior y-link: plaquettes right (i,j) and left (i-1,j) in S.
      if (in_s(i, j) && in_s(i - 1, j)) {
        const Real p = py(i, j);
        const Real rot = (h_values[g.idx(i, j)] - h_values[g.idx(i - 1, j)]) / h;
        out.base_kinetic += 0.5 * p * p * h2;
        const Real c = p + rot;
        out.completed_kinetic += 0.5 * c * c * h2;
        out.h_energy += 0.5 * rot * rot * h2;
      }

      if (!in_s(i, j)) continue;
      const Real hp = h_values[g.idx(i, j)];
      const Real curl_a = plaquette_curl(g, a, i, j);
      const Real curl_p =
          (px(i, j) + py(i + 1, j) - px(i, j + 1) - py(i, j)) / h;

      out.base_field += 0.5 * curl_a * curl_a * h2;
      const Real cf = curl_a - hp;
      out.completed_field += 0.5 * cf * cf * h2;
      out.h_energy += 0.5 * hp * hp * h2;
      out.cross += -hp * (curl_p + curl_a) * h2;
      out.winding_gap = std::max(
          out.winding_gap, std::abs((curl_p + curl_a) * h2 -
                                    2.0 * kPi * w[g.idx(i, j)]));

      // Contour: edges whose other plaquette is missing contribute their
      // counterclockwise circulation term weighted by this plaquette's H.
      if (!in_s(i, j - 1)) out.contour += hp * h * px(i, j);          // bottom
      if (!in_s(i + 1, j)) out.contour += hp * h * py(i + 1, j);      // right
      if (!in_s(i, j + 1)) out.contour += hp * h * (-px(i, j + 1));   // top
      if (!in_s(i - 1, j)) out.contour += hp * h * (-py(i, j));       // left
    }

  const Real lhs = out.completed_kinetic + out.completed_field;
  const Real rhs = out.base_kinetic + out.base_field + out.h_energy +
                   out.cross + out.contour;
  out.defect = std::abs(lhs - rhs);
  return out;
}

// ---------------------------------------------------------------------------
// Vortex balls
// ---------------------------------------------------------------------------

Mask shrunk_mask(const Grid& g, const Domain& dom, Real margin) {
  Mask m;
  m.in.assign(g.cells(), 0);
  m.n_in = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (dom.boundary_distance(g.xc(i), g.yc(j)) >= margin) {
        m.in[g.idx(i, j)] = 1;
        ++m.n_in;
      }
  return m;
}

std::vector<long> bad_cells(const Grid& g, const Mask& working, const CVec& u,
                            Real threshold) {
  std::vector<long> out;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const long k = g.idx(i, j);
      if (!working.in[k]) continue;
      if (std::abs(std::abs(u[k]) - 1.0) >= threshold) out.push_back(k);
    }
  return out;
}

BallInfo enclosing_ball(const BallInfo& a, const BallInfo& b) {
  const Real d = std::hypot(b.x - a.x, b.y - a.y);
  BallInfo r;
  r.ledger = a.ledger + b.ledger;
  if (d + std::min(a.r, b.r) <= std::max(a.r, b.r)) {
    const BallInfo& big = a.r >= b.r ? a : b;
    r.x = big.x;
    r.y = big.y;
    r.r = big.r;
    return r;
  }
  r.r = 0.5 * (d + a.r + b.r);
  const Real ux = (b.x - a.x) / d;
  const Real uy = (b.y - a.y) / d;
  r.x = a.x + (r.r - a.r) * ux;
  r.y = a.y + (r.r - a.r) * uy;
  return r;
}

BallConstruction::BallConstruction(const Grid& g, const Mask& m,
                                   const Domain& dom, const CVec& u,
                                   const Gauge& a,
                                   const std::vector<long>& seeds, Real factor)
    : g_(g), m_(m), dom_(dom), u_(u), a_(a), factor_(factor) {
  claimed_x_.assign(g.cells(), 0);
  claimed_y_.assign(g.cells(), 0);
  winding_ = winding_field(g, m, u);
  const Real r0 = g.h / std::sqrt(2.0);
  for (long k : seeds) {
    BallInfo b;
    b.x = g.xc(static_cast<int>(k % g.nx));
    b.y = g.yc(static_cast<int>(k / g.nx));
    b.r = r0;
    balls_.push_back(b);
  }
  merge_pass();
  claim_annuli();
}

Real BallConstruction::total_radius() const {
  Real t = 0;
  for (const auto& b : balls_) t += b.r;
  return t;
}

Real BallConstruction::claimed_energy() const { return claimed_energy_; }

void BallConstruction::merge_pass() {
  while (balls_.size() > 1) {
    int best_a = -1, best_b = -1;
    Real best_d = 0;
    for (size_t p = 0; p < balls_.size(); ++p)
      for (size_t q = p + 1; q < balls_.size(); ++q) {
        const Real d = std::hypot(balls_[q].x - balls_[p].x,
                                  balls_[q].y - balls_[p].y);
        if (d <= balls_[p].r + balls_[q].r) {
          if (best_a < 0 || d < best_d) {
            best_d = d;
            best_a = static_cast<int>(p);
            best_b = static_cast<int>(q);
          }
        }
      }
    if (best_a < 0) break;
    BallInfo merged = enclosing_ball(balls_[best_a], balls_[best_b]);
    balls_[best_a] = merged;
    balls_.erase(balls_.begin() + best_b);
  }
}

void BallConstruction::claim_annuli() {
  const Real h2 = g_.h * g_.h;
  for (auto& b : balls_) {
    const int i0 = std::max(0, static_cast<int>((b.x - b.r - g_.x0) / g_.h) - 2);
    const int i1 = std::min(g_.nx - 1,
                            static_cast<int>((b.x + b.r - g_.x0) / g_.h) + 2);
    const int j0 = std::max(0, static_cast<int>((b.y - b.r - g_.y0) / g_.h) - 2);
    const int j1 = std::min(g_.ny - 1,
                            static_cast<int>((b.y + b.r - g_.y0) / g_.h) + 2);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const long k = g_.idx(i, j);
        if (!claimed_x_[k] && x_link_active(g_, m_, i, j)) {
          const Real mx = g_.xc(i) + 0.5 * g_.h, my = g_.yc(j);
          if (std::hypot(mx - b.x, my - b.y) <= b.r) {
            claimed_x_[k] = 1;
            const Real e = 0.5 * std::norm(cov_x(g_, u_, a_, i, j)) * h2;
            b.ledger += e;
            claimed_energy_ += e;
          }
        }
        if (!claimed_y_[k] && y_link_active(g_, m_, i, j)) {
          const Real mx = g_.xc(i), my = g_.yc(j) + 0.5 * g_.h;
          if (std::hypot(mx - b.x, my - b.y) <= b.r) {
            claimed_y_[k] = 1;
            const Real e = 0.5 * std::norm(cov_y(g_, u_, a_, i, j)) * h2;
            b.ledger += e;
            claimed_energy_ += e;
          }
        }
      }
  }
}

void BallConstruction::grow_to_total(Real target) {
  if (balls_.empty()) return;
  int guard = 0;
  while (total_radius() < target * (1.0 - 1e-14) && ++guard < 10000) {
    const Real f = std::min(factor_, target / total_radius());
    for (auto& b : balls_) b.r *= f;
    merge_pass();
    claim_annuli();
  }
}

void BallConstruction::assign_degrees(Real boundary_margin) {
  for (auto& b : balls_) {
    b.boundary =
        dom_.boundary_distance(b.x, b.y) < b.r + boundary_margin;
    if (b.boundary) {
      b.deg = 0;
      continue;
    }
    int d = 0;
    const int i0 = std::max(0, static_cast<int>((b.x - b.r - g_.x0) / g_.h) - 2);
    const int i1 = std::min(g_.nx - 1,
                            static_cast<int>((b.x + b.r - g_.x0) / g_.h) + 2);
    const int j0 = std::max(0, static_cast<int>((b.y - b.r - g_.y0) / g_.h) - 2);
    const int j1 = std::min(g_.ny - 1,
                            static_cast<int>((b.y + b.r - g_.y0) / g_.h) + 2);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const Real cx = g_.xc(i) + 0.5 * g_.h;
        const Real cy = g_.yc(j) + 0.5 * g_.h;
        if (std::hypot(cx - b.x, cy - b.y) <= b.r) d += winding_[g_.idx(i, j)];
      }
    b.deg = d;
  }
}

Real degree_within(const std::vector<BallInfo>& balls, Real px, Real py,
                   Real t) {
  Real d = 0;
  for (const auto& b : balls)
    if (std::hypot(b.x - px, b.y - py) <= t) d += b.deg;
  return d;
}

std::vector<std::array<Real, 2>> blocked_radii(
    const std::vector<BallInfo>& balls, Real px, Real py) {
  std::vector<std::array<Real, 2>> iv;
  for (const auto& b : balls) {
    const Real d = std::hypot(b.x - px, b.y - py);
    iv.push_back({std::max(0.0, d - b.r), d + b.r});
  }
  std::sort(iv.begin(), iv.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  std::vector<std::array<Real, 2>> merged;
  for (const auto& seg : iv) {
    if (!merged.empty() && seg[0] <= merged.back()[1])
      merged.back()[1] = std::max(merged.back()[1], seg[1]);
    else
      merged.push_back(seg);
  }
  return merged;
}

Real intervals_length(const std::vector<std::array<Real, 2>>& iv) {
  Real len = 0;
  for (const auto& seg : iv) len += seg[1] - seg[0];
  return len;
}

}  // namespace glx
