#include "core/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>

namespace glx {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
// the Legendre recurrence; machine-precision and deterministic.
struct GaussRule {
  std::vector<Real> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    Real t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const Real pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const Real dp = n * (t * p1 - p0) / (t * t - 1.0);
      const Real dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    Real p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const Real pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const Real dp = n * (t * p1 - p0) / (t * t - 1.0);
    r.x[i] = t;
    r.w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return r;
}

const GaussRule& gl16() {
  static const GaussRule r = gauss_legendre(16);
  return r;
}

Real integrate_gl(Real a, Real b, const GaussRule& g,
                  const std::function<Real(Real)>& f) {
  const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Real s = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return s * half;
}

}  // namespace

Profile rearrangement_profile(const RVec& magnitudes, Real cell_area) {
  Profile pr;
  pr.w = cell_area;
  pr.v.reserve(magnitudes.size());
  for (Real m : magnitudes) pr.v.push_back(std::abs(m));
  std::stable_sort(pr.v.begin(), pr.v.end(), std::greater<Real>());
  return pr;
}

Profile profile_of_real_field(const Grid& g, const Mask& m, const RVec& f) {
  RVec mags;
  mags.reserve(m.n_in);
  for (long c = 0; c < g.cells(); ++c) {
    if (m.in[c]) mags.push_back(std::abs(f[c]));
  }
  return rearrangement_profile(mags, g.h * g.h);
}

Profile profile_of_complex_field(const Grid& g, const Mask& m, const CVec& u) {
  RVec mags;
  mags.reserve(m.n_in);
  for (long c = 0; c < g.cells(); ++c) {
    if (m.in[c]) mags.push_back(std::abs(u[c]));
  }
  return rearrangement_profile(mags, g.h * g.h);
}

Profile synthesize_profile(const std::function<Real(Real)>& fstar, Real t_max,
                           int steps) {
  Profile pr;
  pr.w = t_max / steps;
  pr.v.resize(steps);
  for (int k = 0; k < steps; ++k) pr.v[k] = fstar((k + 1) * pr.w);
  return pr;
}

Real lorentz_quasinorm(const Profile& pr, Real p, Real q) {
  if (pr.empty()) return 0.0;
  const Real w = pr.w;
  const size_t m = pr.v.size();
  if (q == kInf) {
    // sup of t^{1/p} f*(t) over each step, checking both endpoints (the
    // weight is monotone, so the endpoints bracket the step supremum)
    Real best = 0.0;
    for (size_t k = 0; k < m; ++k) {
      best = std::max(best, pr.v[k] * std::pow((k + 1) * w, 1.0 / p));
      if (k > 0) best = std::max(best, pr.v[k] * std::pow(k * w, 1.0 / p));
    }
    return best;
  }
  // per-step closed form of int (t^{1/p} v)^q dt/t = v^q (p/q) d(t^{q/p})
  const Real e = q / p;
  Real sum = 0.0;
  Real tqp_left = 0.0;
  for (size_t k = 0; k < m; ++k) {
    const Real tqp_right = std::pow((k + 1) * w, e);
    if (pr.v[k] > 0.0) sum += std::pow(pr.v[k], q) * (tqp_right - tqp_left);
    tqp_left = tqp_right;
  }
  return std::pow(sum / e, 1.0 / q);
}

Real lorentz_setsup(const Profile& pr) {
  if (pr.empty()) return 0.0;
  // sup over measures t of t^{-1/2} int_0^t f*: prefix sums of leading cells
  Real best = 0.0, acc = 0.0;
  for (size_t k = 0; k < pr.v.size(); ++k) {
    acc += pr.v[k] * pr.w;
    best = std::max(best, acc / std::sqrt((k + 1) * pr.w));
  }
  return best;
}

Real lambda_form(const Profile& pr) {
  if (pr.empty()) return 0.0;
  // int_0^inf lambda(s)^{1/2} ds over the level steps; exactly half of
  // lorentz_quasinorm(pr,2,1) by Abel summation
  Real sum = 0.0;
  for (size_t k = 0; k < pr.v.size(); ++k) {
    const Real next = (k + 1 < pr.v.size()) ? pr.v[k + 1] : 0.0;
    sum += (pr.v[k] - next) * std::sqrt((k + 1) * pr.w);
  }
  return sum;
}

Real lz_norm(const Profile& pr, Real p, Real q, Real alpha) {
  if (pr.empty()) return 0.0;
  const Real w = pr.w;
  const size_t m = pr.v.size();
  auto logw = [alpha](Real t) { return std::pow(std::log(std::exp(1.0) + 1.0 / t), alpha); };
  if (q == kInf) {
    Real best = 0.0;
    for (size_t k = 0; k < m; ++k) {
      if (pr.v[k] <= 0.0) continue;
      const Real t0 = k * w, t1 = (k + 1) * w;
      // the weight t^{1/p} log^alpha(e+1/t) is increasing for alpha <= 0;
      // sample the step interior as well to cover alpha > 0
      Real wt = std::pow(t1, 1.0 / p) * logw(t1);
      if (t0 > 0.0) wt = std::max(wt, std::pow(t0, 1.0 / p) * logw(t0));
      if (alpha > 0.0) {
        for (int s = 1; s < 8; ++s) {
          const Real t = t0 + (t1 - t0) * s / 8.0;
          if (t > 0.0) wt = std::max(wt, std::pow(t, 1.0 / p) * logw(t));
        }
      }
      best = std::max(best, pr.v[k] * wt);
    }
    return best;
  }
  const GaussRule& gr = gl16();
  auto integrand = [&](Real t) {
    return std::pow(t, q / p - 1.0) * std::pow(logw(t), q);
  };
  Real sum = 0.0;
  for (size_t k = 0; k < m; ++k) {
    if (pr.v[k] <= 0.0) continue;
    const Real t0 = k * w, t1 = (k + 1) * w;
    Real seg = 0.0;
    if (k == 0) {
      // integrable endpoint singularity at t=0: dyadic refinement deep
      // enough that the neglected tail is below 1e-15 relative
      Real b = t1;
      for (int lvl = 0; lvl < 120 && b > 0.0; ++lvl) {
        const Real a = b * 0.5;
        seg += integrate_gl(a, b, gr, integrand);
        b = a;
      }
    } else {
      seg = integrate_gl(t0, t1, gr, integrand);
    }
    sum += std::pow(pr.v[k], q) * seg;
  }
  return std::pow(sum, 1.0 / q);
}

RVec gradient_magnitude(const Grid& g, const Mask& m, const RVec& f) {
  RVec out(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!m(g, i, j)) continue;
      const Real fc = f[g.idx(i, j)];
      Real dx = 0.0, dy = 0.0;
      const bool xe = m(g, i + 1, j), xw = m(g, i - 1, j);
      if (xe && xw) {
        dx = (f[g.idx(i + 1, j)] - f[g.idx(i - 1, j)]) / (2.0 * g.h);
      } else if (xe) {
        dx = (f[g.idx(i + 1, j)] - fc) / g.h;
      } else if (xw) {
        dx = (fc - f[g.idx(i - 1, j)]) / g.h;
      }
      const bool yn = m(g, i, j + 1), ys = m(g, i, j - 1);
      if (yn && ys) {
        dy = (f[g.idx(i, j + 1)] - f[g.idx(i, j - 1)]) / (2.0 * g.h);
      } else if (yn) {
        dy = (f[g.idx(i, j + 1)] - fc) / g.h;
      } else if (ys) {
        dy = (fc - f[g.idx(i, j - 1)]) / g.h;
      }
      out[g.idx(i, j)] = std::hypot(dx, dy);
    }
  }
  return out;
}

Real x_norm(const Grid& g, const Mask& m, const RVec& f) {
  // test functions must vanish at the domain edge for the pairing duality
  Real trace = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!m(g, i, j)) continue;
      const bool edge = !m(g, i + 1, j) || !m(g, i - 1, j) || !m(g, i, j + 1) ||
                        !m(g, i, j - 1);
      if (edge) trace = std::max(trace, std::abs(f[g.idx(i, j)]));
    }
  }
  if (trace > 1e-8) {
    throw std::invalid_argument("x_norm: nonzero boundary trace");
  }
  const RVec gm = gradient_magnitude(g, m, f);
  return lorentz_quasinorm(profile_of_real_field(g, m, gm), 2.0, 1.0);
}

// ---- dual estimate ----

namespace {

// Analytic profile bookkeeping for disjointly supported radial gradients.
// Each component contributes |grad f| = 1/r on sigma <= r <= rho (capped-log
// bump) or |grad f| = 1/rho on r <= rho (cone, sigma = 0 marker).
struct RadialPiece {
  Real rho = 0.0, sigma = 0.0;
  bool cone = false;
};

// quasinorm(2,1) of the gradient of a sum of disjointly supported pieces,
// through the lambda form (exact factor 2).
Real tform_of_pieces(const std::vector<RadialPiece>& pieces) {
  // lambda(s) = sum of per-piece level measures
  auto lambda = [&pieces](Real s) {
    Real a = 0.0;
    for (const auto& p : pieces) {
      if (p.cone) {
        if (s < 1.0 / p.rho) a += kPi * p.rho * p.rho;
      } else {
        if (s < 1.0 / p.sigma) {
          const Real rr = std::min(p.rho, 1.0 / s);
          a += kPi * std::max(0.0, rr * rr - p.sigma * p.sigma);
        }
      }
    }
    return a;
  };
  // integration breakpoints at every 1/rho and 1/sigma
  std::vector<Real> bps{0.0};
  for (const auto& p : pieces) {
    bps.push_back(1.0 / p.rho);
    if (!p.cone && p.sigma > 0.0) bps.push_back(1.0 / p.sigma);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  const GaussRule& gr = gl16();
  Real lam = 0.0;
  for (size_t k = 0; k + 1 < bps.size(); ++k) {
    const Real a = bps[k], b = bps[k + 1];
    // geometric panels so decades-wide intervals keep quadrature accuracy
    int panels = 1;
    if (a > 0.0 && b > a) {
      panels = std::max(1, static_cast<int>(std::ceil(std::log2(b / a))));
    }
    Real lo = a;
    for (int pnl = 1; pnl <= panels; ++pnl) {
      const Real hi = (pnl == panels)
                          ? b
                          : (a > 0.0 ? a * std::pow(b / a, static_cast<Real>(pnl) / panels)
                                     : b * pnl / panels);
      lam += integrate_gl(lo, hi, gr,
                          [&lambda](Real s) { return std::sqrt(lambda(s)); });
      lo = hi;
    }
  }
  return 2.0 * lam;
}

Real cone_value(Real r, Real rho) { return std::max(0.0, 1.0 - r / rho); }

Real caplog_value(Real r, Real rho, Real sigma) {
  if (r >= rho) return 0.0;
  return std::log(rho / std::max(r, sigma));
}

}  // namespace

DualEstimate x_dual_estimate(const Grid& g, const Mask& m,
                             const std::vector<Atom>& atoms, Real max_radius) {
  DualEstimate est;
  if (atoms.empty()) return est;

  const size_t n = atoms.size();
  Real min_sep = kInf;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      min_sep = std::min(min_sep, std::hypot(atoms[i].x - atoms[j].x,
                                             atoms[i].y - atoms[j].y));
    }
  }
  // supports must stay pairwise disjoint
  Real rho_cap = max_radius;
  if (n > 1) rho_cap = std::min(rho_cap, 0.499 * min_sep);
  rho_cap = std::max(rho_cap, 4.0 * g.h);

  auto ratio_cones = [&](Real rho) {
    std::vector<RadialPiece> pieces(n, RadialPiece{rho, 0.0, true});
    Real pairing = 0.0;
    for (const auto& a : atoms) pairing += std::abs(a.mass);
    return pairing / tform_of_pieces(pieces);
  };
  auto ratio_caplog = [&](Real rho, Real sigma) {
    std::vector<RadialPiece> pieces(n, RadialPiece{rho, sigma, false});
    Real pairing = 0.0;
    for (const auto& a : atoms) pairing += std::abs(a.mass) * std::log(rho / sigma);
    return pairing / tform_of_pieces(pieces);
  };

  // geometric radius scan, then golden-section ascent
  auto golden = [](Real lo, Real hi, const std::function<Real(Real)>& f) {
    const Real gr = 0.61803398874989484820458683436563812;
    Real a = lo, b = hi;
    Real c = b - gr * (b - a), d = a + gr * (b - a);
    Real fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = f(d);
      }
    }
    return 0.5 * (a + b);
  };

  Real best = 0.0;
  std::string best_desc;
  {
    Real lo = 4.0 * g.h, hi = rho_cap;
    if (hi > lo) {
      const Real rho = golden(lo, hi, ratio_cones);
      const Real val = ratio_cones(rho);
      if (val > best) {
        best = val;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "cones rho=%.6g", rho);
        best_desc = buf;
      }
    }
  }
  {
    const Real rho = rho_cap;
    Real lo = std::max(1e-9, 1e-7 * rho), hi = 0.5 * rho;
    if (hi > lo) {
      const Real sigma = golden(lo, hi, [&](Real s) { return ratio_caplog(rho, s); });
      const Real val = ratio_caplog(rho, sigma);
      if (val > best) {
        best = val;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "caplog rho=%.6g sigma=%.6g", rho, sigma);
        best_desc = buf;
      }
    }
  }
  est.lower = best;
  est.best_test = best_desc;

  // upper bound through T = curl V with V = sum (mass/2pi) tau / r; valid
  // when the total mass vanishes so V is the full decomposition (W = 0)
  Real total = 0.0, total_abs = 0.0;
  for (const auto& a : atoms) {
    total += a.mass;
    total_abs += std::abs(a.mass);
  }
  if (std::abs(total) <= 1e-12 * std::max(1.0, total_abs)) {
    RVec vmag(g.cells(), 0.0);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (!m(g, i, j)) continue;
        Real vx = 0.0, vy = 0.0;
        for (const auto& a : atoms) {
          const Real dx = g.xc(i) - a.x, dy = g.yc(j) - a.y;
          const Real r2 = std::max(dx * dx + dy * dy, 0.0625 * g.h * g.h);
          const Real c = a.mass / (2.0 * kPi * r2);
          vx += -dy * c;
          vy += dx * c;
        }
        vmag[g.idx(i, j)] = std::hypot(vx, vy);
      }
    }
    est.upper = 0.5 * lorentz_setsup(profile_of_real_field(g, m, vmag));
    est.upper_known = true;
  }
  return est;
}

void save_profile_csv(const std::string& path, const Profile& pr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,fstar\n";
  char buf[96];
  for (size_t k = 0; k < pr.v.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", k * pr.w, pr.v[k]);
    out << buf;
  }
}

}  // namespace glx
