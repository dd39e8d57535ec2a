#!/usr/bin/env python3
"""Closed-form reference values for the elliptic solver tests.

Every value below is computed from an independent analytic route (radial
Bessel solutions of the screened Poisson equation on the unit disk, plain
log potentials for the Poisson problem on a disk), evaluated with mpmath
at 30 digits and frozen to 17 significant digits for the C++ tests.

Run:  python3 tools/oracles/elliptic_oracle.py
"""

import mpmath as mp

mp.mp.dps = 30


def emit(name, value):
    print(f"{name} = {mp.nstr(mp.mpf(value), 17)}")


# ---------------------------------------------------------------------------
# xi0 on the unit disk: -xi'' - xi'/r + xi = -1, xi(1) = 0, regular at 0.
# Solution: xi(r) = I0(r)/I0(1) - 1.
# ---------------------------------------------------------------------------
I0_1 = mp.besseli(0, 1)
I1_1 = mp.besseli(1, 1)
emit("I0_1", I0_1)
emit("xi0_center", 1 / I0_1 - 1)
for r in ("0.15", "0.35", "0.55", "0.75"):
    emit(f"xi0_r{r.replace('.', '')}", mp.besseli(0, mp.mpf(r)) / I0_1 - 1)

# Half squared H1 norm via the multiplicative identity
# int |grad xi|^2 + xi^2 = -int xi  (multiply the equation by xi):
# J0 = -(1/2) int xi = pi (1/2 - I1(1)/I0(1))  using int_0^1 r I0(r) dr = I1(1).
emit("J0_disk", mp.pi * (mp.mpf(1) / 2 - I1_1 / I0_1))

# Hessian of xi0 at the center: I0(r) = 1 + r^2/4 + ..., so
# D^2 xi0(0) = Id / (2 I0(1)).
emit("xi0_hess_xx", 1 / (2 * I0_1))

# ---------------------------------------------------------------------------
# Green function of (-lap + 1) with zero Dirichlet data on the unit disk,
# pole at the center, normalized source 2*pi*delta:
#   G(r) = K0(r) - (K0(1)/I0(1)) I0(r)
# Smooth part S(x) = G + log|x|; S(0) = log 2 - euler_gamma - K0(1)/I0(1).
# ---------------------------------------------------------------------------
K0_1 = mp.besselk(0, 1)
ratio = K0_1 / I0_1
emit("K0_1", K0_1)
for r in ("0.25", "0.5"):
    rr = mp.mpf(r)
    emit(f"green_center_r{r.replace('.', '')}",
         mp.besselk(0, rr) - ratio * mp.besseli(0, rr))
emit("green_smooth_center", mp.log(2) - mp.euler - ratio)
emit("green_smooth_r05",
     mp.besselk(0, mp.mpf("0.5")) + mp.log(mp.mpf("0.5"))
     - ratio * mp.besseli(0, mp.mpf("0.5")))
emit("two_pi", 2 * mp.pi)

# ---------------------------------------------------------------------------
# Hole function on the annulus rho < r < 1 (single central hole, degree d=1):
#   H = a I0(r) + b K0(r),  H(1) = 0,  H'(rho) = -d/rho
# (the flux condition: integral of dH/dnu over the hole boundary is 2*pi*d
# with nu the normal of the working domain, pointing into the hole).
# Constant c1 = H(rho); energy identity gives int |grad H|^2 + H^2 = 2*pi*c1.
# ---------------------------------------------------------------------------
rho = mp.mpf("0.25")
d = mp.mpf(1)
# a I0(1) + b K0(1) = 0 ;  a I1(rho) - b K1(rho) = -d/rho
A = mp.matrix([[mp.besseli(0, 1), mp.besselk(0, 1)],
               [mp.besseli(1, rho), -mp.besselk(1, rho)]])
rhsv = mp.matrix([0, -d / rho])
ab = mp.lu_solve(A, rhsv)
c1 = ab[0] * mp.besseli(0, rho) + ab[1] * mp.besselk(0, rho)
emit("hole_c1_rho025", c1)
emit("hole_energy_rho025", 2 * mp.pi * d * c1)

# ---------------------------------------------------------------------------
# U* on B(0,K), K=4: Delta U = 2 pi mu, U(K)=0.
# mu uniform on the unit disk: U(r) = log(1/K) + (r^2-1)/2 for r<=1,
#                              U(r) = log(r/K) for r>=1.
# mu = delta at 0: U(r) = log(r/K) exactly.
# ---------------------------------------------------------------------------
K = mp.mpf(4)
emit("ustar_uniform_center", mp.log(1 / K) - mp.mpf("0.5"))
emit("ustar_uniform_r05", mp.log(1 / K) + (mp.mpf("0.25") - 1) / 2)
emit("ustar_uniform_r2", mp.log(2 / K))
emit("ustar_delta_r05", mp.log(mp.mpf("0.5") / K))
emit("ustar_delta_r1", mp.log(1 / K))
