#!/usr/bin/env python3
"""Independent reference values for the rearrangement-norm engine.

Evaluates the defining integrals of the two-index and log-weighted
rearrangement norms by adaptive quadrature on an explicit step profile,
rather than by the per-step closed forms used in the C++ implementation.
Run and freeze the printed values into tests/test_lorentz.cpp.
"""

import mpmath as mp

mp.mp.dps = 30

# step profile: value V[k] on [k*W, (k+1)*W)
V = [5.0, 3.0, 2.0, 1.0, 1.0]
W = 0.25


def fstar(t):
    k = int(mp.floor(t / W))
    if 0 <= k < len(V):
        return V[k]
    return mp.mpf(0)


def quasinorm(p, q):
    total = mp.mpf(0)
    for k in range(len(V)):
        a, b = k * W, (k + 1) * W
        total += mp.quad(lambda t: (t ** (mp.mpf(1) / p) * V[k]) ** q / t, [a, b])
    return total ** (mp.mpf(1) / q)


def quasinorm_inf(p):
    best = mp.mpf(0)
    for k in range(len(V)):
        b = (k + 1) * W
        best = max(best, V[k] * b ** (mp.mpf(1) / p))
    return best


def lz(p, q, alpha):
    total = mp.mpf(0)
    for k in range(len(V)):
        a, b = k * W, (k + 1) * W
        total += mp.quad(
            lambda t: (t ** (mp.mpf(1) / p) * mp.log(mp.e + 1 / t) ** alpha * V[k])
            ** q
            / t,
            [a, b],
        )
    return total ** (mp.mpf(1) / q)


def lz_inf(p, alpha, samples=20000):
    best = mp.mpf(0)
    for k in range(len(V)):
        a, b = k * W, (k + 1) * W
        for s in range(1, samples + 1):
            t = a + (b - a) * mp.mpf(s) / samples
            best = max(best, t ** (mp.mpf(1) / p) * mp.log(mp.e + 1 / t) ** alpha * V[k])
    return best


def setsup():
    best = mp.mpf(0)
    acc = mp.mpf(0)
    for k in range(len(V)):
        acc += V[k] * W
        best = max(best, acc / mp.sqrt((k + 1) * W))
    return best


def lambda_form():
    # int_0^inf lambda(s)^(1/2) ds for the step profile
    levels = sorted(set(V + [0.0]), reverse=True)
    total = mp.mpf(0)
    prev = None
    for s_hi, s_lo in zip(levels, levels[1:]):
        lam = sum(W for v in V if v > s_lo)
        total += (mp.mpf(s_hi) - mp.mpf(s_lo)) * mp.sqrt(lam)
    return total


print("quasinorm(2,1)      =", mp.nstr(quasinorm(2, 1), 17))
print("quasinorm(2,2)      =", mp.nstr(quasinorm(2, 2), 17))
print("l2 of profile       =", mp.nstr(mp.sqrt(sum(v * v * W for v in V)), 17))
print("quasinorm(2,inf)    =", mp.nstr(quasinorm_inf(2), 17))
print("setsup              =", mp.nstr(setsup(), 17))
print("lambda_form         =", mp.nstr(lambda_form(), 17))
print("lz(2,1,-1)          =", mp.nstr(lz(2, 1, -1), 17))
print("lz(2,2,-0.5)        =", mp.nstr(lz(2, 2, -0.5), 17))
print("lz_inf(2,-1)        =", mp.nstr(lz_inf(2, -1), 17))
print("indicator 2sqrt(m)  =", mp.nstr(2 * mp.sqrt(mp.mpf("0.37")), 17))
print("2sqrt(pi)           =", mp.nstr(2 * mp.sqrt(mp.pi), 17))
print("sqrt(pi)            =", mp.nstr(mp.sqrt(mp.pi), 17))
print("2sqrt(2pi)          =", mp.nstr(2 * mp.sqrt(2 * mp.pi), 17))
