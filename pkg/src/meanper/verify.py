"""Self-check suites run by ``meanper verify``.

Each check compares the quadrature/Newton path against an independent
oracle: Bessel closed forms and bisection on J for the Gegenbauer family,
exact Taylor series of ``2(1 - cos rz)/(r z^2)`` for the tent, and the
Gegenbauer family itself for the weighted profile at ``h = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeff import a_sequence, interpolating_entire, sigma
from .convolver import Convolver, fourier, fourier_closed_form, fourier_derivative
from .special import bessel_j
from .spectrum import build_spectrum, multiplicity, predict_zeros


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def bessel_zeros(nu: float, count: int, r: float = 1.0) -> np.ndarray:
    """First ``count`` positive zeros of ``J_nu(r z)`` by sign scan and bisection."""
    out = []
    x = 0.5
    step = 0.1
    f_prev = bessel_j(nu, x)
    while len(out) < count:
        x_next = x + step
        f_next = bessel_j(nu, x_next)
        if f_prev == 0.0:
            out.append(x)
        elif f_prev * f_next < 0:
            lo, hi, flo = x, x_next, f_prev
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = bessel_j(nu, mid)
                if fm * flo <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            out.append(0.5 * (lo + hi))
        x, f_prev = x_next, f_next
    return np.array(out) / r


def tent_taylor(r: float, m: int, order: int) -> list[float]:
    """Taylor coefficients of ``2(1 - cos rz)/(r z^2)`` at ``z = 2 pi m / r``."""
    lam = 2 * math.pi * m / r
    # 1 - cos(r d) and 1/(lam + d)^2 as power series in d
    num = [0.0] * (order + 1)
    for k in range(1, order // 2 + 1):
        num[2 * k] = (-1) ** (k + 1) * r ** (2 * k) / math.factorial(2 * k)
    inv = [(j + 1) * (-1) ** j / lam ** (j + 2) for j in range(order + 1)]
    return [2.0 / r * sum(num[i] * inv[p - i] for i in range(p + 1)) for p in range(order + 1)]


def tent_a_oracle(r: float, m: int) -> dict:
    t = tent_taylor(r, m, 4)
    a00 = 1.0 / t[2]
    a01 = -a00 * t[3] / t[2]
    return {0: [a00, a01], 1: [0.0, 1.0 / t[2]]}


def bessel_suite(T: Convolver | None = None, count: int = 20) -> list[Check]:
    T = T if (T is not None and T.kind == "gegenbauer") else Convolver.indicator()
    a, r = T.alpha, T.r
    checks = []
    worst = 0.0
    for z in np.linspace(0.1, 50, 40):
        v = fourier(T, z).value
        worst = max(worst, abs(v - fourier_closed_form(T, z)) / (1 + abs(v)))
    checks.append(Check("fourier_vs_closed_form", worst, 1e-8))

    S = build_spectrum(T, count)
    lam = np.array([p.lam.real for p in S.positive()])
    oracle = bessel_zeros(a, count, r)
    checks.append(Check("zeros_vs_bessel_bisection", float(np.max(np.abs(lam - oracle))), 1e-9))
    checks.append(Check("all_simple", float(sum(p.multiplicity != 1 for p in S)), 0.0))

    # That'(z) = -C r x^{-a} J_{a+1}(x), x = r z, C = sqrt(pi) Gamma(a + 1/2) 2^a r^{2a}
    C = math.sqrt(math.pi) * math.gamma(a + 0.5) * 2**a * r ** (2 * a)
    worst = 0.0
    for p in S.positive():
        x = r * p.lam.real
        exact = 1.0 / abs(C * r * x ** (-a) * bessel_j(a + 1, x))
        worst = max(worst, abs(sigma(p) - exact) / exact)
    checks.append(Check("sigma_vs_bessel_derivative", worst, 1e-8))
    return checks


def tent_suite(T: Convolver | None = None) -> list[Check]:
    T = T if (T is not None and T.kind == "tent") else Convolver.tent()
    r = T.r
    checks = []
    lam0 = 2 * math.pi / r
    checks.append(Check("multiplicity_at_2pi_over_r", abs(multiplicity(T, lam0, 0.5) - 2), 0.0))
    S = build_spectrum(T, 3)
    checks.append(Check("all_double", float(sum(p.multiplicity != 2 for p in S)), 0.0))
    sp = S[0]
    oracle = tent_a_oracle(r, 1)
    for eta in (0, 1):
        got = a_sequence(sp, eta)
        err = max(abs(g - o) / max(1.0, abs(o)) for g, o in zip(got, oracle[eta]))
        checks.append(Check(f"a_sequence_eta{eta}_vs_taylor", err, 1e-6))
    h = 1e-3
    for eta in (0, 1):
        z = sp.lam + np.array([-h, 0.0, h])
        v = interpolating_entire(sp, eta, z, T)
        d0 = v[1]
        d1 = (v[2] - v[0]) / (2 * h)
        err = max(abs(d0 - (1.0 if eta == 0 else 0.0)), abs(d1 - (1.0 if eta == 1 else 0.0)))
        checks.append(Check(f"taylor_match_eta{eta}", err, 1e-6))
    return checks


def weighted_suite(T: Convolver | None = None) -> list[Check]:
    T = T if (T is not None and T.kind == "weighted") else Convolver.weighted(0.5, [1.0, 1.0])
    checks = []
    flat = Convolver.weighted(T.alpha, [1.0], r=T.r)
    geg = Convolver.gegenbauer(T.alpha, r=T.r)
    worst = 0.0
    for z in (0.0, 1.3, 7.5, 40.0):
        for n in range(4):
            worst = max(worst, abs(fourier_derivative(flat, z, n).value - fourier_derivative(geg, z, n).value))
    checks.append(Check("h1_matches_gegenbauer", worst, 1e-12))

    S = build_spectrum(T, 50)
    seeds = predict_zeros(T, 50)
    lam = np.array([p.lam.real for p in S.positive()])
    n = np.arange(50)
    scaled = (n * np.abs(seeds - lam))[5:51]
    growth = float(scaled.max() / scaled[0]) - 1.0
    checks.append(Check("seed_error_times_n_growth", max(growth, 0.0), 0.2))
    return checks


SUITES = {"bessel": bessel_suite, "tent": tent_suite, "weighted": weighted_suite}


def run_suite(name: str, T: Convolver | None = None) -> list[Check]:
    return SUITES[name](T)
