"""Series synthesis, convergence functionals, gates and the extension pipeline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import quad
from .coeff import CoefficientTable, extract_coefficients, sigma
from .convolver import Convolver, _theta_nodes
from .errors import InvalidArgument
from .spectrum import SpectralPoint, Spectrum, build_spectrum, tail_ratio, verdict

log = logging.getLogger(__name__)

MAX_SYNTH_DERIVATIVE = 6


def e_monomial(z: complex, m: int, t):
    """``(i t)^m exp(i z t)``."""
    t = np.asarray(t, dtype=float)
    out = (1j * t) ** m * np.exp(1j * z * t)
    return complex(out) if out.ndim == 0 else out


def b_weight(R: float, sp: SpectralPoint, q: int) -> float:
    m = sp.m
    if R > 1:
        return float(R**m)
    if R == 1:
        return float(m + 1)
    return float(min(q + 1, m + 1))


@dataclass(frozen=True)
class GateResult:
    sup_value: float
    passed: bool


def lemma_gate(S: Spectrum, N: float, R: float, r: float) -> GateResult:
    """``sup_{|lam| > N} (|Im lam| + m) / ln(2 + |lam|)`` against ``1 / (R - r)``."""
    if not R > r:
        raise InvalidArgument(f"lemma_gate: need R > r, got R={R}, r={r}")
    if len(S) == 0:
        raise InvalidArgument("lemma_gate: empty spectrum")
    vals = [(abs(p.lam.imag) + p.m) / math.log(2 + abs(p.lam)) for p in S if abs(p.lam) > N]
    if not vals:
        log.warning("lemma_gate: no spectral points with |lambda| > %s; sup taken as 0", N)
    sup = max(vals, default=0.0)
    return GateResult(sup_value=float(sup), passed=bool(sup < 1.0 / (R - r)))


@dataclass(frozen=True)
class Functional:
    partial_sums: list
    terms: list
    tail_ratio: float

    @property
    def verdict(self) -> str:
        return verdict(self.tail_ratio)


def convergence_functional(
    table: CoefficientTable, S: Spectrum, R: float, q: float, use_sigma: bool = False
) -> Functional:
    """Running sums of ``max_eta |c| B(R, lam, q) (|lam| + 1)^q exp(R |Im lam|)``.

    With ``use_sigma`` each term also carries ``sigma_lam``; the caller then
    passes the full exponent of ``(|lam| + 1)`` as ``q``.
    """
    if table is None or len(table) == 0 or len(S) == 0:
        return Functional(partial_sums=[0.0], terms=[], tail_ratio=0.0)
    terms = []
    for p in sorted(S.points, key=lambda p: p.index):
        t = table.max_abs(p.index) * b_weight(R, p, int(math.floor(q))) * (abs(p.lam) + 1) ** q
        t *= math.exp(R * abs(p.lam.imag))
        if use_sigma:
            t *= p.sigma if p.sigma is not None else sigma(p)
        terms.append(float(t))
    sums = [float(x) for x in np.cumsum(terms)]
    return Functional(partial_sums=sums, terms=terms, tail_ratio=tail_ratio(sums))


def _largest_below(x: float) -> int | None:
    q = math.ceil(round(x, 12)) - 1
    return q if q >= 0 else None


def smoothness_budget(k: int, alpha: float) -> int | None:
    """Largest integer ``q >= 0`` with ``q < k - (alpha + 3/2)``."""
    if k < 0:
        raise InvalidArgument(f"k must be nonnegative, got {k}")
    return _largest_below(k - (alpha + 1.5))


def theorem_budget(k: int, gamma: float) -> int | None:
    """Largest integer ``q >= 0`` with ``q < k - 2 - gamma``."""
    if k < 0:
        raise InvalidArgument(f"k must be nonnegative, got {k}")
    if not gamma > 0:
        raise InvalidArgument(f"gamma must be positive, got {gamma}")
    return _largest_below(k - 2 - gamma)


def _monomial_derivative(lam: complex, eta: int, d: int, t: np.ndarray) -> np.ndarray:
    # d/dt^d [(it)^eta e^{i lam t}] by the product rule
    out = np.zeros(t.shape, dtype=complex)
    e = np.exp(1j * lam * t)
    for k in range(min(d, eta) + 1):
        poly = (1j**eta) * math.factorial(eta) / math.factorial(eta - k) * t ** (eta - k)
        out += math.comb(d, k) * poly * (1j * lam) ** (d - k)
    return out * e


def synthesize(table: CoefficientTable, S: Spectrum, R: float, grid_size: int, d: int = 0):
    """``d``-th derivative of ``sum c_{lam,eta} (it)^eta e^{i lam t}`` on [-R, R].

    Terms are added in spectral order, so each +lam is followed by its -lam
    partner.  Returns ``(grid, samples)``.
    """
    if not 0 <= d <= MAX_SYNTH_DERIVATIVE:
        raise InvalidArgument(f"derivative order must lie in [0, {MAX_SYNTH_DERIVATIVE}], got {d}")
    if grid_size < 2:
        raise InvalidArgument(f"grid_size must be at least 2, got {grid_size}")
    t = np.linspace(-R, R, int(grid_size))
    out = np.zeros(t.shape, dtype=complex)
    if table is None:
        return t, out
    for p in sorted(S.points, key=lambda p: p.index):
        for eta in range(p.multiplicity):
            c = table.entries.get((p.index, eta))
            if c is None or c == 0:
                continue
            out += c * _monomial_derivative(p.lam, eta, d, t)
    return t, out


def residual(grid, samples, T: Convolver, probes, order: int = quad.DEFAULT_ORDER) -> float:
    """``sup_p |int f_ext(t_p - s) T(s) ds|`` with ``f_ext`` a cubic spline of the samples."""
    grid = np.asarray(grid, dtype=float)
    samples = np.asarray(samples, dtype=complex)
    lo, hi = grid[0] + T.r, grid[-1] - T.r
    probes = np.asarray(probes, dtype=float)
    if probes.size == 0:
        return 0.0
    if probes.min() <= lo - 1e-12 or probes.max() >= hi + 1e-12:
        raise InvalidArgument(f"residual: probes must lie within ({lo}, {hi})")
    spline = CubicSpline(grid, samples)
    # resolve the oscillation of the samples: Nyquist of the sample grid
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    theta, weight = _theta_nodes(T, quad.oscillatory_order(math.pi / h * T.r, order))
    s = T.r * np.cos(theta)
    vals = [abs(np.dot(weight, spline(tp - s))) for tp in probes]
    return float(max(vals))


@dataclass(frozen=True)
class ExtensionRequest:
    R: float
    q: int = 0
    grid_size: int = 801
    cutoff: int = 64
    k: int | None = None
    gamma: float | None = None
    quad_order: int = quad.DEFAULT_ORDER
    probes: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if self.grid_size < 2:
            raise InvalidArgument(f"grid_size must be at least 2, got {self.grid_size}")
        if self.q < 0:
            raise InvalidArgument(f"q must be nonnegative, got {self.q}")
        if self.cutoff < 1:
            raise InvalidArgument(f"cutoff must be positive, got {self.cutoff}")


@dataclass
class ExtensionReport:
    R: float
    r: float
    q: int
    k: int | None
    gamma: float | None
    lemma_sup: float
    lemma_pass: bool
    budget_q: int | None
    theorem_q: int | None
    functional_partial_sums: list
    functional_terms: list
    tail_ratio: float
    functional_verdict: str
    residual_sup: float
    restriction_error: float
    grid: np.ndarray
    samples: np.ndarray
    spectrum: Spectrum = field(repr=False)
    table: CoefficientTable = field(repr=False)

    @property
    def warnings(self) -> list[str]:
        out = []
        if not self.lemma_pass:
            out.append(f"lemma gate failed: sup {self.lemma_sup:.6g} >= 1/(R - r) = {1 / (self.R - self.r):.6g}")
        if self.functional_verdict != "converging":
            out.append(f"convergence functional {self.functional_verdict} (tail ratio {self.tail_ratio:.6g})")
        return out

    def summary(self) -> dict:
        return {
            "R": self.R,
            "r": self.r,
            "q": self.q,
            "k": self.k,
            "gamma": self.gamma,
            "lemma_sup": self.lemma_sup,
            "lemma_pass": self.lemma_pass,
            "budget_q": self.budget_q,
            "theorem_q": self.theorem_q,
            "tail_ratio": self.tail_ratio,
            "functional_verdict": self.functional_verdict,
            "residual_sup": self.residual_sup,
            "restriction_error": self.restriction_error,
            "spectrum_size": len(self.spectrum),
            "warnings": self.warnings,
        }


def default_residual_probes(R: float, r: float, count: int = 9) -> np.ndarray:
    span = 0.9 * (R - r)
    return np.linspace(-span, span, count)


def extend(f, T: Convolver, req: ExtensionRequest) -> ExtensionReport:
    """Extend ``f`` from its own interval to [-R, R] and record every gate.

    Gates are verdicts only; a failing gate never stops the run.
    """
    b = f.half_width
    if b is None:
        raise InvalidArgument("extend: f needs a finite half-width")
    if not b > T.r:
        raise InvalidArgument(f"extend: f's half-width {b} must exceed r(T) = {T.r}")
    if not req.R > b:
        raise InvalidArgument(f"extend: target R = {req.R} must exceed f's half-width {b}")

    S = build_spectrum(T, req.cutoff, order=req.quad_order, workers=req.workers)
    table = extract_coefficients(f, T, S, probes=req.probes, workers=req.workers)

    gate = lemma_gate(S, 0.0, req.R, b)
    func = convergence_functional(table, S, req.R, req.q)
    k = req.k if req.k is not None else f.smoothness_k
    gamma = req.gamma
    if gamma is None and T.alpha is not None:
        gamma = T.alpha + 0.5
    budget = smoothness_budget(k, T.alpha) if (k is not None and T.alpha is not None) else None
    thm = theorem_budget(k, gamma) if (k is not None and gamma is not None and gamma > 0) else None

    grid, samples = synthesize(table, S, req.R, req.grid_size)
    inside = np.abs(grid) <= b
    restriction = float(np.max(np.abs(samples[inside] - f(grid[inside])))) if np.any(inside) else 0.0
    res = residual(grid, samples, T, default_residual_probes(req.R, T.r), order=req.quad_order)
    return ExtensionReport(
        R=req.R,
        r=b,
        q=req.q,
        k=k,
        gamma=gamma,
        lemma_sup=gate.sup_value,
        lemma_pass=gate.passed,
        budget_q=budget,
        theorem_q=thm,
        functional_partial_sums=func.partial_sums,
        functional_terms=func.terms,
        tail_ratio=func.tail_ratio,
        functional_verdict=func.verdict,
        residual_sup=res,
        restriction_error=restriction,
        grid=grid,
        samples=samples,
        spectrum=S,
        table=table,
    )
