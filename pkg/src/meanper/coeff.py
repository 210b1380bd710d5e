"""Recursion coefficients, biorthogonal kernels and coefficient extraction.

For a zero ``lam`` of multiplicity ``n`` the sequence ``a_0 .. a_{n-1}`` is
chosen so that

    a(z) = sum_j a_j That(z) / (z - lam)^(n - j)

has Taylor coefficients ``delta_{q, eta} / q!`` at ``lam`` for ``q < n``.  The
kernel ``K`` with transform ``a(z)`` (for eta = 0) is supported on [-r, r];
convolving a mean-periodic ``f`` with it leaves only the ``lam`` component,
``f * K = sum_eta c_eta (it)^eta exp(i lam t)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import quad
from .convolver import Convolver, _theta_nodes, transform
from .errors import (
    DegenerateZero,
    DomainError,
    InconsistentProbe,
    InsufficientData,
    InvalidArgument,
    UnsupportedMultiplicity,
)
from .spectrum import SpectralPoint, Spectrum

LOCAL_RADIUS = 0.25
PROBE_TOLERANCE = 1e-4
MAX_KERNEL_MULTIPLICITY = 2


# -- function specifications -------------------------------------------------


@dataclass(frozen=True)
class ExponentialSum:
    """``f(t) = sum c (i t)^m exp(i lam t)`` over the given terms."""

    terms: tuple
    half_width: float | None = None
    smoothness_k: int | None = None

    def __post_init__(self):
        terms = tuple((complex(lam), int(m), complex(c)) for lam, m, c in self.terms)
        keys = [(lam, m) for lam, m, _ in terms]
        if len(set(keys)) != len(keys):
            raise InvalidArgument("ExponentialSum: duplicate (lambda, m) terms")
        if any(m < 0 for _, m, _ in terms):
            raise InvalidArgument("ExponentialSum: negative monomial power")
        if self.half_width is not None and not self.half_width > 0:
            raise InvalidArgument(f"half_width must be positive, got {self.half_width}")
        object.__setattr__(self, "terms", terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for lam, m, c in self.terms:
            out += c * (1j * t) ** m * np.exp(1j * lam * t)
        return out

    @property
    def bandwidth(self) -> float:
        return max((abs(lam.real) for lam, _, _ in self.terms), default=0.0)

    @property
    def is_real(self) -> bool:
        table = {(lam, m): c for lam, m, c in self.terms}
        for (lam, m), c in table.items():
            # conj((it)^m e^{i lam t}) = (-1)^m (it)^m e^{-i conj(lam) t}
            partner = table.get((-lam.conjugate(), m), 0j)
            if abs(partner - (-1) ** m * c.conjugate()) > 1e-14 * (1 + abs(c)):
                return False
        return True

    def derivative(self, order: int = 1) -> "ExponentialSum":
        terms = dict(((lam, m), c) for lam, m, c in self.terms)
        for _ in range(order):
            nxt: dict = {}
            for (lam, m), c in terms.items():
                nxt[(lam, m)] = nxt.get((lam, m), 0j) + 1j * lam * c
                if m > 0:
                    nxt[(lam, m - 1)] = nxt.get((lam, m - 1), 0j) + 1j * m * c
            terms = nxt
        return ExponentialSum(
            tuple((lam, m, c) for (lam, m), c in terms.items() if c != 0),
            half_width=self.half_width,
            smoothness_k=self.smoothness_k,
        )

    def apply_polynomial(self, coeffs) -> "ExponentialSum":
        """``p(d/dt) f`` for ``p(x) = sum coeffs[k] x^k``."""
        acc: dict = {}
        for k, pk in enumerate(coeffs):
            if pk == 0:
                continue
            for lam, m, c in self.derivative(k).terms if k else self.terms:
                acc[(lam, m)] = acc.get((lam, m), 0j) + pk * c
        return ExponentialSum(
            tuple((lam, m, c) for (lam, m), c in acc.items() if c != 0),
            half_width=self.half_width,
            smoothness_k=self.smoothness_k,
        )


@dataclass(frozen=True)
class Sampled:
    """Grid samples of ``f`` on [-b, b], interpolated by a cubic spline."""

    grid: np.ndarray
    values: np.ndarray
    smoothness_k: int = 0
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size < 4 or grid.shape != values.shape:
            raise InvalidArgument("Sampled: need matching 1-d grid and values with at least 4 points")
        if np.any(np.diff(grid) <= 0):
            raise InvalidArgument("Sampled: grid must be strictly increasing")
        if abs(grid[0] + grid[-1]) > 1e-12 * max(1.0, grid[-1]) or grid[-1] <= 0:
            raise InvalidArgument(f"Sampled: grid must span a symmetric interval [-b, b], got [{grid[0]}, {grid[-1]}]")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("Sampled: values must be finite")
        if int(self.smoothness_k) < 0:
            raise InvalidArgument("Sampled: smoothness_k must be nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(grid, values))

    @classmethod
    def from_function(cls, func, half_width: float, size: int = 801, smoothness_k: int = 0) -> "Sampled":
        grid = np.linspace(-half_width, half_width, size)
        return cls(grid, func(grid), smoothness_k=smoothness_k)

    @property
    def half_width(self) -> float:
        return float(self.grid[-1])

    @property
    def bandwidth(self) -> float:
        return 0.0

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        b = self.half_width
        if t.size and (t.min() < -b * (1 + 1e-12) or t.max() > b * (1 + 1e-12)):
            raise DomainError(f"Sampled: evaluation outside the sampled interval [-{b}, {b}]")
        return self._spline(np.clip(t, -b, b))


FunctionSpec = ExponentialSum | Sampled


# -- recursion ---------------------------------------------------------------


def a_sequence(sp: SpectralPoint, eta: int) -> list[complex]:
    """``a_0 .. a_{n-1}`` for the given ``eta`` from cached derivatives."""
    n = sp.multiplicity
    if not 0 <= eta < n:
        raise InvalidArgument(f"eta must lie in [0, {n - 1}], got {eta}")
    d = sp.derivs
    if len(d) < 2 * n:
        raise InvalidArgument(f"spectral point needs derivatives through order {2 * n - 1}, has {len(d)}")
    lead = d[n]
    if abs(lead) < 1e-12 * sp.scale:
        raise DegenerateZero(f"That^({n})({sp.lam}) = {lead} is numerically zero")
    pref = math.factorial(n) / lead
    a: list[complex] = []
    for j in range(n):
        acc = (1.0 if j == eta else 0.0) / math.factorial(j)
        for s in range(j):
            p = n - s + j
            acc -= a[s] * d[p] / math.factorial(p)
        a.append(complex(pref * acc))
    return a


def sigma(sp: SpectralPoint) -> float:
    """Sum of ``|a_j|`` over the eta = 0 sequence; cached on the point."""
    value = float(sum(abs(a) for a in a_sequence(sp, 0)))
    sp.sigma = value
    return value


def _phi(n: int, w: np.ndarray) -> np.ndarray:
    """``(e^w - sum_{k<n} w^k/k!) / w^n`` without cancellation for small w."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) <= 1.0
    if np.any(small):
        ws = w[small]
        acc = np.zeros_like(ws)
        term = np.full_like(ws, 1.0 / math.factorial(n))
        for k in range(40):
            acc += term
            term = term * ws / (k + n + 1)
        out[small] = acc
    big = ~small
    if np.any(big):
        wb = w[big]
        head = sum(wb**k / math.factorial(k) for k in range(n))
        out[big] = (np.exp(wb) - head) / wb**n
    return out


def _remainder(T: Convolver, sp: SpectralPoint, z: np.ndarray, order: int) -> np.ndarray:
    """``That(z) / (z - lam)^n`` near ``lam`` via the integral Taylor remainder."""
    n = sp.multiplicity
    lam = sp.lam
    nodes = quad.oscillatory_order(abs(lam.real) * T.r, order, extra=n + T.poly_degree)
    theta, w = _theta_nodes(T, nodes)
    t = T.r * np.cos(theta)
    base = w * (-1j * t) ** n * np.exp(-1j * lam * t)
    dz = z - lam
    return np.array([np.dot(base, _phi(n, -1j * d * t)) for d in dz.ravel()]).reshape(z.shape)


def interpolating_entire(
    sp: SpectralPoint, eta: int, z, T: Convolver, order: int = quad.DEFAULT_ORDER
):
    """Evaluate ``sum_j a_j That(z) / (z - lam)^(n - j)``.

    Away from ``lam`` the sum is formed literally.  Within ``LOCAL_RADIUS`` the
    removable singularity is handled by writing ``That(z) = (z - lam)^n R(z)``
    with ``R`` the integral form of the Taylor remainder at ``lam``.
    """
    a = a_sequence(sp, eta)
    n = sp.multiplicity
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    dz = z - sp.lam
    near = np.abs(dz) < LOCAL_RADIUS
    if np.any(~near):
        zf = z[~near]
        F = transform(T, zf, (0,), order=order)[0]
        d = dz[~near]
        out[~near] = sum(a[j] * F / d ** (n - j) for j in range(n))
    if np.any(near):
        d = dz[near]
        R = _remainder(T, sp, z[near], order)
        out[near] = R * sum(a[j] * d**j for j in range(n))
    return complex(out[0]) if scalar else out


# -- kernels -----------------------------------------------------------------


@dataclass(frozen=True)
class BiorthogonalKernel:
    lam: complex
    grid: np.ndarray
    values: np.ndarray
    a0: complex


def kernel_values(T: Convolver, sp: SpectralPoint, s) -> np.ndarray:
    """Samples of the eta = 0 kernel at increasing points ``s`` in [-r, r]."""
    n = sp.multiplicity
    if n > MAX_KERNEL_MULTIPLICITY:
        raise UnsupportedMultiplicity(f"kernel construction supports multiplicity <= 2, got {n} at {sp.lam}")
    s = np.asarray(s, dtype=float)
    lam = sp.lam
    a = a_sequence(sp, 0)
    phase = np.exp(1j * lam * s)
    g0 = quad.cumulative_weighted(T, lam, s)
    k1 = 1j * phase * g0
    if n == 1:
        return a[0] * k1
    g1 = quad.cumulative_weighted(T, lam, s, power=1)
    k2 = -phase * (s * g0 - g1)
    return a[0] * k2 + a[1] * k1


def build_kernel(T: Convolver, sp: SpectralPoint, grid_size: int = 801) -> BiorthogonalKernel:
    if grid_size < 2:
        raise InvalidArgument(f"grid_size must be at least 2, got {grid_size}")
    grid = np.linspace(-T.r, T.r, int(grid_size))
    values = kernel_values(T, sp, grid)
    return BiorthogonalKernel(lam=sp.lam, grid=grid, values=values, a0=a_sequence(sp, 0)[0])


# -- extraction --------------------------------------------------------------


@dataclass
class CoefficientTable:
    entries: dict
    spectrum: Spectrum
    convolver: Convolver | None = None
    source: object = None
    spreads: dict = field(default_factory=dict)

    def get(self, index: int, eta: int = 0) -> complex:
        return self.entries.get((index, eta), 0j)

    def max_abs(self, index: int) -> float:
        p = self.spectrum[index]
        return max(abs(self.get(index, eta)) for eta in range(p.multiplicity))

    def __len__(self):
        return len(self.entries)

    def rows(self):
        """(index, lambda, eta, c, spread) in spectral order."""
        for (idx, eta), c in sorted(self.entries.items()):
            yield idx, self.spectrum[idx].lam, eta, c, self.spreads.get(idx, 0.0)


def default_probes(f, T: Convolver) -> list[float]:
    b = f.half_width if f.half_width is not None else 2 * T.r
    off = 0.5 * (b - T.r)
    return [-off, 0.0, off] if off > 0 else [0.0]


def _check_probes(f, T: Convolver, probes) -> None:
    b = f.half_width
    if b is None:
        return
    for t in probes:
        if abs(t) + T.r > b * (1 + 1e-12):
            raise DomainError(f"probe {t} is outside (a,b)_T: [{t} - {T.r}, {t} + {T.r}] leaves [-{b}, {b}]")


def _coefficients_at(f, T: Convolver, sp: SpectralPoint, probes: np.ndarray, tolerance: float):
    n = sp.multiplicity
    if len(probes) < n:
        raise InvalidArgument(f"need at least {n} probes for multiplicity {n} at {sp.lam}")
    panels = math.ceil(2 * (abs(sp.lam.real) + f.bandwidth) * T.r / math.pi) + 8
    panels += panels % 2  # keeps pi/2 on a panel boundary
    breaks = quad.panel_breaks(0.0, math.pi, panels, extra=T.theta_kinks)
    theta, w = quad.composite_nodes(breaks)
    theta, w = theta.ravel()[::-1], w.ravel()[::-1]  # s = r cos(theta) increasing
    s = T.r * np.cos(theta)
    jac = w * T.r * np.sin(theta)
    K = kernel_values(T, sp, s)
    conv = np.array([np.dot(jac * K, f(tp - s)) for tp in probes])
    lam = sp.lam
    if n == 1:
        v = conv * np.exp(-1j * lam * probes)
        c = v.mean()
        spread = float(np.max(np.abs(v - c)))
        coeffs = [complex(c)]
    else:
        basis = np.column_stack([np.exp(1j * lam * probes), 1j * probes * np.exp(1j * lam * probes)])
        sol, *_ = np.linalg.lstsq(basis, conv, rcond=None)
        spread = float(np.max(np.abs(basis @ sol - conv))) if len(probes) > n else 0.0
        coeffs = [complex(x) for x in sol]
    size = max(abs(c) for c in coeffs)
    if spread > tolerance * (1 + size):
        raise InconsistentProbe(
            f"f not mean-periodic for T: probe spread {spread:.3e} at lambda = {lam} exceeds "
            f"{tolerance:g} * (1 + |c|)",
            spread=spread,
            index=sp.index,
        )
    return coeffs, spread


def extract_coefficients(
    f,
    T: Convolver,
    S: Spectrum,
    probes=None,
    tolerance: float = PROBE_TOLERANCE,
    workers: int = 1,
) -> CoefficientTable:
    """``c_{lam, eta}(T, f)`` for every point of ``S`` from ``f * K`` at the probes."""
    if probes is None:
        probes = default_probes(f, T)
    probes = np.asarray(probes, dtype=float)
    _check_probes(f, T, probes)

    def one(sp):
        return _coefficients_at(f, T, sp, probes, tolerance)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(one, S.points))
    entries = {}
    spreads = {}
    for sp, (coeffs, spread) in zip(S.points, results):
        for eta, c in enumerate(coeffs):
            entries[(sp.index, eta)] = c
        spreads[sp.index] = spread
    return CoefficientTable(entries=entries, spectrum=S, convolver=T, source=f, spreads=spreads)


# -- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    slope: float
    intercept: float
    max_residual: float
    count: int


def decay_report(table: CoefficientTable, S: Spectrum, k: int) -> DecayReport:
    """Fit ``log(max|c| |lam|^k / sigma)`` against ``log|lam|``.

    Only the upper half of the spectrum (by |lam|) enters the fit.  The slope
    estimates the exponent left over after the k-derivative gain; it is a
    diagnostic, not a gate.
    """
    pts = [p for p in S.points if any((p.index, e) in table.entries for e in range(p.multiplicity))]
    if len(pts) < 4:
        raise InsufficientData(f"decay_report: need at least 4 spectral points, got {len(pts)}")
    pts = sorted(pts, key=lambda p: abs(p.lam))
    pts = pts[len(pts) // 2 :]
    xs, ys = [], []
    for p in pts:
        c = table.max_abs(p.index)
        sig = p.sigma if p.sigma is not None else sigma(p)
        if c == 0 or sig == 0:
            continue
        xs.append(math.log(abs(p.lam)))
        ys.append(math.log(c * abs(p.lam) ** k / sig))
    if len(xs) < 2:
        raise InsufficientData("decay_report: too few nonzero coefficients in the upper half")
    xs, ys = np.array(xs), np.array(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return DecayReport(float(slope), float(intercept), float(np.max(np.abs(resid))), len(xs))
