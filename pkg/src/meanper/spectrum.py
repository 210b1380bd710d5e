"""Zeros of the transform: seeding, Newton refinement and multiplicity counts."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import quad
from .convolver import Convolver, fourier_derivative, transform
from .errors import AmbiguousCount, InvalidArgument, NoConvergence

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 60
CONTOUR_NODES = 512
DEDUP_TOL = 1e-6

CONVERGING = 0.9
DIVERGING = 0.97


@dataclass
class SpectralPoint:
    lam: complex
    multiplicity: int
    derivs: tuple = ()
    sigma: float | None = None
    index: int = -1

    @property
    def m(self) -> int:
        return self.multiplicity - 1

    @property
    def scale(self) -> float:
        n = self.multiplicity
        return max(1.0, abs(self.derivs[n])) if len(self.derivs) > n else 1.0


@dataclass(frozen=True)
class Spectrum:
    points: tuple
    convolver: Convolver | None = None
    count_requested: int = 0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points], dtype=complex)

    def positive(self) -> list[SpectralPoint]:
        return [p for p in self.points if _sign_key(p.lam) == 0]


def _sign_key(z: complex) -> int:
    return 0 if (z.real > 0 or (z.real == 0 and z.imag >= 0)) else 1


def sort_points(points) -> tuple:
    ordered = sorted(points, key=lambda p: (round(abs(p.lam), 9), _sign_key(p.lam)))
    return tuple(replace(p, index=i) for i, p in enumerate(ordered))


def synthetic_spectrum(lambdas, multiplicities=None, sigmas=None, convolver=None) -> Spectrum:
    """Spectrum from explicitly given zeros, for diagnostics on known sets."""
    lambdas = [complex(z) for z in lambdas]
    if multiplicities is None:
        multiplicities = [1] * len(lambdas)
    if sigmas is None:
        sigmas = [None] * len(lambdas)
    pts = [SpectralPoint(lam=z, multiplicity=int(n), sigma=s) for z, n, s in zip(lambdas, multiplicities, sigmas)]
    return Spectrum(points=sort_points(pts), convolver=convolver, count_requested=len(lambdas))


def predict_zeros(T: Convolver, count: int) -> np.ndarray:
    """Asymptotic positive zero locations of ``That``.

    gegenbauer: ``pi (m + (2 alpha - 1)/4) / r``, m = 1..count
    weighted:   ``pi (3/2 + alpha + 2n) / (2r)``, n = 0..count-1
    tent:       ``2 pi m / r``, m = 1..count
    """
    if int(count) != count or count < 1:
        raise InvalidArgument(f"count must be a positive integer, got {count!r}")
    k = np.arange(int(count), dtype=float)
    if T.kind == "gegenbauer":
        return math.pi * (k + 1 + (2 * T.alpha - 1) / 4) / T.r
    if T.kind == "weighted":
        return math.pi * (1.5 + T.alpha + 2 * k) / (2 * T.r)
    return 2 * math.pi * (k + 1) / T.r


def _f_df(T: Convolver, z: complex, order: int) -> tuple[complex, complex]:
    f, df = transform(T, z, (0, 1), order=order)
    return complex(f), complex(df)


def refine_zero(
    T: Convolver,
    seed: complex,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    order: int = quad.DEFAULT_ORDER,
    multiplicity: int = 1,
) -> complex:
    """Newton iteration from ``seed`` with step halving when |That| grows.

    ``multiplicity > 1`` switches to the modified step ``n That / That'``,
    which restores quadratic convergence at a known multiple zero.
    """
    if not tol > 0:
        raise InvalidArgument(f"tol must be positive, got {tol}")
    z = complex(seed)
    f, df = _f_df(T, z, order)
    for _ in range(max_iter):
        scale = max(1.0, abs(df))
        if abs(f) <= tol * scale:
            return z
        if df == 0:
            break
        step = multiplicity * f / df
        for _halving in range(12):
            z_new = z - step
            f_new, df_new = _f_df(T, z_new, order)
            if abs(f_new) <= abs(f) or multiplicity > 1:
                break
            step *= 0.5
        z, f, df = z_new, f_new, df_new
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    raise NoConvergence(
        f"refine_zero: no convergence from seed {seed} after {max_iter} iterations "
        f"(last {z}, |That| = {abs(f):.3e})",
        last=z,
        residual=abs(f),
        seed=seed,
    )


def multiplicity(
    T: Convolver,
    lam: complex,
    radius: float = 0.5,
    nodes: int = CONTOUR_NODES,
    order: int = quad.DEFAULT_ORDER,
) -> int:
    """Zero count inside ``|z - lam| = radius`` by the argument principle.

    The contour integral of That'/That is evaluated with the trapezoid rule,
    which converges geometrically on a circle.
    """
    if not radius > 0:
        raise InvalidArgument(f"radius must be positive, got {radius}")
    u = np.exp(2j * math.pi * np.arange(nodes) / nodes)
    z = lam + radius * u
    f, df = transform(T, z, (0, 1), order=order)
    count = np.mean(df / f * radius * u)
    n = round(count.real)
    defect = abs(count - n)
    if defect >= 0.1 or n < 0:
        raise AmbiguousCount(
            f"multiplicity: winding number {count:.4f} around {lam} does not round cleanly "
            f"(defect {defect:.3f}); try a smaller radius or more nodes",
            count=complex(count),
            seed=lam,
        )
    return int(n)


def _dedup(zeros, tol: float = DEDUP_TOL):
    kept = []
    for z, seed in zeros:
        if all(abs(z - k) > tol for k, _ in kept):
            kept.append((z, seed))
    return kept


def _analyse(T: Convolver, z: complex, seed, radius: float, tol: float, order: int) -> SpectralPoint:
    try:
        n = multiplicity(T, z, radius=radius, order=order)
    except AmbiguousCount as exc:
        exc.seed = seed
        raise
    if n == 0:
        raise AmbiguousCount(f"refined point {z} from seed {seed} encloses no zero", count=0j, seed=seed)
    if n > 1:
        z = refine_zero(T, z, tol=tol, order=order, multiplicity=n)
    derivs = tuple(fourier_derivative(T, z, j, order=order).value for j in range(2 * n + 1))
    if abs(z.imag) > 1e-8:
        log.warning("zero %s from seed %s is off the real axis", z, seed)
    return SpectralPoint(lam=z, multiplicity=n, derivs=derivs)


def build_spectrum(
    T: Convolver,
    count: int,
    tol: float = NEWTON_TOL,
    order: int = quad.DEFAULT_ORDER,
    workers: int = 1,
) -> Spectrum:
    """Seed, refine, deduplicate, count, cache derivatives and mirror to -lambda."""
    seeds = predict_zeros(T, count)

    def refine(seed):
        try:
            return refine_zero(T, complex(seed), tol=tol, order=order)
        except NoConvergence as exc:
            exc.seed = seed
            raise

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        refined = list(pool.map(refine, seeds))
        zeros = _dedup(list(zip(refined, seeds)))
        locs = np.array([z for z, _ in zeros])

        def radius_for(i):
            others = np.delete(locs, i)
            gaps = np.abs(others - locs[i]) if others.size else np.array([])
            gaps = np.append(gaps, abs(2 * locs[i]))  # its own mirror image
            return min(0.5, 0.5 * float(gaps.min()))

        points = list(
            pool.map(lambda i: _analyse(T, zeros[i][0], zeros[i][1], radius_for(i), tol, order), range(len(zeros)))
        )

    mirrored = []
    for p in points:
        mirrored.append(p)
        # That is even, so That^(j)(-z) = (-1)^j That^(j)(z)
        derivs = tuple(d * (-1) ** j for j, d in enumerate(p.derivs))
        mirrored.append(SpectralPoint(lam=-p.lam, multiplicity=p.multiplicity, derivs=derivs))
    return Spectrum(points=sort_points(mirrored), convolver=T, count_requested=int(count))


def tail_ratio(partial_sums) -> float:
    """Ratio of the last to the previous quarter increment of a running sum.

    Quarters are taken on a logarithmic index scale (boundaries at N^(k/4)) so
    that a harmonic tail gives a ratio near one for every N while any
    summable power tail gives a ratio that decays with N.  A last-quarter
    increment below 1e-9 of the total is treated as converged (ratio 0), so
    round-off in an exactly finite series does not read as divergence.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = s.size
    if n < 2:
        return 0.0
    if n >= 16:
        p2 = int(round(n**0.5))
        p3 = int(round(n**0.75))
    else:
        p2 = n // 2
        p3 = (3 * n) // 4
    p2, p3 = max(p2, 1), max(p3, p2 + 1)
    last = s[n - 1] - s[p3 - 1]
    prev = s[p3 - 1] - s[p2 - 1]
    if abs(last) <= 1e-9 * abs(s[n - 1]):
        return 0.0
    if prev == 0:
        return 0.0 if last == 0 else math.inf
    return float(last / prev)


def verdict(ratio: float) -> str:
    if ratio < CONVERGING:
        return "converging"
    if ratio > DIVERGING:
        return "diverging"
    return "marginal"


@dataclass(frozen=True)
class DensityDiagnostic:
    partial_sums: list = field(default_factory=list)
    tail_ratio: float = 0.0
    verdict: str = "converging"


def zero_density_diagnostic(S: Spectrum, epsilon: float) -> DensityDiagnostic:
    """Running sums of ``n_lam / |lam|^(1 + epsilon)`` in |lambda| order."""
    if len(S) == 0:
        raise InvalidArgument("zero_density_diagnostic: empty spectrum")
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    terms = [p.multiplicity / abs(p.lam) ** (1 + epsilon) for p in S]
    sums = list(np.cumsum(terms))
    ratio = tail_ratio(sums)
    return DensityDiagnostic(partial_sums=sums, tail_ratio=ratio, verdict=verdict(ratio))
