"""Gauss-Legendre rules and the weighted integrals built on them.

Every integral over the support [-r, r] goes through the cosine substitution
``t = r cos(theta)``.  The algebraic endpoint weight ``(r^2 - t^2)^(alpha - 1/2)``
together with the Jacobian ``r sin(theta)`` becomes ``r^(2 alpha) sin(theta)^(2 alpha)``.
For integer ``2 alpha`` that density is smooth and plain Gauss-Legendre panels
apply.  Otherwise pieces touching theta = 0 or pi use short Gauss-Jacobi rules
that absorb the endpoint power exactly, and nearby panels are graded
geometrically toward the endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .errors import InvalidArgument

DEFAULT_ORDER = 256
PANEL_NODES = 20


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, g: Callable[[np.ndarray], np.ndarray], a: float = -1.0, b: float = 1.0):
        """Apply the rule to ``g`` on [a, b]."""
        half = 0.5 * (b - a)
        x = half * self.nodes + 0.5 * (a + b)
        return half * np.dot(self.weights, g(x))


@lru_cache(maxsize=256)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    # leggauss is symmetric only up to rounding; force it exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order: int) -> QuadratureRule:
    """Return the ``order``-point Gauss-Legendre rule on [-1, 1]."""
    if int(order) != order or order < 1:
        raise InvalidArgument(f"gauss_legendre: order must be a positive integer, got {order!r}")
    x, w = _legendre(int(order))
    return QuadratureRule(nodes=x, weights=w, order=int(order))


def oscillatory_order(omega: float, order: int = DEFAULT_ORDER, extra: int = 0) -> int:
    """Node count for a single-panel rule on [0, pi] resolving ``exp(i omega cos theta)``.

    The rule needs roughly ``pi/4 * omega`` nodes plus a transition band that
    grows like ``omega^(1/3)``.
    """
    omega = abs(omega)
    needed = math.ceil(0.25 * math.pi * omega + 10.0 * omega ** (1.0 / 3.0) + 24 + extra)
    # round up to a coarse ladder so the cached rules get reused
    needed = -(-needed // 32) * 32
    return max(int(order), needed)


def theta_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped onto [0, pi]."""
    x, w = _legendre(order)
    return 0.5 * math.pi * (x + 1.0), 0.5 * math.pi * w


def _check_alpha(alpha: float) -> None:
    if not alpha > -0.5:
        raise InvalidArgument(f"alpha must satisfy alpha > -1/2 (got {alpha}); the weight is not integrable")


def _weighted_sum(g, alpha: float, r: float, order: int) -> complex:
    theta, w, _ = sine_power_nodes(np.array([0.0, math.pi]), order, 2 * alpha)
    vals = np.asarray(g(r * np.cos(theta)), dtype=complex)
    return r ** (2 * alpha) * np.dot(w, vals)


def integrate_weighted(
    g: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    r: float,
    order: int = DEFAULT_ORDER,
    full_output: bool = False,
):
    """Integrate ``(r^2 - t^2)^(alpha - 1/2) g(t)`` over [-r, r].

    Parameters
    ----------
    g : callable
        Vectorised integrand, evaluated on an array of abscissae in (-r, r).
    alpha : float
        Weight exponent parameter, must exceed -1/2.
    r : float
        Support radius.
    order : int
        Number of Gauss-Legendre nodes in theta.
    full_output : bool
        If true, return ``(value, error_estimate)`` where the estimate is the
        difference between the ``order`` and ``2*order`` rules and the value
        is the ``2*order`` result.
    """
    _check_alpha(alpha)
    if not r > 0:
        raise InvalidArgument(f"r must be positive, got {r}")
    if int(order) != order or order < 1:
        raise InvalidArgument(f"order must be a positive integer, got {order!r}")
    coarse = complex(_weighted_sum(g, alpha, r, int(order)))
    if not full_output:
        return coarse
    fine = complex(_weighted_sum(g, alpha, r, 2 * int(order)))
    return fine, abs(fine - coarse)


def panel_breaks(lo: float, hi: float, panels: int, extra=()) -> np.ndarray:
    """Sorted panel boundaries on [lo, hi] with optional forced breakpoints."""
    pts = np.concatenate([np.linspace(lo, hi, panels + 1), np.asarray(list(extra), dtype=float)])
    pts = pts[(pts >= lo) & (pts <= hi)]
    return np.unique(pts)


def composite_nodes(breaks: np.ndarray, per_panel: int = PANEL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule over consecutive breaks.

    Returns arrays of shape (panels, per_panel).
    """
    x, w = _legendre(per_panel)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    half = 0.5 * (b - a)
    return half * x[None, :] + 0.5 * (a + b), half * w[None, :]


@lru_cache(maxsize=256)
def _jacobi(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_jacobi(order, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _is_integer(p: float) -> bool:
    return abs(p - round(p)) < 1e-12


JACOBI_NODES = 16
GRADING = 0.25


def _endpoint_piece(a: float, b: float, p: float, left: bool):
    """Gauss-Jacobi nodes on [a, b] for ``sin^p`` singular at ``a`` (left) or ``b``."""
    h = 0.5 * (b - a)
    xj, wj = _jacobi(JACOBI_NODES, 0.0 if left else p, p if left else 0.0)
    th = a + h * (xj + 1.0)
    dist = th if left else math.pi - th
    return th, h ** (1 + p) * wj * (np.sin(th) / dist) ** p


def _legendre_piece(a: float, b: float, n: int, p: float):
    x, w = _legendre(n)
    h = 0.5 * (b - a)
    th = a + h * (x + 1.0)
    return th, h * w * np.sin(th) ** p


def _graded_panel(a: float, b: float, per_panel: int, p: float):
    """Nodes for one panel of ``int g sin^p``, graded toward theta = 0 and pi.

    Pieces touching an endpoint get a short Gauss-Jacobi rule; every other
    piece keeps a distance of at least ``GRADING`` times its length from both
    endpoints, which bounds the Legendre error independently of the panel.
    """
    tol = 1e-14
    length = b - a
    jacobi_len = JACOBI_NODES * length / per_panel
    queue = [(a, b)]
    out = []
    while queue:
        u, v = queue.pop(0)
        size = v - u
        left, right = u < tol, v > math.pi - tol
        if left and right:
            queue[:0] = [(u, 0.5 * math.pi), (0.5 * math.pi, v)]
            continue
        if left or right:
            far = math.pi - v if left else u
            cap = min(jacobi_len, far / GRADING)
            if size > cap * (1 + 1e-12):
                queue[:0] = [(u, u + cap), (u + cap, v)] if left else [(u, v - cap), (v - cap, v)]
                continue
            out.append(_endpoint_piece(u, v, p, left))
            continue
        d = min(u, math.pi - v)
        if d >= GRADING * size:
            n = per_panel if (u, v) == (a, b) else max(JACOBI_NODES, math.ceil(per_panel * size / length))
            out.append(_legendre_piece(u, v, n, p))
            continue
        if u <= math.pi - v:
            cut = u + u / GRADING
            queue[:0] = [(u, cut), (cut, v)]
        else:
            cut = v - (math.pi - v) / GRADING
            queue[:0] = [(u, cut), (cut, v)]
    return np.concatenate([q[0] for q in out]), np.concatenate([q[1] for q in out])


def sine_power_nodes(breaks: np.ndarray, per_panel: int, p: float):
    """Composite rule for ``int g(theta) sin(theta)^p dtheta`` over ``breaks`` in [0, pi].

    Returns flat ``(theta, weights, owner)``: the weights already contain
    ``sin(theta)^p`` and ``owner[i]`` is the panel of node ``i``.  For integer
    ``p`` this is the plain composite Gauss-Legendre rule with ``per_panel``
    nodes per panel.  Otherwise panels near theta = 0 or pi are graded (see
    :func:`_graded_panel`) and carry more nodes.
    """
    breaks = np.asarray(breaks, dtype=float)
    panels = breaks.size - 1
    if _is_integer(p):
        x, w = composite_nodes(breaks, per_panel)
        owner = np.repeat(np.arange(panels), per_panel)
        return x.ravel(), (w * np.abs(np.sin(x)) ** p).ravel(), owner
    xs, ws, owners = [], [], []
    for k, (a, b) in enumerate(zip(breaks[:-1], breaks[1:])):
        x, w = _graded_panel(float(a), float(b), per_panel, p)
        xs.append(x)
        ws.append(w)
        owners.append(np.full(x.size, k))
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(owners)


def cumulative_weighted(T, lam: complex, grid, power: int = 0) -> np.ndarray:
    """Running integrals ``G(t_i) = int_{-r}^{t_i} T(s) s^power exp(-i lam s) ds``.

    The integral is taken in the substituted variable, split into panels no
    wider than one half-wave of the kernel (``ceil(|lam| r / pi) + 1`` panels
    over [0, pi]), with every grid point and every kink of ``T`` forced onto
    a panel boundary.
    """
    r = T.r
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgument("cumulative_weighted: grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgument("cumulative_weighted: grid must be strictly increasing")
    slack = 1e-12 * r
    if grid[0] < -r - slack or grid[-1] > r + slack:
        raise InvalidArgument(f"cumulative_weighted: grid leaves the support [-{r}, {r}]")
    phi = np.arccos(np.clip(grid / r, -1.0, 1.0))

    panels = math.ceil(abs(lam) * r / math.pi) + 1
    breaks = panel_breaks(0.0, math.pi, panels, extra=np.concatenate([phi, T.theta_kinks]))
    x, w, owner = T.density_nodes(breaks, PANEL_NODES)
    s = r * np.cos(x)
    vals = np.exp(-1j * lam * s)
    if power:
        vals = vals * s**power
    pieces = np.zeros(breaks.size - 1, dtype=complex)
    np.add.at(pieces, owner, w * vals)
    # tail[k] = integral over [breaks[k], pi]
    tail = np.zeros(breaks.size, dtype=complex)
    tail[:-1] = np.cumsum(pieces[::-1])[::-1]
    idx = np.searchsorted(breaks, phi)
    return tail[idx]
