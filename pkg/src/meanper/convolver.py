"""Even, compactly supported convolvers and their Fourier transforms.

Three profiles are supported on [-r, r]:

* ``gegenbauer``: ``(r^2 - t^2)^(alpha - 1/2)``
* ``weighted``:   ``(r^2 - t^2)^(alpha - 1/2) h(t)`` with ``h(t) = sum_j h_j t^(2j)``
* ``tent``:       ``max(0, 1 - |t|/r)``

The transform convention is ``That(z) = int T(t) exp(-i z t) dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quad
from .errors import InvalidArgument
from .special import bessel_j, gamma_fn

KINDS = ("gegenbauer", "weighted", "tent")
MAX_DERIVATIVE = 8


@dataclass(frozen=True)
class Convolver:
    kind: str
    r: float
    alpha: float | None = None
    h_coeffs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise InvalidArgument(f"unknown convolver kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.r) and self.r > 0):
            raise InvalidArgument(f"support radius must satisfy r > 0, got {self.r}")
        if kind == "tent":
            if self.alpha is not None or self.h_coeffs:
                raise InvalidArgument("tent convolver takes neither alpha nor h_coeffs")
        else:
            if self.alpha is None or not self.alpha > -0.5:
                raise InvalidArgument(f"alpha must satisfy alpha > -1/2, got {self.alpha}")
            coeffs = tuple(float(c) for c in self.h_coeffs)
            if kind == "gegenbauer" and coeffs:
                raise InvalidArgument("gegenbauer convolver takes no h_coeffs")
            if kind == "weighted" and not coeffs:
                raise InvalidArgument("weighted convolver needs at least one h coefficient")
            object.__setattr__(self, "h_coeffs", coeffs)

    @classmethod
    def gegenbauer(cls, alpha: float, r: float = 1.0) -> "Convolver":
        return cls("gegenbauer", r=r, alpha=alpha)

    @classmethod
    def weighted(cls, alpha: float, h_coeffs, r: float = 1.0) -> "Convolver":
        return cls("weighted", r=r, alpha=alpha, h_coeffs=tuple(h_coeffs))

    @classmethod
    def tent(cls, r: float = 1.0) -> "Convolver":
        return cls("tent", r=r)

    @classmethod
    def indicator(cls, r: float = 1.0) -> "Convolver":
        """The characteristic function of [-r, r] (Gegenbauer with alpha = 1/2)."""
        return cls("gegenbauer", r=r, alpha=0.5)

    def h(self, t):
        t2 = np.asarray(t, dtype=float) ** 2
        return np.polynomial.polynomial.polyval(t2, self.h_coeffs) if self.h_coeffs else np.ones_like(t2)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= self.r
        if self.kind == "tent":
            out = np.maximum(0.0, 1.0 - np.abs(t) / self.r)
        else:
            gap = np.where(inside, self.r**2 - t**2, 1.0)
            with np.errstate(divide="ignore"):
                out = np.where(inside, gap ** (self.alpha - 0.5), 0.0)
            if self.kind == "weighted":
                out = out * self.h(t)
        out = np.where(inside, out, 0.0)
        return out if out.ndim else float(out)

    @property
    def theta_kinks(self) -> np.ndarray:
        """Interior non-smooth points of the substituted weight in theta."""
        return np.array([0.5 * math.pi]) if self.kind == "tent" else np.empty(0)

    @property
    def poly_degree(self) -> int:
        return 2 * (len(self.h_coeffs) - 1) if self.kind == "weighted" else 0

    def theta_weight(self, theta):
        """``T(r cos theta) * r sin theta``: the integrand density in theta."""
        theta = np.asarray(theta, dtype=float)
        c = np.cos(theta)
        s = np.sin(theta)
        if self.kind == "tent":
            return (1.0 - np.abs(c)) * self.r * s
        w = self.r ** (2 * self.alpha) * np.abs(s) ** (2 * self.alpha)
        if self.kind == "weighted":
            w = w * self.h(self.r * c)
        return w

    def density_nodes(self, breaks, per_panel: int):
        """Composite theta rule whose weights include :meth:`theta_weight`.

        Returns flat ``(theta, weights, owner)`` with ``owner`` the panel index
        of each node.
        """
        if self.kind == "tent":
            breaks = np.asarray(breaks, dtype=float)
            x, w = quad.composite_nodes(breaks, per_panel)
            owner = np.repeat(np.arange(breaks.size - 1), per_panel)
            return x.ravel(), (w * self.theta_weight(x)).ravel(), owner
        x, w, owner = quad.sine_power_nodes(breaks, per_panel, 2 * self.alpha)
        w = w * self.r ** (2 * self.alpha)
        if self.kind == "weighted":
            w = w * self.h(self.r * np.cos(x))
        return x, w, owner

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "r": self.r}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.h_coeffs:
            d["h_coeffs"] = list(self.h_coeffs)
        return d


@dataclass(frozen=True)
class TransformValue:
    value: complex
    error_estimate: float


def eval_convolver(T: Convolver, t: float) -> float:
    return T(t)


def _theta_nodes(T: Convolver, n: int):
    breaks = np.concatenate([[0.0], T.theta_kinks, [math.pi]])
    per_panel = math.ceil(n / (breaks.size - 1)) + (8 if breaks.size > 2 else 0)
    x, w, _ = T.density_nodes(breaks, per_panel)
    return x, w


def _node_count(T: Convolver, z, n_deriv: int, order: int) -> int:
    zmax = float(np.max(np.abs(np.real(z)))) if np.size(z) else 0.0
    return quad.oscillatory_order(zmax * T.r, order, extra=n_deriv + T.poly_degree)


def transform(T: Convolver, z, derivs=(0,), order: int = quad.DEFAULT_ORDER, nodes: int | None = None):
    """Vectorised ``That^(n)(z)`` for each ``n`` in ``derivs``.

    Returns an array of shape ``(len(derivs),) + shape(z)``.
    """
    z = np.asarray(z, dtype=complex)
    derivs = tuple(int(n) for n in derivs)
    if nodes is None:
        nodes = _node_count(T, z, max(derivs), order)
    theta, base = _theta_nodes(T, nodes)
    s = T.r * np.cos(theta)
    phase = np.exp(-1j * np.multiply.outer(z.ravel(), s))
    out = np.empty((len(derivs), z.size), dtype=complex)
    for i, n in enumerate(derivs):
        out[i] = phase @ (base * (-1j * s) ** n)
    return out.reshape((len(derivs),) + z.shape)


def _with_error(T: Convolver, z: complex, n: int, order: int) -> TransformValue:
    nodes = _node_count(T, z, n, order)
    coarse = transform(T, z, (n,), nodes=nodes)[0]
    fine = transform(T, z, (n,), nodes=2 * nodes)[0]
    return TransformValue(complex(fine), float(abs(fine - coarse)))


def fourier(T: Convolver, z: complex, order: int = quad.DEFAULT_ORDER) -> TransformValue:
    """``That(z)`` by quadrature, with a two-rule error estimate."""
    return _with_error(T, z, 0, order)


def fourier_derivative(T: Convolver, z: complex, n: int, order: int = quad.DEFAULT_ORDER) -> TransformValue:
    """``That^(n)(z) = int T(t) (-i t)^n exp(-i z t) dt``."""
    if int(n) != n or n < 0:
        raise InvalidArgument(f"derivative order must be a nonnegative integer, got {n!r}")
    if n > MAX_DERIVATIVE:
        raise InvalidArgument(f"derivative order {n} exceeds cap {MAX_DERIVATIVE}")
    return _with_error(T, z, int(n), order)


def fourier_closed_form(T: Convolver, z: complex) -> complex:
    """Bessel form ``sqrt(pi) Gamma(alpha + 1/2) (2r)^alpha J_alpha(r z) / z^alpha``.

    Real ``z`` only; negative ``z`` is folded onto ``|z|`` by evenness.
    """
    if T.kind != "gegenbauer":
        raise InvalidArgument("fourier_closed_form: only the gegenbauer profile has a Bessel form")
    z = complex(z)
    if z.imag != 0.0:
        raise InvalidArgument(f"fourier_closed_form: real z required, got {z}")
    x = abs(z.real)
    if x == 0.0:
        raise InvalidArgument("fourier_closed_form: z = 0 is a removable singularity; use fourier()")
    a, r = T.alpha, T.r
    if a < 0:
        raise InvalidArgument("fourier_closed_form: negative alpha needs J of negative order")
    c = math.sqrt(math.pi) * gamma_fn(a + 0.5) * (2.0 * r) ** a
    return complex(c * bessel_j(a, r * x) / x**a)
