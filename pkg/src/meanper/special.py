"""Gamma and Bessel-J for real arguments."""

from __future__ import annotations

import math

from .errors import InvalidArgument, RangeError

# Above this order the Hankel expansion is no longer accurate to 1e-9 at the
# nu + 12 crossover.
MAX_ORDER = 8.0


def gamma_fn(x: float) -> float:
    """Gamma function for x > 0."""
    if not x > 0:
        raise InvalidArgument(f"gamma_fn: poles and negative arguments unsupported (x={x})")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise RangeError(f"gamma_fn: overflow at x={x}") from exc


def _bessel_series(nu: float, x: float) -> float:
    half = 0.5 * x
    try:
        term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0))
    except OverflowError as exc:
        raise RangeError(f"bessel_j: series prefactor overflows for nu={nu}, x={x}") from exc
    terms = [term]
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        terms.append(term)
        if k > half and abs(term) < 1e-18 * abs(terms[0]):
            break
        if k > 500:
            break
    return math.fsum(terms)


def _bessel_hankel(nu: float, x: float) -> float:
    mu = 4.0 * nu * nu
    p_sum = 1.0
    q_sum = 0.0
    a = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        a *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        size = abs(a)
        if size == 0.0:
            break
        if size > prev:
            # asymptotic series started to diverge; stop at the smallest term
            break
        if k % 2 == 1:
            q_sum += a if (k // 2) % 2 == 0 else -a
        else:
            p_sum += a if (k // 2) % 2 == 0 else -a
        if size < 1e-17:
            break
        prev = size
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind J_nu(x) for nu >= 0, x > 0.

    Ascending power series for ``x <= nu + 12``, Hankel's large-argument
    expansion (truncated at its smallest term) beyond that.
    """
    if nu < 0:
        raise InvalidArgument(f"bessel_j: negative order {nu} unsupported")
    if not x > 0:
        raise InvalidArgument(f"bessel_j: argument must be positive, got {x}")
    if nu > MAX_ORDER:
        raise RangeError(f"bessel_j: order {nu} exceeds supported range (<= {MAX_ORDER})")
    if x <= nu + 12.0:
        return _bessel_series(nu, x)
    return _bessel_hankel(nu, x)
