import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from meanper import Convolver, build_spectrum, multiplicity, predict_zeros, refine_zero
from meanper.convolver import fourier, fourier_derivative
from meanper.errors import AmbiguousCount, InvalidArgument, NoConvergence
from meanper.spectrum import (
    synthetic_spectrum,
    tail_ratio,
    verdict,
    zero_density_diagnostic,
)


def test_predict_examples():
    np.testing.assert_allclose(predict_zeros(Convolver.indicator(), 3), [math.pi, 2 * math.pi, 3 * math.pi])
    assert predict_zeros(Convolver.gegenbauer(1.5, 1.0), 1)[0] == pytest.approx(1.5 * math.pi)
    assert predict_zeros(Convolver.weighted(0.5, [1.0], 1.0), 1)[0] == pytest.approx(math.pi)
    np.testing.assert_allclose(predict_zeros(Convolver.tent(2.0), 2), [math.pi, 2 * math.pi])


@pytest.mark.parametrize("count", [0, -1, 2.5])
def test_predict_rejects_bad_count(count):
    with pytest.raises(InvalidArgument):
        predict_zeros(Convolver.indicator(), count)


def test_refine_examples():
    ind = Convolver.indicator()
    assert refine_zero(ind, 3.0) == pytest.approx(math.pi, abs=1e-10)
    j = refine_zero(Convolver.gegenbauer(1.5, 1.0), 4.712)
    assert j.real == pytest.approx(4.493409, abs=1e-5)
    assert refine_zero(ind, math.pi) == pytest.approx(math.pi, abs=1e-12)


def test_refine_reports_last_iterate():
    with pytest.raises(NoConvergence) as info:
        refine_zero(Convolver.indicator(), 3.0, max_iter=1)
    assert abs(info.value.last - math.pi) < 0.01
    assert info.value.residual > 0
    assert info.value.seed == 3.0


def test_multiplicity_examples():
    assert multiplicity(Convolver.indicator(), math.pi, 0.5) == 1
    assert multiplicity(Convolver.tent(), 2 * math.pi, 0.5) == 2
    assert multiplicity(Convolver.indicator(), math.pi / 2, 0.3) == 0


def test_multiplicity_ambiguous_when_contour_hits_zeros():
    # the circle passes exactly through pi and 2 pi
    with pytest.raises(AmbiguousCount):
        multiplicity(Convolver.indicator(), 1.5 * math.pi, radius=0.5 * math.pi)


def test_multiplicity_counts_several_zeros():
    # around 2.5 pi: 2 pi and 3 pi lie within 1.6, pi and 4 pi at 4.71, 5 pi at 7.85
    assert multiplicity(Convolver.indicator(), 2.5 * math.pi, radius=4.0) == 2
    assert multiplicity(Convolver.indicator(), 2.5 * math.pi, radius=5.0) == 4


def test_indicator_spectrum(indicator_spectrum):
    S = indicator_spectrum
    assert len(S) == 40
    expected = np.array([s * math.pi * m for m in range(1, 21) for s in (1, -1)])
    np.testing.assert_allclose(S.lambdas.real, expected, atol=1e-12)
    assert all(p.multiplicity == 1 for p in S)
    assert [p.index for p in S] == list(range(40))


def test_tent_spectrum(tent_spectrum):
    lam = tent_spectrum.lambdas.real
    np.testing.assert_allclose(lam, [2 * math.pi, -2 * math.pi, 4 * math.pi, -4 * math.pi, 6 * math.pi, -6 * math.pi], atol=1e-6)
    assert all(p.multiplicity == 2 for p in tent_spectrum)


def test_first_j1_zero():
    S = build_spectrum(Convolver.gegenbauer(1.0, 1.0), 1)
    j11 = sc.jn_zeros(1, 1)[0]
    np.testing.assert_allclose(S.lambdas.real, [j11, -j11], atol=1e-5)


@pytest.mark.parametrize(
    "T",
    [Convolver.indicator(), Convolver.gegenbauer(1.5, 2.0), Convolver.weighted(0.5, [1.0, 1.0], 1.0), Convolver.tent()],
    ids=["indicator", "gegenbauer", "weighted", "tent"],
)
def test_spectral_point_invariants(T):
    S = build_spectrum(T, 8)
    for p in S:
        n = p.multiplicity
        d = p.derivs
        assert len(d) == 2 * n + 1
        assert abs(d[0]) < 1e-10
        assert abs(d[n]) > 1e-6
        for j in range(n):
            assert abs(d[j]) <= 1e-6 * max(1.0, abs(d[n]))
        # cached derivatives agree with a fresh quadrature
        assert abs(d[n] - fourier_derivative(T, p.lam, n).value) < 1e-10
        assert abs(p.lam.imag) < 1e-8


@pytest.mark.parametrize("T", [Convolver.indicator(), Convolver.gegenbauer(1.0, 1.7), Convolver.tent(2.0)])
def test_spectrum_closed_under_negation(T):
    S = build_spectrum(T, 6)
    lams = list(S.lambdas)
    for p in S:
        assert -p.lam in lams
        q = S[lams.index(-p.lam)]
        assert q.multiplicity == p.multiplicity
        for j, (a, b) in enumerate(zip(p.derivs, q.derivs)):
            assert a == (-1) ** j * b


def test_build_spectrum_thread_count_invariant():
    T = Convolver.gegenbauer(1.0, 1.0)
    a = build_spectrum(T, 12, workers=1)
    b = build_spectrum(T, 12, workers=4)
    assert [p.lam for p in a] == [p.lam for p in b]
    assert [p.derivs for p in a] == [p.derivs for p in b]


def test_zero_density_examples():
    S = build_spectrum(Convolver.indicator(), 200)
    diag = zero_density_diagnostic(S, 1.0)
    # 2 sum 1/(pi m)^2 = 1/3; the tail beyond 200 is about 2 / (200 pi^2)
    assert diag.partial_sums[-1] == pytest.approx(1 / 3 - 2 / (200.5 * math.pi**2), abs=1e-6)
    assert diag.verdict == "converging"
    single = synthetic_spectrum([math.pi, -math.pi])
    assert zero_density_diagnostic(single, 1.0).partial_sums[-1] == pytest.approx(2 / math.pi**2)


def test_zero_density_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        zero_density_diagnostic(synthetic_spectrum([]), 1.0)
    with pytest.raises(InvalidArgument):
        zero_density_diagnostic(synthetic_spectrum([1.0]), 0.0)


def test_tail_ratio_limits():
    assert tail_ratio([]) == 0.0
    assert tail_ratio([1.0]) == 0.0
    # a finite sum stops growing
    assert tail_ratio([1.0, 2.0, 3.0] + [3.0] * 50) == 0.0
    n = np.arange(1, 2001)
    assert verdict(tail_ratio(np.cumsum(1.0 / n))) == "diverging"
    assert verdict(tail_ratio(np.cumsum(n ** -3.0))) == "converging"
    assert verdict(tail_ratio(np.cumsum(np.ones(2000)))) == "diverging"


@settings(max_examples=40, deadline=None)
@given(p=st.floats(1.5, 6.0), N=st.integers(200, 3000))
def test_summable_power_tails_converge(p, N):
    n = np.arange(1, N + 1)
    assert tail_ratio(np.cumsum(n ** -p)) < 0.9


@settings(max_examples=40, deadline=None)
@given(p=st.floats(-2.0, 1.0), N=st.integers(200, 3000))
def test_divergent_power_tails_diverge(p, N):
    n = np.arange(1, N + 1)
    assert tail_ratio(np.cumsum(n ** -p)) > 0.97


def test_verdict_thresholds():
    assert verdict(0.5) == "converging"
    assert verdict(0.93) == "marginal"
    assert verdict(1.2) == "diverging"


def test_transform_vanishes_at_all_zeros(indicator_spectrum):
    for p in indicator_spectrum:
        assert abs(fourier(Convolver.indicator(), p.lam).value) < 1e-12


@pytest.mark.parametrize("alpha", [-0.3, 0.5, 1.0, 1.5, 3.0])
def test_bessel_derivative_at_zeros_scales_like_inverse_sqrt(alpha):
    # |J'_a(z_m)| sqrt(z_m) -> sqrt(2/pi) < 1, so the bound holds up to a constant only
    S = build_spectrum(Convolver.gegenbauer(alpha), 60)
    z = np.array([p.lam.real for p in S.positive()])
    scaled = np.abs(sc.jvp(alpha, z)) * np.sqrt(z)
    assert scaled.min() > 0.7
    assert scaled.max() < 0.81
    assert scaled[-1] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-4)
