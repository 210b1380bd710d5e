import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meanper import (
    Convolver,
    ExponentialSum,
    ExtensionRequest,
    Sampled,
    b_weight,
    build_spectrum,
    convergence_functional,
    e_monomial,
    extend,
    extract_coefficients,
    lemma_gate,
    residual,
    smoothness_budget,
    synthesize,
    theorem_budget,
)
from meanper.coeff import CoefficientTable
from meanper.errors import InconsistentProbe, InvalidArgument
from meanper.spectrum import SpectralPoint, synthetic_spectrum


def test_e_monomial_examples():
    assert e_monomial(0, 0, 0.7) == 1
    assert e_monomial(2.5, 1, 0.0) == 0
    assert e_monomial(math.pi, 0, 1.0) == pytest.approx(-1.0)
    assert e_monomial(1.0, 2, 2.0) == pytest.approx(-4 * np.exp(2j))


def test_b_weight_examples():
    sp = lambda n: SpectralPoint(lam=1.0, multiplicity=n)
    assert b_weight(2.0, sp(1), 5) == 1
    assert b_weight(2.0, sp(3), 5) == 4
    assert b_weight(1.0, sp(3), 0) == 3
    assert b_weight(0.5, sp(2), 3) == 2
    assert b_weight(0.5, sp(5), 1) == 2


# -- lemma gate --------------------------------------------------------------------


def test_lemma_gate_real_simple_spectrum(indicator_spectrum):
    for R in (1.5, 5.0, 100.0):
        for N in (0.0, 10.0):
            g = lemma_gate(indicator_spectrum, N, R, 1.0)
            assert g.sup_value == 0.0
            assert g.passed


def test_lemma_gate_saturating_spectrum():
    lams = [x + 1j * math.log(2 + abs(x + 0j)) for x in np.arange(1.0, 60.0)]
    lams = [complex(x.real, math.log(2 + abs(x))) for x in lams]
    S = synthetic_spectrum(lams + [-z for z in lams])
    g = lemma_gate(S, 0.0, 3.0, 1.0)
    assert g.sup_value == pytest.approx(1.0, abs=1e-3)
    assert not g.passed
    assert lemma_gate(S, 0.0, 1.5, 1.0).passed


def test_lemma_gate_tent(tent_spectrum):
    g = lemma_gate(tent_spectrum, 0.0, 1.1, 1.0)
    assert g.sup_value == pytest.approx(1 / math.log(2 + 2 * math.pi), rel=1e-9)
    assert g.sup_value == pytest.approx(0.474, abs=2e-3)
    assert g.passed


def test_lemma_gate_errors_and_empty_range(indicator_spectrum, caplog):
    with pytest.raises(InvalidArgument):
        lemma_gate(indicator_spectrum, 0.0, 1.0, 1.0)
    with caplog.at_level(logging.WARNING):
        g = lemma_gate(indicator_spectrum, 1e6, 3.0, 1.0)
    assert g.sup_value == 0.0 and g.passed
    assert "no spectral points" in caplog.text


@settings(max_examples=30, deadline=None)
@given(R=st.floats(1.01, 50.0), r=st.floats(0.1, 1.0), shift=st.floats(0.0, 3.0))
def test_lemma_pass_iff_below_threshold(R, r, shift):
    lams = [complex(x, shift) for x in (3.0, 7.0, 20.0)]
    S = synthetic_spectrum(lams, multiplicities=[1, 2, 1])
    g = lemma_gate(S, 0.0, R, r)
    assert g.passed == (g.sup_value < 1 / (R - r))


# -- convergence functional ------------------------------------------------------


def _synthetic_table(S, power):
    entries = {}
    for p in S:
        m = abs(p.lam) / math.pi
        entries[(p.index, 0)] = m**-power
    return CoefficientTable(entries=entries, spectrum=S)


@pytest.fixture(scope="module")
def long_spectrum():
    m = np.arange(1, 1001)
    return synthetic_spectrum(np.concatenate([math.pi * m, -math.pi * m]))


def test_functional_discriminates(long_spectrum):
    fast = convergence_functional(_synthetic_table(long_spectrum, 4), long_spectrum, 3.0, 1)
    slow = convergence_functional(_synthetic_table(long_spectrum, 2), long_spectrum, 3.0, 1)
    assert len(fast.partial_sums) == 2000
    assert fast.tail_ratio < 0.9 and fast.verdict == "converging"
    assert slow.tail_ratio >= 0.97 and slow.verdict == "diverging"


def test_functional_terms(long_spectrum):
    fn = convergence_functional(_synthetic_table(long_spectrum, 4), long_spectrum, 3.0, 1)
    p = long_spectrum[10]
    m = abs(p.lam) / math.pi
    assert fn.terms[10] == pytest.approx(m**-4 * (abs(p.lam) + 1))
    np.testing.assert_allclose(np.diff(fn.partial_sums), fn.terms[1:], rtol=0, atol=1e-14)


def test_functional_with_sigma(indicator_spectrum):
    table = _synthetic_table(indicator_spectrum, 3)
    plain = convergence_functional(table, indicator_spectrum, 2.0, 0)
    weighted = convergence_functional(table, indicator_spectrum, 2.0, 0, use_sigma=True)
    for p, a, b in zip(indicator_spectrum, plain.terms, weighted.terms):
        assert b == pytest.approx(a * abs(p.lam) / 2)


def test_functional_empty_table(indicator_spectrum):
    fn = convergence_functional(CoefficientTable(entries={}, spectrum=indicator_spectrum), indicator_spectrum, 2.0, 1)
    assert fn.partial_sums == [0.0]
    assert fn.tail_ratio == 0.0


def test_functional_weights_imaginary_part():
    S = synthetic_spectrum([1.0 + 0.5j, -1.0 + 0.5j])
    table = CoefficientTable(entries={(0, 0): 1.0, (1, 0): 1.0}, spectrum=S)
    fn = convergence_functional(table, S, 2.0, 0)
    assert fn.terms[0] == pytest.approx(math.exp(1.0))


# -- budgets -------------------------------------------------------------------------


@pytest.mark.parametrize("k, alpha, q", [(5, 0.5, 2), (2, 0.5, None), (6, 1.5, 2), (3, 0.5, 0), (1, 0.5, None), (4, 0.0, 2)])
def test_smoothness_budget(k, alpha, q):
    assert smoothness_budget(k, alpha) == q


@pytest.mark.parametrize("k, gamma, q", [(10, 1.5, 6), (3, 1.0, None), (4, 0.5, 1), (5, 1.0, 1)])
def test_theorem_budget(k, gamma, q):
    assert theorem_budget(k, gamma) == q


@settings(max_examples=100, deadline=None)
@given(k=st.integers(0, 40), alpha=st.floats(-0.49, 10.0))
def test_budget_is_largest_strictly_below(k, alpha):
    q = smoothness_budget(k, alpha)
    bound = k - (alpha + 1.5)
    if q is None:
        assert bound <= 1e-12
    else:
        assert q >= 0 and q < bound + 1e-12 and q + 1 >= bound - 1e-12


@settings(max_examples=100, deadline=None)
@given(k=st.integers(0, 40), gamma=st.floats(0.01, 10.0))
def test_theorem_budget_is_largest_strictly_below(k, gamma):
    q = theorem_budget(k, gamma)
    bound = k - 2 - gamma
    if q is None:
        assert bound <= 1e-12
    else:
        assert q < bound + 1e-12 and q + 1 >= bound - 1e-12


def test_budget_errors():
    with pytest.raises(InvalidArgument):
        smoothness_budget(-1, 0.5)
    with pytest.raises(InvalidArgument):
        theorem_budget(3, 0.0)


# -- synthesis ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def sin_table(indicator_spectrum, indicator):
    f = ExponentialSum([(math.pi, 0, -0.5j), (-math.pi, 0, 0.5j)], half_width=2.0)
    return extract_coefficients(f, indicator, indicator_spectrum)


def test_synthesize_single_term(indicator_spectrum):
    table = CoefficientTable(entries={(0, 0): 1.0}, spectrum=indicator_spectrum)
    t, v = synthesize(table, indicator_spectrum, 2.0, 11)
    np.testing.assert_allclose(v, np.exp(1j * math.pi * t), atol=1e-15)


def test_synthesize_sin(sin_table, indicator_spectrum):
    t, v = synthesize(sin_table, indicator_spectrum, 5.0, 801)
    assert np.max(np.abs(v - np.sin(math.pi * t))) < 1e-6


def test_synthesize_empty(indicator_spectrum):
    t, v = synthesize(CoefficientTable(entries={}, spectrum=indicator_spectrum), indicator_spectrum, 3.0, 7)
    assert t.tolist() == np.linspace(-3, 3, 7).tolist()
    assert not v.any()


def test_synthesize_validation(sin_table, indicator_spectrum):
    with pytest.raises(InvalidArgument):
        synthesize(sin_table, indicator_spectrum, 3.0, 11, d=7)
    with pytest.raises(InvalidArgument):
        synthesize(sin_table, indicator_spectrum, 3.0, 1)


def test_reality_of_samples(indicator_spectrum, indicator):
    f = Sampled.from_function(lambda t: np.cos(2 * math.pi * t) + 0.1 * np.sin(7 * math.pi * t), 2.0)
    table = extract_coefficients(f, indicator, indicator_spectrum)
    _, v = synthesize(table, indicator_spectrum, 6.0, 1201)
    assert np.max(np.abs(v.imag)) < 1e-8 * np.max(np.abs(v.real))


@pytest.mark.parametrize("which", ["indicator", "tent"])
def test_derivative_synthesis_matches_finite_differences(which, indicator_spectrum, tent_spectrum):
    if which == "indicator":
        S = indicator_spectrum
        entries = {(0, 0): -0.5j, (1, 0): 0.5j, (6, 0): 0.2}
    else:
        S = tent_spectrum
        entries = {(0, 0): 1.0, (0, 1): 0.3, (3, 1): -0.4j}
    table = CoefficientTable(entries=entries, spectrum=S)
    t, v = synthesize(table, S, 3.0, 20001)
    _, dv = synthesize(table, S, 3.0, 20001, d=1)
    _, d2v = synthesize(table, S, 3.0, 20001, d=2)
    h = t[1] - t[0]
    fd = (v[2:] - v[:-2]) / (2 * h)
    assert np.max(np.abs(fd - dv[1:-1])) < 1e-4
    fd2 = (dv[2:] - dv[:-2]) / (2 * h)
    assert np.max(np.abs(fd2 - d2v[1:-1])) < 1e-4 * np.max(np.abs(d2v))


def test_partial_sums_are_real_pairwise(sin_table, indicator_spectrum):
    # a +lam term followed by its -lam partner keeps every even partial sum real
    pts = sorted(indicator_spectrum.points, key=lambda p: p.index)
    assert all(pts[2 * i].lam == -pts[2 * i + 1].lam for i in range(len(pts) // 2))


# -- residual ----------------------------------------------------------------------


def test_residual_examples(indicator):
    t = np.linspace(-5, 5, 801)
    probes = np.linspace(-3.9, 3.9, 9)
    assert residual(t, np.sin(math.pi * t), indicator, probes) < 1e-6
    assert residual(t, np.ones_like(t), indicator, probes) == pytest.approx(2.0, abs=1e-8)
    assert residual(t, np.zeros_like(t), indicator, probes) == 0.0


def test_residual_other_convolvers():
    T = Convolver.gegenbauer(1.0, 1.0)
    t = np.linspace(-4, 4, 1601)
    # constant convolution equals the total mass pi/2
    assert residual(t, np.ones_like(t), T, [0.0, 2.0]) == pytest.approx(math.pi / 2, abs=1e-8)
    tent = Convolver.tent(0.5)
    assert residual(t, np.ones_like(t), tent, [-1.0]) == pytest.approx(0.5, abs=1e-8)


def test_residual_rejects_probes(indicator):
    t = np.linspace(-3, 3, 101)
    with pytest.raises(InvalidArgument):
        residual(t, np.zeros_like(t), indicator, [2.5])


# -- extension pipeline ------------------------------------------------------------


def test_extend_sin():
    f = Sampled.from_function(lambda t: np.sin(math.pi * t), 2.0, size=801, smoothness_k=4)
    rep = extend(f, Convolver.indicator(), ExtensionRequest(R=5.0, cutoff=32))
    assert rep.lemma_pass and rep.lemma_sup == 0.0
    assert rep.residual_sup < 1e-6
    assert np.max(np.abs(rep.samples - np.sin(math.pi * rep.grid))) < 1e-6
    assert rep.k == 4 and rep.gamma == 1.0
    # q < 4 - 2 and q < 4 - 2 - 1
    assert rep.budget_q == 1 and rep.theorem_q == 0
    assert rep.functional_verdict == "converging"
    assert rep.warnings == []


def test_extend_two_exponentials():
    f = ExponentialSum([(math.pi, 0, 1.0), (3 * math.pi, 0, 1.0)], half_width=2.0)
    rep = extend(f, Convolver.indicator(), ExtensionRequest(R=8.0, cutoff=16, grid_size=1601))
    assert rep.table.get(0) == pytest.approx(1.0, abs=1e-8)
    assert rep.table.get(4) == pytest.approx(1.0, abs=1e-8)
    others = [abs(c) for (i, _), c in rep.table.entries.items() if i not in (0, 4)]
    assert max(others) < 1e-8
    assert np.max(np.abs(rep.samples - f(rep.grid))) < 1e-6


def test_extend_rejects_non_mean_periodic():
    f = ExponentialSum([(0.0, 1, -1j)], half_width=2.0)  # f(t) = t
    with pytest.raises(InconsistentProbe, match="f not mean-periodic for T"):
        extend(f, Convolver.indicator(), ExtensionRequest(R=5.0, cutoff=8))


def test_extend_validation():
    f = ExponentialSum([(math.pi, 0, 1.0)], half_width=2.0)
    with pytest.raises(InvalidArgument):
        extend(f, Convolver.indicator(), ExtensionRequest(R=1.5))
    with pytest.raises(InvalidArgument):
        extend(f, Convolver.indicator(3.0), ExtensionRequest(R=5.0))
    with pytest.raises(InvalidArgument):
        extend(ExponentialSum([(math.pi, 0, 1.0)]), Convolver.indicator(), ExtensionRequest(R=5.0))
    for bad in (dict(grid_size=1), dict(q=-1), dict(cutoff=0)):
        with pytest.raises(InvalidArgument):
            ExtensionRequest(R=5.0, **bad)


def test_gate_failure_is_reported_not_raised():
    # R = 1000 makes B(R, lam, q) = 1 but the residual is fine; q = 6 pushes the functional
    f = Sampled.from_function(lambda t: np.sin(math.pi * t), 2.0)
    rep = extend(f, Convolver.indicator(), ExtensionRequest(R=5.0, q=60, cutoff=16))
    assert rep.functional_verdict != "converging"
    assert rep.warnings
    assert rep.residual_sup < 1e-6


@pytest.mark.parametrize("func", ["sum", "tent"])
def test_restriction_consistency(func, indicator_spectrum, tent_spectrum, indicator, tent):
    if func == "sum":
        S, T = indicator_spectrum, indicator
        f = ExponentialSum([(S[i].lam, 0, c) for i, c in ((0, 1.0), (3, -0.5j), (9, 0.25), (30, 2.0))], half_width=2.0)
    else:
        S, T = tent_spectrum, tent
        f = ExponentialSum([(S[0].lam, 1, 1.0), (S[1].lam, 1, 1.0), (S[4].lam, 0, 0.3j)], half_width=2.5)
    table = extract_coefficients(f, T, S)
    t, v = synthesize(table, S, f.half_width, 501)
    assert np.max(np.abs(v - f(t))) < 1e-5


def test_residual_does_not_grow_with_cutoff():
    # a 2-periodic zero-mean function with infinitely many nonzero coefficients;
    # every truncation is itself mean-periodic, so the residual sits at the
    # quadrature floor and must stay there as the cutoff doubles
    from scipy.special import i0

    f = Sampled.from_function(lambda t: np.exp(np.cos(math.pi * t)) - i0(1.0), 2.0, size=2001)
    reps = [extend(f, Convolver.indicator(), ExtensionRequest(R=4.0, cutoff=c)) for c in (1, 2, 4, 8)]
    res = [r.residual_sup for r in reps]
    for a, b in zip(res, res[1:]):
        assert b <= a + 1e-9
    assert max(res) < 1e-6
    # the truncation error on f's own interval does shrink
    err = [r.restriction_error for r in reps]
    assert all(b < a for a, b in zip(err, err[1:]))
    assert err[-1] < 1e-6
