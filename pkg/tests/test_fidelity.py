import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metradeoff.fidelity import (
    TradeoffDomainError,
    closed_form_F,
    closed_form_F_expanded,
    closed_form_G,
    closed_form_G_expanded,
    fg_residual,
    gf_residual,
    mc_fidelities,
    quadratic_residual,
    tradeoff_curve,
    tradeoff_residuals,
    visibilities,
)
from metradeoff.haar import SeededStream
from metradeoff.instrument import (
    OptimalParams,
    b_from_a,
    identity_instrument,
    optimal_discrete_instrument,
)

# (2 - b^2)/4 with b = b_from_a(0.5, 2); agrees with the expanded form below
G_HALF_2 = 0.3939234773582497


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_endpoints(d):
    assert closed_form_F(0.0, d) == 1.0
    assert closed_form_G(0.0, d) == pytest.approx(1 / d**2, abs=1e-15)
    assert closed_form_F(1.0, d) == pytest.approx(2 / d**2, abs=1e-15)
    assert closed_form_G(1.0, d) == pytest.approx(2 / d**2, abs=1e-15)


def test_interior_values():
    assert closed_form_F(0.5, 2) == pytest.approx(0.875, abs=1e-15)
    assert closed_form_G(0.5, 2) == pytest.approx(G_HALF_2, abs=1e-15)
    assert closed_form_G_expanded(0.5, 2) == pytest.approx(G_HALF_2, abs=1e-15)
    assert closed_form_F(0.5, 3) == pytest.approx(1 - 7 / 36, abs=1e-15)


@given(st.floats(0, 1), st.integers(2, 8))
def test_printed_forms_agree(a, d):
    assert abs(closed_form_F(a, d) - closed_form_F_expanded(a, d)) < 1e-12
    assert abs(closed_form_G(a, d) - closed_form_G_expanded(a, d)) < 1e-12


def test_closed_form_domain():
    with pytest.raises(ValueError):
        closed_form_F(-0.1, 2)
    with pytest.raises(ValueError):
        closed_form_G(0.5, 1)


def test_visibilities():
    for d in (2, 3, 5):
        assert visibilities(1.0, 1 / d**2, d) == (0.0, 0.0)
        I, D = visibilities(2 / d**2, 2 / d**2, d)
        assert I == pytest.approx(1, abs=1e-12) and D == pytest.approx(1, abs=1e-12)
    I, D = visibilities(0.875, G_HALF_2, 2)
    assert I == pytest.approx(0.5756939094329988, abs=1e-12)
    assert D == pytest.approx(0.25, abs=1e-15)
    assert abs(quadratic_residual(I, D, 2)) < 1e-10
    with pytest.raises(ValueError):
        visibilities(1.2, 0.3, 2)


def test_visibilities_clamp():
    I, D = visibilities(1.0 + 1e-13, 1 / 4 - 1e-14, 2)
    assert I == 0.0 and D == 0.0


@pytest.mark.parametrize("d", [2, 4, 8])
def test_curve(d):
    pts = tradeoff_curve(d, 51)
    first, last = pts[0], pts[-1]
    assert (first.a, first.b, first.F, first.I, first.D) == (0.0, 1.0, 1.0, 0.0, 0.0)
    assert first.G == pytest.approx(1 / d**2, abs=1e-15)
    assert (last.a, last.b, last.I, last.D) == (1.0, 0.0, 1.0, 1.0)
    assert last.F == pytest.approx(2 / d**2, abs=1e-15)
    assert last.G == pytest.approx(2 / d**2, abs=1e-15)
    Is = [p.I for p in pts]
    Ds = [p.D for p in pts]
    assert np.all(np.diff(Is) > 0) and np.all(np.diff(Ds) >= 0)
    for p in pts:
        assert 0 <= p.I <= 1 and 0 <= p.D <= 1
        assert abs(gf_residual(p.F, p.G, d)) < 1e-9
        assert abs(fg_residual(p.F, p.G, d)) < 1e-9
        assert p.D == pytest.approx(p.a**2, abs=1e-12)
        assert p.I == pytest.approx(1 - p.b**2, abs=1e-12)


def test_curve_needs_two_points():
    with pytest.raises(ValueError):
        tradeoff_curve(2, 1)


def test_residuals_on_and_off_curve():
    for d in (2, 3, 4):
        assert tradeoff_residuals(1.0, 1 / d**2, d) == pytest.approx((0, 0), abs=1e-12)
        assert tradeoff_residuals(2 / d**2, 2 / d**2, d) == pytest.approx((0, 0), abs=1e-12)
        gf, quad = tradeoff_residuals(1.0, 2 / d**2, d)
        assert quad == pytest.approx(d**2, abs=1e-12)
        assert gf != 0


def test_off_curve_points_disagree():
    # fg and gf share their zero set: both vanish on the curve and neither
    # vanishes for a G strictly below the optimum at the same F
    for d in (2, 3):
        for a in (0.2, 0.6):
            F, G = closed_form_F(a, d), closed_form_G(a, d) - 0.01 / d**2
            assert abs(gf_residual(F, G, d)) > 1e-6
            assert abs(fg_residual(F, G, d)) > 1e-6


def test_domain_errors_are_distinct():
    with pytest.raises(TradeoffDomainError) as err:
        tradeoff_residuals(0.1, 0.3, 2)
    assert err.value.which == "(d^2-1)F-1"
    with pytest.raises(TradeoffDomainError) as err:
        tradeoff_residuals(0.9, 0.9, 2)
    assert err.value.which == "(d^2-2)(2-d^2 G)"


def test_mc_identity_instrument():
    for d in (2, 3):
        F, G = mc_fidelities(identity_instrument(d), 5000, SeededStream(1))
        assert F.value == pytest.approx(1.0, abs=1e-12)
        assert G.within(1 / d**2)


def test_mc_bell_instrument():
    instr = optimal_discrete_instrument(OptimalParams.from_a(1.0, 2))
    F, G = mc_fidelities(instr, 20_000, SeededStream(7))
    assert F.within(0.5) and G.within(0.5)


def test_mc_interior_d3():
    a, d = 0.5, 3
    instr = optimal_discrete_instrument(OptimalParams.from_a(a, d))
    F, G = mc_fidelities(instr, 20_000, SeededStream(3))
    assert closed_form_F(a, d) == pytest.approx(0.8055555555555556, abs=1e-15)
    assert F.within(closed_form_F(a, d))
    assert G.within((2 - b_from_a(a, d) ** 2) / 9)
    assert 0 <= F.value <= 1 and 0 <= G.value <= 1
    assert F.n_samples == 20_000 and F.seed == 3


def test_mc_reproducible_and_job_independent():
    instr = optimal_discrete_instrument(OptimalParams.from_a(0.3, 2))
    a = mc_fidelities(instr, 3000, SeededStream(4))
    b = mc_fidelities(instr, 3000, SeededStream(4), jobs=3)
    assert a == b


def test_mc_requires_samples():
    with pytest.raises(ValueError):
        mc_fidelities(identity_instrument(2), 10, SeededStream(0))


def _mean_abs_error(n, seeds, a=0.5, d=2):
    instr = optimal_discrete_instrument(OptimalParams.from_a(a, d))
    F0 = closed_form_F(a, d)
    return np.mean([abs(mc_fidelities(instr, n, SeededStream(s))[0].value - F0) for s in seeds])


@pytest.mark.xfail(
    reason="a 20-seed mean of |error| fluctuates by ~25% relative, so the ratio "
    "lands in [1.2, 1.7] only ~70% of the time; seeds fixed a priori give 1.197",
    strict=False,
)
def test_convergence_rate_20_seeds():
    ratio = _mean_abs_error(1000, range(20)) / _mean_abs_error(2000, range(20))
    assert 1.2 <= ratio <= 1.7


@pytest.mark.slow
def test_convergence_rate_200_seeds():
    ratio = _mean_abs_error(500, range(200)) / _mean_abs_error(1000, range(200))
    assert 1.2 <= ratio <= 1.7
