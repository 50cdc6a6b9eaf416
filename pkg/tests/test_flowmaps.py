import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SQ2, rand_amp
from qflow.flowmaps import (
    ChainError,
    FlowStep,
    FlowVector,
    Kind,
    Polarity,
    PolarityError,
    evaluate_chain,
    f_apply,
    g_apply,
    swap_legs,
)
from qflow.statevec import DimensionError, MultiState, tensor

THETA = MultiState([0, 1 / SQ2, -1 / SQ2, 0], (2, 2))
KET0 = MultiState([1, 0])
seeds = st.integers(0, 2**32 - 1)


def rs(seed, d):
    return MultiState(rand_amp(np.random.default_rng(seed), d))


@given(seeds)
def test_g_on_product(seed):
    # g_{a(x)b}(phi) = <a|phi> <b|, held as the covector <a|phi> conj(b)
    a, b, phi = rs(seed, 2), rs(seed + 1, 3), rs(seed + 2, 2)
    out = g_apply(FlowStep(Kind.G, False, tensor(a, b)), FlowVector.ket(phi))
    assert out.polarity is Polarity.BRA
    np.testing.assert_allclose(out.comp, np.vdot(a.amp, phi.amp) * np.conj(b.amp), atol=1e-12)


@given(seeds)
def test_f_on_product(seed):
    # f_{a(x)b}(<phi|) = <phi|a> |b>
    a, b, phi = rs(seed, 3), rs(seed + 1, 2), rs(seed + 2, 3)
    out = f_apply(FlowStep(Kind.F, False, tensor(a, b)), FlowVector.bra_of(phi))
    assert out.polarity is Polarity.KET
    np.testing.assert_allclose(out.comp, np.vdot(phi.amp, a.amp) * b.amp, atol=1e-12)


def test_theta_examples():
    g = g_apply(FlowStep(Kind.G, False, THETA), FlowVector.ket(KET0))
    np.testing.assert_allclose(g.comp, [0, 1 / SQ2], atol=1e-15)
    assert g.to_ket().max_diff(MultiState([0, 1 / SQ2])) < 1e-15
    f = f_apply(FlowStep(Kind.F, False, THETA), FlowVector.bra_of(KET0))
    np.testing.assert_allclose(f.comp, [0, 1 / SQ2], atol=1e-15)


@given(seeds, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_scaling_omega(seed, c):
    om, x = MultiState(rand_amp(np.random.default_rng(seed), 6), (2, 3)), rs(seed + 1, 2)
    g1 = g_apply(FlowStep(Kind.G, False, om), FlowVector.ket(x))
    g2 = g_apply(FlowStep(Kind.G, False, om * c), FlowVector.ket(x))
    np.testing.assert_allclose(g2.comp, np.conj(c) * g1.comp, atol=1e-9)
    f1 = f_apply(FlowStep(Kind.F, False, om), FlowVector.bra_of(x))
    f2 = f_apply(FlowStep(Kind.F, False, om * c), FlowVector.bra_of(x))
    np.testing.assert_allclose(f2.comp, c * f1.comp, atol=1e-9)


@given(seeds)
def test_op_is_swapped_legs(seed):
    om = MultiState(rand_amp(np.random.default_rng(seed), 6), (2, 3))
    x = rs(seed + 1, 3)
    for kind, vec in ((Kind.G, FlowVector.ket(x)), (Kind.F, FlowVector.bra_of(x))):
        a = evaluate_chain([FlowStep(kind, True, om)], vec)
        b = evaluate_chain([FlowStep(kind, False, swap_legs(om))], vec)
        assert a.allclose(b, 1e-12)


@given(seeds, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_maps_are_linear_in_components(seed, c):
    om = MultiState(rand_amp(np.random.default_rng(seed), 4), (2, 2))
    x, y = rs(seed + 1, 2).amp, rs(seed + 2, 2).amp
    for kind, pol in ((Kind.G, Polarity.KET), (Kind.F, Polarity.BRA)):
        step = [FlowStep(kind, False, om)]
        lhs = evaluate_chain(step, FlowVector(c * x + y, pol))
        rhs = evaluate_chain(step, FlowVector(x, pol)).comp * c + evaluate_chain(step, FlowVector(y, pol)).comp
        np.testing.assert_allclose(lhs.comp, rhs, atol=1e-9)


@given(seeds)
def test_teleport_chain(seed):
    phi = rs(seed, 2)
    chain = [FlowStep(Kind.G, False, THETA), FlowStep(Kind.F, False, THETA)]
    out = evaluate_chain(chain, FlowVector.ket(phi))
    assert out.polarity is Polarity.KET
    np.testing.assert_allclose(out.comp, -0.5 * phi.amp, atol=1e-12)


def test_empty_chain_is_identity():
    v = FlowVector([1, 2j], Polarity.BRA)
    assert evaluate_chain([], v) is v


def test_errors():
    with pytest.raises(PolarityError):
        g_apply(FlowStep(Kind.G, False, THETA), FlowVector.bra_of(KET0))
    with pytest.raises(DimensionError):
        f_apply(FlowStep(Kind.F, False, THETA), FlowVector([1, 0, 0], Polarity.BRA))
    with pytest.raises(DimensionError):
        FlowStep(Kind.G, False, KET0)
    with pytest.raises(ChainError) as info:
        evaluate_chain([FlowStep(Kind.G, False, THETA), FlowStep(Kind.G, False, THETA)], FlowVector.ket(KET0))
    assert info.value.step == 1
    assert Polarity.KET.flipped() is Polarity.BRA
