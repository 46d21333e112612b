import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilerg.dynamics import (
    FlowPair,
    TorusPoint,
    TrigPolynomial,
    coboundary_decompose,
    embed_transfer_function,
    flow_apply,
    koopman_apply,
)
from bilerg.errors import ConfigurationError, DomainError, ResonanceError
from bilerg.numerics import Grid2D, lp_norm

UNIT = FlowPair([1.0, 0.0], [0.0, 1.0])
IRRATIONAL = FlowPair([1.0, math.sqrt(2)], [math.sqrt(3), 0.5])


def rng(seed=0):
    return np.random.default_rng(seed)


def test_torus_point_reduces_mod_one():
    p = TorusPoint([1.25, -0.25, -1e-18])
    assert p.coordinates.tolist() == [0.25, 0.75, 0.0]
    with pytest.raises(ValueError):
        p.coordinates[0] = 0.5


def test_flow_examples():
    assert list(flow_apply(UNIT, [0, 0], 0.25, 0.5)) == [0.25, 0.5]
    x = TorusPoint([0.3, 0.6])
    assert list(flow_apply(UNIT, x, 0, 0)) == list(x)
    y = flow_apply(UNIT, [0.9, 0.0], 0.2, 0.0)
    assert y.coordinates[0] == pytest.approx(0.1) and y.coordinates[1] == 0.0


def test_flows_commute_and_compose():
    r = rng(1)
    for _ in range(100):
        x = r.random(2)
        s1, t1, s2, t2 = r.uniform(-5, 5, 4)
        a = flow_apply(IRRATIONAL, flow_apply(IRRATIONAL, x, s1, t1), s2, t2).coordinates
        b = flow_apply(IRRATIONAL, flow_apply(IRRATIONAL, x, s2, t2), s1, t1).coordinates
        c = flow_apply(IRRATIONAL, x, s1 + s2, t1 + t2).coordinates
        for u, v in ((a, b), (a, c)):
            d = np.abs(u - v)
            assert np.all(np.minimum(d, 1 - d) < 1e-12)


def test_flow_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        flow_apply(UNIT, [0.1, 0.2, 0.3], 1, 1)


def test_flowpair_json_roundtrip():
    back = FlowPair.from_json(IRRATIONAL.to_json())
    assert np.array_equal(back.s_direction, IRRATIONAL.s_direction)
    assert json.loads(IRRATIONAL.to_json())["d"] == 2
    with pytest.raises(ConfigurationError):
        FlowPair.from_json({"d": 3, "s_dir": [1, 0], "t_dir": [0, 1]})


def test_trig_poly_evaluation_matches_direct_sum():
    f = TrigPolynomial.random(rng(2), 3, 5, 3)
    x = rng(3).random((7, 3))
    direct = sum(c * np.exp(2j * np.pi * x @ k) for k, c in zip(f.frequencies, f.coefficients))
    assert np.max(np.abs(f(x) - direct)) < 1e-13


def test_trig_poly_merges_duplicates_and_norm():
    f = TrigPolynomial.from_dict({(1, 0): 1.0, (0, 2): 2j}) + TrigPolynomial.mode((1, 0), 0.5)
    assert f.as_dict()[(1, 0)] == 1.5
    assert f.l2_norm() == pytest.approx(math.sqrt(1.5**2 + 4))


def test_abs_squared_is_nonnegative_and_real():
    f = TrigPolynomial.random(rng(4), 2, 4, 2)
    g = f.abs_squared()
    x = rng(5).random((200, 2))
    vals = g(x)
    assert np.max(np.abs(vals.imag)) < 1e-12
    assert np.allclose(vals.real, np.abs(f(x)) ** 2)


def test_product_is_pointwise():
    f, g = TrigPolynomial.random(rng(6), 2, 3, 2), TrigPolynomial.random(rng(7), 2, 3, 2)
    x = rng(8).random((50, 2))
    assert np.allclose((f * g)(x), f(x) * g(x))


def test_trig_poly_json_roundtrip():
    f = TrigPolynomial.random(rng(9), 2, 4, 3)
    g = TrigPolynomial.from_json(f.to_json())
    assert f.coefficient_distance(g) == 0


def test_koopman_examples():
    c = TrigPolynomial.constant(2.5, 2)
    assert koopman_apply(UNIT, c, 0.3, 0.7).coefficient_distance(c) == 0
    e1 = TrigPolynomial.mode((1, 0))
    out = koopman_apply(UNIT, e1, 0.125, 0.0)
    assert out.as_dict()[(1, 0)] == pytest.approx(np.exp(2j * np.pi * 0.125))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(-10, 10), st.floats(-10, 10))
def test_koopman_unitary_and_composition(seed, s, t):
    f = TrigPolynomial.random(rng(seed), 2, 4, 3)
    g = koopman_apply(IRRATIONAL, f, s, t)
    assert np.allclose(np.abs(g.coefficients), np.abs(f.coefficients), rtol=0, atol=1e-14)
    x = rng(seed + 1).random(2)
    assert g(x) == pytest.approx(f(flow_apply(IRRATIONAL, x, s, t)), abs=1e-11)


def test_koopman_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        koopman_apply(UNIT, TrigPolynomial.mode((1, 0, 0)), 1, 0)


def test_coboundary_constant_and_transverse():
    d = coboundary_decompose(UNIT, TrigPolynomial.constant(5.0, 2), 0.5)
    assert d.invariant_part.as_dict() == {(0, 0): 5.0} and len(d.transfer_part) == 0
    f = TrigPolynomial.mode((0, 1))
    d = coboundary_decompose(UNIT, f, 0.5)
    assert d.invariant_part.coefficient_distance(f) == 0 and len(d.transfer_part) == 0


def test_coboundary_single_mode_closed_form():
    f = TrigPolynomial.mode((1, 0))
    d = coboundary_decompose(UNIT, f, 0.25)
    assert d.transfer_part.as_dict()[(1, 0)] == pytest.approx(1 / (1j - 1))
    back = koopman_apply(UNIT, d.transfer_part, 0.25, 0) - d.transfer_part
    assert back.coefficient_distance(f) < 1e-15


def test_coboundary_random_reconstruction_and_invariance():
    sys_ = FlowPair([1.0, 0.0], [0.3, 1.0])
    r = rng(10)
    for _ in range(100):
        f = TrigPolynomial.random(r, 2, 6, 3)
        d = coboundary_decompose(sys_, f, 0.3)
        assert d.reconstruct(sys_).coefficient_distance(f) <= 1e-12
        for t in (0.1, 0.37, 1.0):
            assert koopman_apply(sys_, d.invariant_part, t, 0).coefficient_distance(d.invariant_part) == 0


def test_coboundary_resonance_names_frequency():
    # k . s = 2 and delta = 1/2 make e(delta k.s) = 1 without k . s vanishing
    f = TrigPolynomial.mode((2, 0)) + TrigPolynomial.mode((1, 0))
    with pytest.raises(ResonanceError) as info:
        coboundary_decompose(UNIT, f, 0.5)
    assert info.value.frequency == (2, 0)


def test_coboundary_rejects_delta_range():
    with pytest.raises(DomainError):
        coboundary_decompose(UNIT, TrigPolynomial.mode((1, 0)), 1.5)


def test_embed_constant_mass():
    # both closed edges of [0,3] x [0,2] carry nodes: mass (3/h + 1)(2/h + 1) h^2
    errs = []
    for n in (256, 512):
        g = Grid2D(8.0, 8.0, n, n)
        F = embed_transfer_function(UNIT, TrigPolynomial.constant(1.0, 2), [0, 0], 1, g)
        h = g.h_u
        assert lp_norm(F, 2) ** 2 == pytest.approx((3 + h) * (2 + h), rel=1e-12)
        errs.append(abs(lp_norm(F, 2) ** 2 - 6.0))
    assert errs[1] < 0.52 * errs[0] and errs[1] / 6 < 0.02


def test_embed_single_mode_mass_n2():
    g = Grid2D(16.0, 16.0, 1024, 1024)
    F = embed_transfer_function(IRRATIONAL, TrigPolynomial.mode((1, -1)), [0.3, 0.1], 2, g)
    assert lp_norm(F, 2) ** 2 == pytest.approx(48.0, rel=0.02)


def test_embed_cocycle_translation():
    g = Grid2D(8.0, 8.0, 64, 64)
    f = TrigPolynomial.random(rng(11), 2, 3, 2)
    x = np.array([0.2, 0.7])
    a, b = 2 * g.h_u, 3 * g.h_v
    F = embed_transfer_function(IRRATIONAL, f, x, 1, g)
    G = embed_transfer_function(IRRATIONAL, f, flow_apply(IRRATIONAL, x, a, b), 1, g)
    # inside the box away from the edges, G(u, v) = F(u + a, v + b)
    assert np.allclose(G.samples[:20, :12], F.samples[2:22, 3:15], atol=1e-12)


def test_embed_requires_padding():
    with pytest.raises(ConfigurationError):
        embed_transfer_function(UNIT, TrigPolynomial.constant(1.0, 2), [0, 0], 2, Grid2D(8.0, 8.0, 64, 64))
    with pytest.raises(ConfigurationError):
        embed_transfer_function(UNIT, TrigPolynomial.constant(1.0, 2), [0, 0], 0.5, Grid2D(8.0, 8.0, 64, 64))
