import numpy as np
import pytest
from scipy.integrate import quad

from bilerg.bilinear.cutoffs import (
    bump,
    bump_cdf,
    build_cutoffs,
    partition_bump,
    smooth_indicator,
)
from bilerg.errors import DomainError


def test_bump_profile():
    assert bump(0.0) == pytest.approx(np.exp(-1.0))
    assert np.all(bump([-1.0, 1.0, 1.5, -3.0]) == 0)
    s = np.linspace(-0.99, 0.99, 101)
    assert np.allclose(bump(s), bump(-s))


def test_bump_cdf_against_adaptive_quadrature():
    mass = quad(lambda s: float(bump(s)), -1, 1, epsabs=1e-14, epsrel=1e-12)[0]
    for z in (-0.7, -0.1, 0.0, 0.35, 0.9):
        ref = quad(lambda s: float(bump(s)), -1, z, epsabs=1e-14, epsrel=1e-12)[0] / mass
        assert bump_cdf(z) == pytest.approx(ref, abs=1e-12)
    assert bump_cdf(0.0) == pytest.approx(0.5, abs=1e-14)
    assert bump_cdf(-2.0) == 0.0 and bump_cdf(1.0) == 1.0
    z = np.linspace(-1.2, 1.2, 500)
    assert np.all(np.diff(bump_cdf(z)) >= -1e-15)


def test_smooth_indicator_support_and_plateau():
    t = np.linspace(-1, 4, 2001)
    v = smooth_indicator(t, 1.0, 2.0, 0.1)
    assert np.all(v[(t <= 0.9) | (t >= 2.1)] == 0)
    assert np.allclose(v[(t >= 1.1) & (t <= 1.9)], 1.0, atol=1e-15)
    assert np.all((v >= 0) & (v <= 1 + 1e-15))


def test_partition_bump_sums_to_one():
    s = np.linspace(-3.3, 3.3, 997)
    total = sum(partition_bump(s - m) for m in range(-6, 7))
    assert np.allclose(total, 1.0, atol=1e-12)
    assert np.all(partition_bump(np.array([-1.0, 1.0, 1.2])) == 0)


@pytest.mark.parametrize("delta", [1.0, 0.25, 1 / 16])
def test_phi_certificates(delta):
    cut = build_cutoffs(delta)
    gap = cut.phi_l1_gap()
    assert gap <= delta
    # by construction the gap is exactly delta/2
    assert gap == pytest.approx(delta / 2, rel=1e-9)
    lo, hi = cut.phi_support
    assert 1.0 <= lo and hi <= 2.0
    t = np.linspace(0, 3, 3001)
    assert np.all(cut.phi(t)[(t <= lo) | (t >= hi)] == 0)
    assert np.all(cut.phi(t) >= 0)


def test_eta_tilde_plateau_and_support():
    cut = build_cutoffs(0.5)
    assert cut.eta_tilde(3.0, -7.0) == 1.0
    assert cut.eta_tilde(25.0, 0.0) == 0.0
    g = np.linspace(-10, 10, 41)
    X, Y = np.meshgrid(g, g)
    assert np.all(cut.eta_tilde(X, Y) == 1.0)
    assert cut.eta_tilde(20.0, 0.0) == 0.0 and cut.eta_tilde(0.0, -20.0) == 0.0


def test_partition_sum_interior_point():
    cut = build_cutoffs(1.0)
    assert cut.partition_sum(0.4, -1.2) == pytest.approx(1.0, abs=1e-10)
    r = np.random.default_rng(0)
    pts = r.uniform(-2, 2, (50, 2))
    assert np.allclose(cut.partition_sum(pts[:, 0], pts[:, 1]), 1.0, atol=1e-10)


def test_zeta_is_centred_product():
    cut = build_cutoffs(0.5, center=(2.0, 3.0))
    assert cut.zeta(2.0, 3.0, 1.5) == pytest.approx(cut.eta(0.0, 0.0) * cut.phi(1.5))
    assert cut.zeta(3.5, 3.0, 1.5) == 0.0
    assert cut.zeta(2.0, 3.0, 0.9) == 0.0


@pytest.mark.parametrize("delta", [0.0, -0.1, 1.5])
def test_build_cutoffs_rejects_delta(delta):
    with pytest.raises(DomainError):
        build_cutoffs(delta)
