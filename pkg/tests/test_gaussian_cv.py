import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import optimize as so

from cvlink import gaussian_cv as gcv
from cvlink.errors import DomainError
from cvlink.fading_channel import FadingParams, fading_moments, sample_tau

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA2 = np.block([[OMEGA, np.zeros((2, 2))], [np.zeros((2, 2)), OMEGA]])


def symplectic_spectrum(v):
    """Moduli of the eigenvalues of i Omega V, each pair counted once."""
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA2 @ v)))
    return ev[::2]


def pt_min_eig_brute(v):
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return symplectic_spectrum(flip @ v @ flip)[0]


def lossy_channel_brute(v, tau_a, tau_b, m_a, m_b):
    """Beam splitter with thermal environment on each mode: V -> X V X^T + Y."""
    x = np.diag([math.sqrt(tau_a)] * 2 + [math.sqrt(tau_b)] * 2)
    y = np.diag([(1 - tau_a) * m_a] * 2 + [(1 - tau_b) * m_b] * 2)
    return x @ v @ x.T + y


def fidelity_brute(v):
    """Coherent-state teleportation fidelity from the general 2x2-block formula."""
    z = np.diag([1.0, -1.0])
    a, b, c = v[:2, :2], v[2:, 2:], v[:2, 2:]
    gamma = z @ a @ z + b - z @ c - c.T @ z
    return 1.0 / math.sqrt(np.linalg.det(np.eye(2) + gamma / 2.0))


squeezing = st.floats(0.0, 2.5)
photons = st.floats(0.0, 5.0)
transmissivity = st.floats(0.0, 1.0)
env = st.floats(1.0, 600.0)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0])
def test_tmsv_identities(r):
    st_ = gcv.tmsv(r)
    assert gcv.pt_symplectic_eig(st_) == pytest.approx(math.exp(-2 * r), rel=1e-12)
    assert gcv.fidelity_bk(st_) == pytest.approx(1 / (1 + math.exp(-2 * r)), abs=1e-12)


def test_tmsv_reference_values():
    assert gcv.fidelity_bk(gcv.tmsv(0.0)) == 0.5
    assert gcv.negativity(gcv.tmsv(1.0)) == pytest.approx((1 - math.exp(-2)) / (2 * math.exp(-2)))
    assert gcv.negativity(gcv.tmsv(0.0)) == 0.0


@given(squeezing, photons)
def test_tmst_is_physical_and_matches_brute_eigs(r, n):
    cm = gcv.tmst(r, n)
    assert gcv.is_physical(cm)
    nu_m, nu_p = gcv.symplectic_eigs(cm)
    brute = symplectic_spectrum(cm.matrix())
    assert nu_m == pytest.approx(brute[0], rel=1e-7)
    assert nu_p == pytest.approx(brute[1], rel=1e-7)
    assert nu_m == pytest.approx(1 + 2 * n, rel=1e-7)


@settings(max_examples=200)
@given(squeezing, photons, transmissivity, transmissivity, env, env)
def test_channel_map_against_brute_force(r, n, ta, tb, ma, mb):
    cm = gcv.tmst(r, n)
    ours = gcv.apply_two_sided(cm, gcv.ChannelMoments.deterministic(ta), gcv.ChannelMoments.deterministic(tb), ma, mb)
    brute = lossy_channel_brute(cm.matrix(), ta, tb, ma, mb)
    assert np.allclose(ours.matrix(), brute, rtol=1e-12, atol=1e-12)
    one = gcv.apply_one_sided(cm, gcv.ChannelMoments.deterministic(tb), mb)
    assert np.allclose(one.matrix(), lossy_channel_brute(cm.matrix(), 1.0, tb, 1.0, mb), rtol=1e-12, atol=1e-12)
    assert gcv.pt_symplectic_eig(ours) == pytest.approx(pt_min_eig_brute(brute), rel=1e-7)
    assert gcv.fidelity_bk(ours) == pytest.approx(fidelity_brute(brute), rel=1e-12)
    assert gcv.is_physical(ours, tol=1e-7)


@settings(max_examples=200)
@given(squeezing, photons, transmissivity, env)
def test_separable_states_never_beat_classical_fidelity(r, n, t, m):
    cm = gcv.apply_one_sided(gcv.tmst(r, n), gcv.ChannelMoments.deterministic(t), m)
    if gcv.negativity(cm) == 0.0:
        assert gcv.fidelity_bk(cm) <= 0.5 + 1e-12


def test_unphysical_detected():
    assert not gcv.is_physical(gcv.TwoModeCM(1.0, 1.0, 0.5))
    assert not gcv.is_physical(gcv.TwoModeCM(-1.0, 1.0, 0.0))


def test_channel_moments_validation():
    with pytest.raises(DomainError):
        gcv.ChannelMoments(1.5, 1.0)
    with pytest.raises(DomainError):
        gcv.ChannelMoments(0.25, 0.6)
    with pytest.raises(DomainError):
        gcv.tmsv(-1.0)
    with pytest.raises(DomainError):
        gcv.tmst(1.0, -1.0)


def test_lossless_fading_is_identity():
    cm = gcv.tmsv(1.0)
    assert gcv.apply_one_sided(cm, gcv.IDENTITY, 7.0) == cm


@pytest.mark.parametrize("m", [11.0, 1 + 2 * 266.0, 1 + 2 * 1200.547])
@pytest.mark.parametrize("r", [0.5, 1.0])
def test_thresholds_are_where_entanglement_vanishes(r, m):
    cm = gcv.tmsv(r)
    t_asym = gcv.entanglement_threshold_asym(cm.a, cm.c, m)
    t_sym = gcv.entanglement_threshold_sym(cm.a, cm.c, m)

    def nu_one(t):
        return gcv.pt_symplectic_eig(gcv.apply_one_sided(cm, gcv.ChannelMoments.deterministic(t), m)) - 1.0

    def nu_two(t):
        mom = gcv.ChannelMoments.deterministic(t)
        return gcv.pt_symplectic_eig(gcv.apply_two_sided(cm, mom, mom, m, m)) - 1.0

    assert so.brentq(nu_one, 1e-9, 1.0, xtol=1e-15) == pytest.approx(t_asym, abs=1e-9)
    assert so.brentq(nu_two, 1e-9, 1.0, xtol=1e-15) == pytest.approx(t_sym, abs=1e-9)
    assert t_sym >= t_asym


def test_published_thresholds():
    cm = gcv.tmsv(1.0)
    assert gcv.entanglement_threshold_asym(cm.a, cm.c, 1 + 2 * 266.0) == pytest.approx(0.996, abs=5e-4)
    assert gcv.entanglement_threshold_sym(cm.a, cm.c, 1 + 2 * 266.0) == pytest.approx(0.998, abs=5e-4)
    with pytest.raises(DomainError):
        gcv.entanglement_threshold_asym(cm.a, cm.c, 1.0)


LAW = FadingParams(0.8, 2.4, 0.3, 0.25)
LAW2 = FadingParams(0.6, 2.0, 0.5, 0.3)


def test_fast_average_uses_moments():
    cm = gcv.tmsv(1.0)
    t1, t2 = fading_moments(LAW)
    expected = gcv.fidelity_bk(gcv.apply_one_sided(cm, gcv.ChannelMoments(t1, t2), 3.0))
    assert gcv.average_fast(cm, LAW, 3.0, "fidelity") == pytest.approx(expected)
    assert gcv.average_fast(cm, gcv.ChannelMoments(t1, t2), 3.0, "fidelity") == pytest.approx(expected)


@pytest.mark.parametrize("m", [1.0, 1.5, 30.0])
def test_fast_fidelity_is_harmonic_mean(m):
    """1/F is affine in (tau, sqrt tau), so F_fast = 1/<1/F> <= <F> = F_slow."""
    cm = gcv.tmsv(1.0)
    fast = gcv.average_fast(cm, LAW, m, "fidelity")
    slow = gcv.average_slow(cm, LAW, m, "fidelity")
    from cvlink.fading_channel import expect

    inv = expect(LAW, lambda t: 1.0 / gcv.fidelity_bk(gcv.apply_one_sided(cm, gcv.ChannelMoments.deterministic(t), m)))
    assert fast == pytest.approx(1.0 / inv, rel=1e-9)
    assert fast <= slow


@pytest.mark.parametrize("obs", ["negativity", "fidelity"])
def test_slow_averages_against_monte_carlo(obs):
    cm = gcv.tmsv(1.0)
    f = gcv.observable_fn(obs)
    n = 200_000
    td, tu = sample_tau(LAW, 1, n), sample_tau(LAW2, 2, n)
    a = td * cm.a + (1 - td) * 1.2
    b = tu * cm.b + (1 - tu) * 1.5
    c = np.sqrt(td * tu) * cm.c
    vals = gcv._observable_array(obs, a, b, c)
    got = gcv.average_slow(cm, LAW, 1.2, obs, LAW2, 1.5)
    assert abs(got - vals.mean()) < 4.5 * vals.std() / math.sqrt(n)

    one = np.array([f(gcv.apply_one_sided(cm, gcv.ChannelMoments.deterministic(t), 1.2)) for t in td[:20000]])
    assert abs(gcv.average_slow(cm, LAW, 1.2, obs) - one.mean()) < 4.5 * one.std() / math.sqrt(one.size)

    casc = gcv._observable_array(obs, np.full(n, cm.a), td * tu * cm.b + (1 - td * tu) * 1.2, np.sqrt(td * tu) * cm.c)
    got_c = gcv.average_slow_cascade(cm, LAW, LAW2, 1.2, obs)
    assert abs(got_c - casc.mean()) < 4.5 * casc.std() / math.sqrt(n)


def test_two_sided_slow_order_convergence():
    cm = gcv.tmsv(1.0)
    coarse = gcv.average_slow(cm, LAW, 1.2, "fidelity", LAW2, 1.5, nodes=64, check_nodes=None)
    fine = gcv.average_slow(cm, LAW, 1.2, "fidelity", LAW2, 1.5, nodes=256, check_nodes=None)
    assert coarse == pytest.approx(fine, rel=1e-6)


def test_deterministic_slow_equals_fast():
    cm = gcv.tmsv(1.0)
    law = FadingParams(0.7, 2.0, 0.3, 0.0)
    assert gcv.average_slow(cm, law, 2.0, "negativity", law, 2.0) == pytest.approx(
        gcv.average_fast(cm, law, 2.0, "negativity", law, 2.0)
    )


def test_symmetry_comparison():
    asym = gcv.TwoModeCM(3.0, 1.5, 1.6)
    nu = gcv.pt_symplectic_eig(asym)
    sym = gcv.TwoModeCM(2.0, 2.0, 2.0 - nu)
    cmp = gcv.symmetry_fidelity_compare(sym, asym)
    assert cmp.higher == 1
    assert cmp.first_order_predicts == 1 and cmp.first_order_agrees
    assert cmp.fidelity_1 > cmp.fidelity_2
    tie = gcv.symmetry_fidelity_compare(sym, sym)
    assert tie.higher == 0


@settings(max_examples=300)
@given(st.floats(0.05, 2.5), st.floats(0.0, 0.5), transmissivity, transmissivity, st.floats(1.0, 2.0), st.floats(1.0, 2.0), st.floats(0.0, 3.0))
def test_symmetric_partner_teleports_at_least_as_well(r, n, ta, tb, ma, mb, extra):
    cm = gcv.apply_two_sided(
        gcv.tmst(r, n), gcv.ChannelMoments.deterministic(ta), gcv.ChannelMoments.deterministic(tb), ma, mb
    )
    nu = gcv.pt_symplectic_eig(cm)
    assume(0.0 < nu < 1.0)
    delta = 0.5 * (nu + 1 / nu) * (1 + extra)
    sym = gcv.TwoModeCM(delta, delta, delta - nu)
    assert gcv.is_physical(sym, tol=1e-9)
    assert gcv.negativity(sym) == pytest.approx(gcv.negativity(cm), rel=1e-9)
    assert gcv.fidelity_bk(sym) >= gcv.fidelity_bk(cm) * (1 - 1e-12)
