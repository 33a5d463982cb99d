import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdsecrecy.model import (
    ChannelSet,
    ContractError,
    SystemConfig,
    TransmitDesign,
    db_to_linear,
    downlink_sinr,
    energy_bound,
    eve_downlink_sinr,
    eve_uplink_sinr,
    full_report,
    harvested_energy,
    is_feasible,
    quad_form,
    secrecy_rates,
    uplink_sinr_with_receiver,
)

from conftest import cn, random_design, scalar_channels


def qf_loops(h, m):
    """h^H M h by explicit double summation."""
    total = 0j
    for a in range(len(h)):
        for b in range(len(h)):
            total += np.conj(h[a]) * m[a, b] * h[b]
    return total.real


def random_channels(rng, n_tx, n_rx):
    return ChannelSet(cn(rng, 1e-7, n_tx), cn(rng, 1e-3, n_tx), cn(rng, 1e-7, 1)[0],
                      cn(rng, 1e-7, 1)[0], cn(rng, 1e-7, n_rx), cn(rng, 1e-6, n_rx, n_tx))


def test_config_defaults():
    cfg = SystemConfig()
    assert (cfg.n_tx, cfg.n_rx, cfg.p_bs, cfg.p_u, cfg.zeta) == (4, 4, 1.0, 0.1, 0.5)
    assert cfg.sigma_z2 == 1e-8
    assert (cfg.attn_bs_idle_db, cfg.attn_other_db) == (30.0, 70.0)


@pytest.mark.parametrize("bad", [
    {"n_tx": 0}, {"n_rx": 0}, {"p_bs": 0.0}, {"p_u": -1.0}, {"zeta": 0.0}, {"zeta": 1.5},
    {"sigma_z2": 0.0}, {"e_min": -1e-3}, {"attn_other_db": -1.0}, {"sigma_si2": -1.0},
])
def test_config_rejects_invalid(bad):
    with pytest.raises(ContractError):
        SystemConfig(**bad)


def test_config_replace_unknown_key():
    with pytest.raises(ContractError):
        SystemConfig().replace(bogus=1)


def test_db_convention():
    assert db_to_linear(-80) == pytest.approx(1e-8)
    assert db_to_linear(-30) == pytest.approx(1e-3)


def test_channel_dimension_checks(cfg):
    rng = np.random.default_rng(0)
    with pytest.raises(ContractError):
        ChannelSet(cn(rng, 1, 4), cn(rng, 1, 3), 0, 0, cn(rng, 1, 4), cn(rng, 1, 4, 4))
    with pytest.raises(ContractError):
        ChannelSet(cn(rng, 1, 4), cn(rng, 1, 4), 0, 0, cn(rng, 1, 4), cn(rng, 1, 4, 3))
    with pytest.raises(ContractError):
        ChannelSet([np.nan], [1.0], 0, 0, [1.0], [[0.0]])
    ch = random_channels(rng, 2, 3)
    with pytest.raises(ContractError):
        downlink_sinr(ch, TransmitDesign.zeros(2), cfg)


def test_design_contract():
    with pytest.raises(ContractError):
        TransmitDesign(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros((2, 2)))
    with pytest.raises(ContractError):
        TransmitDesign(np.diag([1.0, -0.5]), np.zeros((2, 2)))
    d = TransmitDesign(np.eye(2) * 0.25, np.eye(2) * 0.25)
    assert d.total_power == pytest.approx(1.0)


def test_downlink_sinr_examples(cfg):
    c1 = SystemConfig(n_tx=1, n_rx=1)
    ch = scalar_channels(h_d=1.0, g_d=0.0)
    assert downlink_sinr(ch, TransmitDesign([[2e-8]], [[0.0]]), c1) == pytest.approx(2.0, rel=1e-14)
    assert downlink_sinr(ch, TransmitDesign([[0.0]], [[0.3]]), c1) == 0.0


def test_eve_sinr_examples():
    c1 = SystemConfig(n_tx=1, n_rx=1)
    ch = scalar_channels(h_i=1.0, g_i=0.0)
    assert eve_downlink_sinr(ch, TransmitDesign([[1e-8]], [[0.0]]), c1) == pytest.approx(1.0)
    assert eve_downlink_sinr(ch, TransmitDesign([[0.0]], [[1.0]]), c1) == 0.0
    ch = scalar_channels(g_i=math.sqrt(1e-7))
    assert eve_uplink_sinr(ch, TransmitDesign.zeros(1), c1) == pytest.approx(1.0)
    assert eve_uplink_sinr(ch, TransmitDesign.zeros(1), c1.replace(p_u=0.0)) == 0.0


def test_uplink_sinr_examples():
    c = SystemConfig(n_tx=2, n_rx=2)
    rng = np.random.default_rng(3)
    g = cn(rng, 1e-7, 2)
    ch = ChannelSet(cn(rng, 1, 2), cn(rng, 1, 2), 0, 0, g, np.zeros((2, 2)))
    d = random_design(rng, 2)
    w = g / np.linalg.norm(g)
    assert uplink_sinr_with_receiver(ch, d, w, c) == pytest.approx(
        c.p_u * np.linalg.norm(g) ** 2 / c.sigma_z2, rel=1e-12)
    w_perp = np.array([-np.conj(g[1]), np.conj(g[0])])
    w_perp /= np.linalg.norm(w_perp)
    assert uplink_sinr_with_receiver(ch, d, w_perp, c) == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(ContractError):
        uplink_sinr_with_receiver(ch, d, 2 * w, c)


@pytest.mark.parametrize("n_tx,n_rx", [(2, 2), (4, 4), (3, 5)])
def test_sinrs_match_direct_summation(n_tx, n_rx):
    rng = np.random.default_rng(n_tx * 10 + n_rx)
    cfg = SystemConfig(n_tx=n_tx, n_rx=n_rx)
    for _ in range(5):
        ch = random_channels(rng, n_tx, n_rx)
        d = random_design(rng, n_tx)
        s, v = d.s_cov, d.v_cov
        exp_d = qf_loops(ch.h_d, s) / (qf_loops(ch.h_d, v) + cfg.p_u * abs(ch.g_d) ** 2 + cfg.sigma_z2)
        exp_id = qf_loops(ch.h_i, s) / (qf_loops(ch.h_i, v) + cfg.p_u * abs(ch.g_i) ** 2 + cfg.sigma_z2)
        exp_iu = cfg.p_u * abs(ch.g_i) ** 2 / (qf_loops(ch.h_i, v) + qf_loops(ch.h_i, s) + cfg.sigma_z2)
        exp_e = cfg.zeta * (qf_loops(ch.h_i, s) + qf_loops(ch.h_i, v) + cfg.p_u * abs(ch.g_i) ** 2)
        assert downlink_sinr(ch, d, cfg) == pytest.approx(exp_d, rel=1e-12)
        assert eve_downlink_sinr(ch, d, cfg) == pytest.approx(exp_id, rel=1e-12)
        assert eve_uplink_sinr(ch, d, cfg) == pytest.approx(exp_iu, rel=1e-12)
        assert harvested_energy(ch, d, cfg) == pytest.approx(exp_e, rel=1e-12)
        w = cn(rng, 1, n_rx)
        w /= np.linalg.norm(w)
        num = cfg.p_u * abs(sum(np.conj(w[a]) * ch.g_u[a] for a in range(n_rx))) ** 2
        a_vec = ch.h_si.conj().T @ w
        exp_u = num / (qf_loops(a_vec, d.total_cov) + cfg.sigma_z2)
        assert uplink_sinr_with_receiver(ch, d, w, cfg) == pytest.approx(exp_u, rel=1e-12)


def test_secrecy_rate_examples():
    assert secrecy_rates(3.0, 3.0, 0.0, 0.0) == (0.0, 0.0)
    assert secrecy_rates(1.0, 0.0, 0.0, 0.0)[0] == pytest.approx(1.0)
    assert secrecy_rates(0.0, 3.0, 0.0, 0.0)[0] == 0.0
    assert secrecy_rates(0.0, 0.0, 1.0, 0.0)[1] == pytest.approx(1.0)
    with pytest.raises(ContractError):
        secrecy_rates(-1.0, 0.0, 0.0, 0.0)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_secrecy_rates_nonnegative_and_zero_on_equal(a, b):
    r_d, r_u = secrecy_rates(a, b, b, a)
    assert r_d >= 0 and r_u >= 0
    assert secrecy_rates(a, a, b, b) == (0.0, 0.0)


def test_harvested_energy_example():
    c1 = SystemConfig(n_tx=1, n_rx=1)
    ch = scalar_channels(g_i=math.sqrt(1e-7))
    assert harvested_energy(ch, TransmitDesign.zeros(1), c1) == pytest.approx(5e-9, rel=1e-12)


@given(st.floats(0.01, 10.0), st.integers(0, 2**31))
def test_energy_scales_linearly_in_bs_terms(alpha, seed):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(n_tx=3, n_rx=2)
    ch = random_channels(rng, 3, 2)
    d = random_design(rng, 3, p_max=0.09)
    const = cfg.zeta * cfg.p_u * abs(ch.g_i) ** 2
    e1 = harvested_energy(ch, d, cfg) - const
    e2 = harvested_energy(ch, TransmitDesign(alpha * d.s_cov, alpha * d.v_cov), cfg) - const
    assert e2 == pytest.approx(alpha * e1, rel=1e-9)


@given(st.integers(0, 2**31))
def test_all_sinrs_finite_nonnegative(seed):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig()
    ch = random_channels(rng, 4, 4)
    d = random_design(rng, 4)
    w = cn(rng, 1, 4)
    w /= np.linalg.norm(w)
    vals = [downlink_sinr(ch, d, cfg), eve_downlink_sinr(ch, d, cfg),
            eve_uplink_sinr(ch, d, cfg), uplink_sinr_with_receiver(ch, d, w, cfg)]
    assert all(math.isfinite(x) and x >= 0 for x in vals)


def test_quad_form_real_and_guarded():
    rng = np.random.default_rng(1)
    h = cn(rng, 1, 4)
    a = cn(rng, 1, 4, 4)
    m = a + a.conj().T
    val = quad_form(h, m)
    assert isinstance(val, float)
    with pytest.raises(ContractError):
        quad_form(h, 1j * np.eye(4) + m)


def test_feasibility_boundary():
    rng = np.random.default_rng(5)
    ch = random_channels(rng, 4, 4)
    cfg = SystemConfig()
    bound = energy_bound(ch, cfg)
    assert bound == pytest.approx(cfg.zeta * (cfg.p_bs * np.linalg.norm(ch.h_i) ** 2
                                             + cfg.p_u * abs(ch.g_i) ** 2), rel=1e-12)
    assert is_feasible(ch, cfg.replace(e_min=bound))
    assert not is_feasible(ch, cfg.replace(e_min=bound * (1 + 1e-6)))
    assert is_feasible(ch, cfg.replace(e_min=0.0))


def test_full_report_composition():
    rng = np.random.default_rng(9)
    cfg = SystemConfig()
    ch = random_channels(rng, 4, 4)
    d = random_design(rng, 4)
    w = cn(rng, 1, 4)
    w /= np.linalg.norm(w)
    rep = full_report(ch, d, w, cfg)
    assert rep.gamma_d == downlink_sinr(ch, d, cfg)
    assert rep.gamma_u == uplink_sinr_with_receiver(ch, d, w, cfg)
    assert rep.gamma_i_d == eve_downlink_sinr(ch, d, cfg)
    assert rep.gamma_i_u == eve_uplink_sinr(ch, d, cfg)
    assert rep.energy == harvested_energy(ch, d, cfg)
    assert rep.r_sum - (rep.r_d_sec + rep.r_u_sec) == 0.0
    zero = full_report(ch, TransmitDesign.zeros(4), w, cfg)
    assert zero.r_d_sec == 0.0 and zero.r_u_sec >= 0.0
