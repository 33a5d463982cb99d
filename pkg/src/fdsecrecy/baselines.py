"""Comparison schemes: full duplex, perfect full duplex and two-phase half duplex.

Half duplex splits the slot in two equal phases.  In the first the base
station uses all ``n_tx + n_rx`` antennas to serve the downlink user with
artificial noise against the idle user while the uplink user is silent; in the
second it listens on all antennas with a matched filter while the uplink user
transmits and the base station is silent.  Rates of both phases are halved and
the energy requirement applies to the time average over the slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ChannelSet, ContractError, SystemConfig
from .spca import LOG2E, SecrecyProblem, solve_problem, spca_solve

__all__ = [
    "BaselineResult",
    "SCHEMES",
    "full_duplex_solve",
    "perfect_fd_solve",
    "half_duplex_solve",
    "hd_phase1_problem",
    "hd_energy_bound",
    "check_hd_feasible",
    "hd_uplink_rates",
    "solve_scheme",
]

SCHEMES = ("full-duplex", "perfect-fd", "half-duplex")


@dataclass(frozen=True)
class BaselineResult:
    scheme: str
    rate: float          # sum secrecy rate, bits/s/Hz
    energy: float        # harvested energy, watts
    r_d: float
    r_u: float
    iterations: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ContractError(f"unknown scheme {self.scheme!r}")
        if min(self.rate, self.r_d, self.r_u) < 0 or self.energy < 0:
            raise ContractError("rates and energy must be nonnegative")


def full_duplex_solve(ch: ChannelSet, cfg: SystemConfig, **kw) -> BaselineResult:
    d, _, rep, trace = spca_solve(ch, cfg, **kw)
    return BaselineResult("full-duplex", rep.r_sum, rep.energy, rep.r_d_sec, rep.r_u_sec,
                          trace.iterations)


def perfect_fd_solve(ch: ChannelSet, cfg: SystemConfig, **kw) -> BaselineResult:
    """Full duplex with the self-interference channel removed."""
    clean = ch.with_h_si(np.zeros_like(ch.h_si))
    d, _, rep, trace = spca_solve(clean, cfg, **kw)
    return BaselineResult("perfect-fd", rep.r_sum, rep.energy, rep.r_d_sec, rep.r_u_sec,
                          trace.iterations)


def _hd_vectors(ch: ChannelSet, cfg: SystemConfig):
    ch.check(cfg)
    if ch.h_d_extra is None or ch.h_i_extra is None or ch.g_u_extra is None:
        raise ContractError("half duplex needs the extra antenna entries of the channel set")
    h_d = np.concatenate([ch.h_d, ch.h_d_extra])
    h_i = np.concatenate([ch.h_i, ch.h_i_extra])
    g_u = np.concatenate([ch.g_u, ch.g_u_extra])
    n = cfg.n_tx + cfg.n_rx
    if h_d.size != n or h_i.size != n or g_u.size != n:
        raise ContractError(
            f"half-duplex channels must have length {n}, got "
            f"{(h_d.size, h_i.size, g_u.size)}")
    return h_d, h_i, g_u


def hd_phase1_problem(ch: ChannelSet, cfg: SystemConfig) -> SecrecyProblem:
    """Downlink-only program of the first phase, with the slot-average energy constraint.

    The idle user harvests ``zeta h_i^H (S+V) h_i`` in phase one and
    ``zeta p_u |g_i|^2`` in phase two; each phase lasts half the slot.
    """
    h_d, h_i, _ = _hd_vectors(ch, cfg)
    pu_gi = cfg.p_u * abs(ch.g_i) ** 2
    return SecrecyProblem(
        h_d=h_d, h_i=h_i, c_d=cfg.sigma_z2, c_i=cfg.sigma_z2, noise=cfg.sigma_z2,
        p_bs=cfg.p_bs, e_min=cfg.e_min,
        energy_gain=0.5 * cfg.zeta, energy_const=0.5 * cfg.zeta * pu_gi,
    )


def hd_uplink_rates(ch: ChannelSet, cfg: SystemConfig) -> tuple:
    """Phase-two uplink SINRs ``(gamma_u, gamma_i)``: matched filter, no artificial noise."""
    _, _, g_u = _hd_vectors(ch, cfg)
    gamma_u = cfg.p_u * float(np.vdot(g_u, g_u).real) / cfg.sigma_z2
    gamma_i = cfg.p_u * abs(ch.g_i) ** 2 / cfg.sigma_z2
    return gamma_u, gamma_i


def half_duplex_solve(ch: ChannelSet, cfg: SystemConfig, **kw) -> BaselineResult:
    problem = hd_phase1_problem(ch, cfg)
    res = solve_problem(problem, **kw)
    s, v = res.design.s_cov, res.design.v_cov
    r_d1 = max(problem.link_rates(s, v)[0], 0.0) if res.links[0] else 0.0
    gamma_u, gamma_i = hd_uplink_rates(ch, cfg)
    r_u2 = max(0.0, (math.log1p(gamma_u) - math.log1p(gamma_i)) * LOG2E)
    energy = problem.energy(s, v)
    return BaselineResult("half-duplex", 0.5 * (r_d1 + r_u2), energy, 0.5 * r_d1, 0.5 * r_u2,
                          res.trace.iterations)


_SOLVERS = {
    "full-duplex": full_duplex_solve,
    "perfect-fd": perfect_fd_solve,
    "half-duplex": half_duplex_solve,
}


def solve_scheme(scheme: str, ch: ChannelSet, cfg: SystemConfig, **kw) -> BaselineResult:
    try:
        fn = _SOLVERS[scheme]
    except KeyError:
        raise ContractError(f"unknown scheme {scheme!r}; choose from {SCHEMES}") from None
    return fn(ch, cfg, **kw)


def hd_energy_bound(ch: ChannelSet, cfg: SystemConfig) -> float:
    """Largest slot-average harvestable energy of the half-duplex scheme."""
    return hd_phase1_problem(ch, cfg).energy_max


def check_hd_feasible(ch: ChannelSet, cfg: SystemConfig) -> Optional[str]:
    bound = hd_energy_bound(ch, cfg)
    if cfg.e_min > bound:
        return (f"energy requirement e_min={cfg.e_min:.6g} W exceeds the half-duplex "
                f"maximum {bound:.6g} W")
    return None

