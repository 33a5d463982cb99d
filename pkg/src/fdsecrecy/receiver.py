"""MMSE-type receive vector for the uplink and its closed-form SINR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import ChannelSet, ContractError, NumericalError, SystemConfig, TransmitDesign

__all__ = [
    "DegenerateChannelError",
    "ReceiveVector",
    "interference_covariance",
    "optimal_receiver",
    "uplink_sinr_closed_form",
]

COND_LIMIT = 1e12


class DegenerateChannelError(ContractError):
    """The uplink channel is identically zero."""


@dataclass(frozen=True, eq=False)
class ReceiveVector:
    w: np.ndarray
    ridged: bool = False

    def __post_init__(self):
        w = np.array(self.w, dtype=complex)
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise ContractError("receive vector must have unit norm")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def interference_covariance(ch: ChannelSet, total_cov: np.ndarray, sigma_z2: float) -> np.ndarray:
    """``sigma^2 I + H_SI (S + V) H_SI^H`` at the FD-BS receive array."""
    x = ch.h_si @ total_cov @ ch.h_si.conj().T
    x = 0.5 * (x + x.conj().T)
    x[np.diag_indices_from(x)] += sigma_z2
    return x


def _factor(x: np.ndarray, sigma_z2: float):
    ridged = False
    if np.linalg.cond(x) > COND_LIMIT:
        x = x + 1e-12 * sigma_z2 * np.eye(x.shape[0])
        ridged = True
    try:
        return cho_factor(x, lower=True), ridged
    except LinAlgError as exc:
        raise NumericalError(f"interference covariance is not positive definite: {exc}") from exc


def _whitened(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig):
    ch.check(cfg)
    if not np.any(ch.g_u):
        raise DegenerateChannelError("uplink channel g_u is zero")
    x = interference_covariance(ch, d.total_cov, cfg.sigma_z2)
    fac, ridged = _factor(x, cfg.sigma_z2)
    return cho_solve(fac, ch.g_u), ridged


def optimal_receiver(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> ReceiveVector:
    """Unit-norm ``X_U^{-1} g_U``, phase-fixed so its largest entry is real positive."""
    q, ridged = _whitened(ch, d, cfg)
    k = int(np.argmax(np.abs(q)))
    q = q * (abs(q[k]) / q[k])
    return ReceiveVector(q / np.linalg.norm(q), ridged)


def uplink_sinr_closed_form(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> float:
    if cfg.p_u == 0:
        return 0.0
    q, _ = _whitened(ch, d, cfg)
    return cfg.p_u * float(np.vdot(ch.g_u, q).real)
