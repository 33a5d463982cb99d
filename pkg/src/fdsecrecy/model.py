"""Physical-layer model of the full-duplex secrecy SWIPT link.

Every quantity here is computed from transmit covariances in closed form;
no symbols or waveforms are ever sampled.  Powers are in watts, rates in
bits/s/Hz.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

__all__ = [
    "ContractError",
    "InfeasibleError",
    "NumericalError",
    "SystemConfig",
    "ChannelSet",
    "TransmitDesign",
    "RatesReport",
    "db_to_linear",
    "quad_form",
    "downlink_sinr",
    "uplink_sinr_with_receiver",
    "eve_downlink_sinr",
    "eve_uplink_sinr",
    "secrecy_rates",
    "harvested_energy",
    "energy_bound",
    "is_feasible",
    "check_design",
    "full_report",
]

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9


class ContractError(ValueError):
    """Raised when inputs violate a documented precondition."""


class InfeasibleError(RuntimeError):
    """Raised when an instance admits no design meeting the constraints."""


class NumericalError(RuntimeError):
    """Raised when a factorization or iteration breaks down."""


def db_to_linear(db: float) -> float:
    """Power ratio for a value in dB (relative to 1 W for absolute powers)."""
    return float(10.0 ** (db / 10.0))


@dataclass(frozen=True)
class SystemConfig:
    n_tx: int = 4
    n_rx: int = 4
    p_bs: float = 1.0
    p_u: float = 0.1
    zeta: float = 0.5
    sigma_z2: float = 1e-8
    sigma_si2: float = 1e-6
    e_min: float = 1e-3
    attn_bs_idle_db: float = 30.0
    attn_other_db: float = 70.0

    def __post_init__(self):
        if int(self.n_tx) != self.n_tx or self.n_tx < 1:
            raise ContractError(f"n_tx must be a positive integer, got {self.n_tx}")
        if int(self.n_rx) != self.n_rx or self.n_rx < 1:
            raise ContractError(f"n_rx must be a positive integer, got {self.n_rx}")
        if not self.p_bs > 0:
            raise ContractError(f"p_bs must be > 0, got {self.p_bs}")
        if not self.p_u >= 0:
            raise ContractError(f"p_u must be >= 0, got {self.p_u}")
        if not 0 < self.zeta <= 1:
            raise ContractError(f"zeta must lie in (0, 1], got {self.zeta}")
        if not self.sigma_z2 > 0:
            raise ContractError(f"sigma_z2 must be > 0, got {self.sigma_z2}")
        if not self.sigma_si2 >= 0:
            raise ContractError(f"sigma_si2 must be >= 0, got {self.sigma_si2}")
        if not self.e_min >= 0:
            raise ContractError(f"e_min must be >= 0, got {self.e_min}")
        if self.attn_bs_idle_db < 0 or self.attn_other_db < 0:
            raise ContractError("attenuations must be >= 0 dB")

    def replace(self, **changes) -> "SystemConfig":
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemConfig(**values)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _frozen(a, dtype=complex, ndim=1) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    if ndim == 0:
        arr = arr.reshape(())
    if arr.ndim != ndim:
        raise ContractError(f"expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("channel entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One block-static realization of every channel in the system.

    The optional ``*_extra`` vectors hold the additional antenna entries used
    by the half-duplex baseline, where all ``n_tx + n_rx`` antennas serve one
    direction at a time.
    """

    h_d: np.ndarray
    h_i: np.ndarray
    g_d: complex
    g_i: complex
    g_u: np.ndarray
    h_si: np.ndarray
    h_d_extra: Optional[np.ndarray] = None
    h_i_extra: Optional[np.ndarray] = None
    g_u_extra: Optional[np.ndarray] = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "h_d", _frozen(self.h_d))
        set_(self, "h_i", _frozen(self.h_i))
        set_(self, "g_u", _frozen(self.g_u))
        set_(self, "h_si", _frozen(self.h_si, ndim=2))
        for name in ("g_d", "g_i"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ContractError(f"{name} must be finite")
            set_(self, name, v)
        for name in ("h_d_extra", "h_i_extra", "g_u_extra"):
            if getattr(self, name) is not None:
                set_(self, name, _frozen(getattr(self, name)))
        if self.h_d.shape != self.h_i.shape:
            raise ContractError("h_d and h_i must have the same length")
        if self.h_si.shape != (self.g_u.size, self.h_d.size):
            raise ContractError(
                f"h_si must be n_rx x n_tx = {(self.g_u.size, self.h_d.size)}, "
                f"got {self.h_si.shape}")

    @property
    def n_tx(self) -> int:
        return self.h_d.size

    @property
    def n_rx(self) -> int:
        return self.g_u.size

    def check(self, cfg: SystemConfig) -> None:
        if self.n_tx != cfg.n_tx or self.n_rx != cfg.n_rx:
            raise ContractError(
                f"channel dimensions ({self.n_tx}, {self.n_rx}) do not match "
                f"config ({cfg.n_tx}, {cfg.n_rx})")

    def with_h_si(self, h_si: np.ndarray) -> "ChannelSet":
        return ChannelSet(self.h_d, self.h_i, self.g_d, self.g_i, self.g_u, h_si,
                          self.h_d_extra, self.h_i_extra, self.g_u_extra)

    def digest(self) -> str:
        """Stable content hash, used to prove that paired runs share channels."""
        h = hashlib.sha256()
        for name in ("h_d", "h_i", "g_u", "h_si", "h_d_extra", "h_i_extra", "g_u_extra"):
            arr = getattr(self, name)
            h.update(name.encode())
            if arr is not None:
                h.update(np.ascontiguousarray(arr).tobytes())
        h.update(np.array([self.g_d, self.g_i]).tobytes())
        return h.hexdigest()


def _hermitian(m, name: str) -> np.ndarray:
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError(f"{name} must be square, got shape {m.shape}")
    sym = 0.5 * (m + m.conj().T)
    if np.linalg.norm(m - sym) > HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
        raise ContractError(f"{name} is not Hermitian")
    sym.setflags(write=False)
    return sym


@dataclass(frozen=True, eq=False)
class TransmitDesign:
    """Information covariance ``s_cov`` and artificial-noise covariance ``v_cov``."""

    s_cov: np.ndarray
    v_cov: np.ndarray

    def __post_init__(self):
        s = _hermitian(self.s_cov, "s_cov")
        v = _hermitian(self.v_cov, "v_cov")
        if s.shape != v.shape:
            raise ContractError("s_cov and v_cov must have the same shape")
        for m, name in ((s, "s_cov"), (v, "v_cov")):
            lam = np.linalg.eigvalsh(m)[0]
            if lam < -PSD_TOL * max(np.trace(m).real, 1e-300):
                raise ContractError(f"{name} is not positive semidefinite (min eig {lam:.3e})")
        object.__setattr__(self, "s_cov", s)
        object.__setattr__(self, "v_cov", v)

    @classmethod
    def zeros(cls, n_tx: int) -> "TransmitDesign":
        z = np.zeros((n_tx, n_tx))
        return cls(z, z)

    @property
    def n_tx(self) -> int:
        return self.s_cov.shape[0]

    @property
    def total_power(self) -> float:
        return float(np.trace(self.s_cov).real + np.trace(self.v_cov).real)

    @property
    def total_cov(self) -> np.ndarray:
        return self.s_cov + self.v_cov


@dataclass(frozen=True)
class RatesReport:
    gamma_d: float
    gamma_u: float
    gamma_i_d: float
    gamma_i_u: float
    r_d_sec: float
    r_u_sec: float
    r_sum: float
    energy: float


def quad_form(h: np.ndarray, m: np.ndarray) -> float:
    """Real value of ``h^H M h`` for Hermitian ``M``.

    The imaginary residue is asserted to be rounding noise before it is dropped.
    """
    val = np.vdot(h, m @ h)
    scale = float(np.vdot(h, h).real) * max(np.abs(m).max(initial=0.0), 1e-300)
    if abs(val.imag) > 1e-12 * max(abs(val.real), scale):
        raise ContractError(f"quadratic form has non-negligible imaginary part {val.imag:.3e}")
    return float(val.real)


def _check(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> None:
    ch.check(cfg)
    if d.n_tx != cfg.n_tx:
        raise ContractError(f"design is {d.n_tx}x{d.n_tx}, config has n_tx={cfg.n_tx}")


def downlink_sinr(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> float:
    _check(ch, d, cfg)
    den = quad_form(ch.h_d, d.v_cov) + cfg.p_u * abs(ch.g_d) ** 2 + cfg.sigma_z2
    return max(quad_form(ch.h_d, d.s_cov), 0.0) / den


def uplink_sinr_with_receiver(ch: ChannelSet, d: TransmitDesign, w: np.ndarray,
                              cfg: SystemConfig) -> float:
    _check(ch, d, cfg)
    w = np.asarray(getattr(w, "w", w), dtype=complex)
    if w.shape != (cfg.n_rx,):
        raise ContractError(f"receiver must have length {cfg.n_rx}")
    nrm2 = float(np.vdot(w, w).real)
    if abs(np.sqrt(nrm2) - 1.0) > 1e-10:
        raise ContractError(f"receiver must have unit norm, got {np.sqrt(nrm2)!r}")
    a = ch.h_si.conj().T @ w
    si = quad_form(a, d.total_cov)
    return cfg.p_u * abs(np.vdot(w, ch.g_u)) ** 2 / (max(si, 0.0) + cfg.sigma_z2 * nrm2)


def eve_downlink_sinr(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> float:
    _check(ch, d, cfg)
    den = quad_form(ch.h_i, d.v_cov) + cfg.p_u * abs(ch.g_i) ** 2 + cfg.sigma_z2
    return max(quad_form(ch.h_i, d.s_cov), 0.0) / den


def eve_uplink_sinr(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> float:
    _check(ch, d, cfg)
    den = quad_form(ch.h_i, d.v_cov) + quad_form(ch.h_i, d.s_cov) + cfg.sigma_z2
    return cfg.p_u * abs(ch.g_i) ** 2 / max(den, cfg.sigma_z2)


def secrecy_rates(gamma_main_dl: float, gamma_eve_dl: float,
                  gamma_main_ul: float, gamma_eve_ul: float) -> tuple[float, float]:
    """Downlink and uplink secrecy rates in bits/s/Hz, each clamped at zero."""
    g = (gamma_main_dl, gamma_eve_dl, gamma_main_ul, gamma_eve_ul)
    if any(not (x >= 0) for x in g):
        raise ContractError(f"SINRs must be nonnegative, got {g}")
    r_d = np.log2(1.0 + gamma_main_dl) - np.log2(1.0 + gamma_eve_dl)
    r_u = np.log2(1.0 + gamma_main_ul) - np.log2(1.0 + gamma_eve_ul)
    return max(0.0, float(r_d)), max(0.0, float(r_u))


def harvested_energy(ch: ChannelSet, d: TransmitDesign, cfg: SystemConfig) -> float:
    _check(ch, d, cfg)
    rx = quad_form(ch.h_i, d.s_cov) + quad_form(ch.h_i, d.v_cov) + cfg.p_u * abs(ch.g_i) ** 2
    return cfg.zeta * max(rx, 0.0)


def energy_bound(ch: ChannelSet, cfg: SystemConfig) -> float:
    """Largest harvestable energy under the power budget."""
    ch.check(cfg)
    return cfg.zeta * (cfg.p_bs * float(np.vdot(ch.h_i, ch.h_i).real)
                       + cfg.p_u * abs(ch.g_i) ** 2)


def is_feasible(ch: ChannelSet, cfg: SystemConfig) -> bool:
    return cfg.e_min <= energy_bound(ch, cfg)


def check_design(d: TransmitDesign, ch: ChannelSet, cfg: SystemConfig,
                 rtol: float = 1e-8) -> dict:
    """Relative violations of the power budget and the energy requirement.

    Returns a dict with nonnegative entries ``power`` and ``energy``; both are
    zero for a feasible design.
    """
    power = max(0.0, d.total_power - cfg.p_bs) / cfg.p_bs
    e = harvested_energy(ch, d, cfg)
    energy = max(0.0, cfg.e_min - e) / max(cfg.e_min, 1e-300) if cfg.e_min > 0 else 0.0
    return {"power": power, "energy": energy, "ok": power <= rtol and energy <= rtol}


def full_report(ch: ChannelSet, d: TransmitDesign, w, cfg: SystemConfig) -> RatesReport:
    g_d = downlink_sinr(ch, d, cfg)
    g_u = uplink_sinr_with_receiver(ch, d, w, cfg)
    g_id = eve_downlink_sinr(ch, d, cfg)
    g_iu = eve_uplink_sinr(ch, d, cfg)
    r_d, r_u = secrecy_rates(g_d, g_id, g_u, g_iu)
    return RatesReport(
        gamma_d=g_d, gamma_u=g_u, gamma_i_d=g_id, gamma_i_u=g_iu,
        r_d_sec=r_d, r_u_sec=r_u, r_sum=r_d + r_u,
        energy=harvested_energy(ch, d, cfg),
    )
