"""Fast invariant checks behind ``fdsecrecy selftest``.

Each group returns ``(passed, detail)``.  ``fault="g-sign"`` flips the sign of
the trace term in the uplink-gain linearization; it exists so the test suite
can confirm that the conservativeness group notices.
"""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from . import subsolver as ss
from .harness import gen_channels
from .model import SystemConfig, TransmitDesign, uplink_sinr_with_receiver
from .receiver import optimal_receiver, uplink_sinr_closed_form
from .spca import (
    LinearizationPoint,
    SecrecyProblem,
    exp_tangent,
    g_linearization,
    spca_solve,
    uplink_gain,
)

__all__ = ["FAULTS", "random_design", "random_pd", "scalar_grid_oracle", "run_selftest"]

FAULTS = ("g-sign",)
SPOT_MAX_ITER = 1000


def random_pd(rng, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a @ a.conj().T / n + 0.1 * np.eye(n))


def random_design(rng, n: int, p_max: float) -> TransmitDesign:
    """Random PSD pair whose total power is a uniform fraction of ``p_max``."""
    s = random_pd(rng, n)
    v = random_pd(rng, n)
    if rng.random() < 0.3:
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        s = np.outer(u, u.conj())
    tot = float(np.trace(s + v).real)
    f = rng.uniform(0.05, 1.0) * p_max / tot
    return TransmitDesign(s * f, v * f)


def scalar_grid_oracle(ch, cfg: SystemConfig, points: int = 400) -> float:
    """Best sum secrecy rate of a single-antenna instance over a ``points x points`` grid.

    The grid covers ``(s, v) in [0, p_bs]^2`` with ``s + v <= p_bs``; points
    that miss the energy requirement are discarded.  Rates are each clamped at
    zero and evaluated with tight slacks, as in the optimizer.
    """
    if cfg.n_tx != 1 or cfg.n_rx != 1:
        raise ValueError("the grid oracle needs n_tx = n_rx = 1")
    pr = SecrecyProblem.from_channels(ch, cfg)
    g = np.linspace(0.0, cfg.p_bs, points)
    s, v = np.meshgrid(g, g, indexing="ij")
    ok = s + v <= cfg.p_bs * (1 + 1e-12)
    hd2 = abs(ch.h_d[0]) ** 2
    hi2 = abs(ch.h_i[0]) ** 2
    energy = pr.energy_gain * hi2 * (s + v) + pr.energy_const
    ok &= energy >= cfg.e_min
    if not ok.any():
        return -math.inf
    r_d = (np.log1p(hd2 * s / (hd2 * v + pr.c_d)) - np.log1p(hi2 * s / (hi2 * v + pr.c_i)))
    hsi2 = abs(ch.h_si[0, 0]) ** 2
    gamma_u = cfg.p_u * abs(ch.g_u[0]) ** 2 / (hsi2 * (s + v) + cfg.sigma_z2)
    gamma_iu = pr.eve_ul_power / (hi2 * (s + v) + cfg.sigma_z2)
    r_u = np.log1p(gamma_u) - np.log1p(gamma_iu)
    total = (np.maximum(r_d, 0) + np.maximum(r_u, 0)) / math.log(2.0)
    return float(total[ok].max())


# ---------------------------------------------------------------------------
# Groups


def _group_tangents(rng, fault):
    sign = -1.0 if fault == "g-sign" else 1.0
    y = rng.uniform(-30, 5, 20000)
    ys = rng.uniform(-30, 5, 20000)
    lin = np.array([exp_tangent(a, b) for a, b in zip(y, ys)])
    exp_bad = int(np.sum(lin > np.exp(y) * (1 + 1e-12)))
    cfg = SystemConfig()
    g_bad = 0
    for _ in range(200):
        ch = gen_channels(cfg, int(rng.integers(2**32)))
        x0 = random_pd(rng, cfg.n_rx, 1e-8)
        x1 = random_pd(rng, cfg.n_rx, 1e-8)
        lp = LinearizationPoint(None, None, 0.0, 0.0, x0)
        bound = g_linearization(x1, lp, ch, cfg, _sign=sign)
        true = uplink_gain(x1, ch.g_u, cfg.p_u)
        if bound > true * (1 + 1e-12):
            g_bad += 1
    ok = exp_bad == 0 and g_bad == 0
    return ok, f"exp violations {exp_bad}, uplink-gain violations {g_bad}"


def _group_receiver(rng, fault):
    cfg = SystemConfig()
    worst = 0.0
    for _ in range(200):
        ch = gen_channels(cfg, int(rng.integers(2**32)))
        d = random_design(rng, cfg.n_tx, cfg.p_bs)
        w = optimal_receiver(ch, d, cfg)
        a = uplink_sinr_closed_form(ch, d, cfg)
        b = uplink_sinr_with_receiver(ch, d, w, cfg)
        worst = max(worst, abs(a - b) / abs(a))
    return worst < 1e-8, f"max relative error {worst:.2e}"


def _group_embedding(rng, fault):
    worst = 0.0
    for n in (1, 2, 4, 8):
        for _ in range(20):
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            m = a + a.conj().T
            worst = max(worst, np.abs(ss.real_embedding_inverse(ss.real_embedding(m)) - m).max())
            worst = max(worst, np.abs(ss.from_coords(ss.to_coords(m), n) - m).max())
            ev = np.sort(np.linalg.eigvalsh(m))
            ev2 = np.sort(np.linalg.eigvalsh(ss.real_embedding(m)))
            worst = max(worst, np.abs(np.repeat(ev, 2) - ev2).max())
    return worst < 1e-12, f"max round-trip error {worst:.2e}"


def _group_scalar_oracle(rng, fault):
    # the spot check asks whether the iteration reaches the grid optimum, not
    # how fast, so it runs with a round budget well above the default
    cfg = SystemConfig(n_tx=1, n_rx=1, e_min=1e-4)
    checked = 0
    worst = -math.inf
    lo = 0
    seed = 0
    while checked < 3 and seed < 50:
        ch = gen_channels(cfg, 1000 + seed)
        seed += 1
        oracle = scalar_grid_oracle(ch, cfg, 400)
        if not math.isfinite(oracle):
            continue
        _, _, rep, _ = spca_solve(ch, cfg, max_iter=SPOT_MAX_ITER)
        diff = rep.r_sum - oracle
        worst = max(worst, diff)
        lo += diff < -0.02
        checked += 1
    ok = checked > 0 and worst <= 0.01 and lo == 0
    return ok, f"{checked} instances, largest excess over grid {worst:+.4f} bits"


GROUPS = {
    "conservative-bounds": _group_tangents,
    "receiver-consistency": _group_receiver,
    "real-embedding": _group_embedding,
    "scalar-oracle": _group_scalar_oracle,
}


def run_selftest(seed: int = 12345, fault: Optional[str] = None, report=print) -> bool:
    """Run every group; ``report`` receives one line per group.  True iff all pass."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    all_ok = True
    for name, fn in GROUPS.items():
        rng = np.random.default_rng([seed, len(name)])
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng, fault)
        except Exception as exc:  # a crashing group is a failing group
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        report(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t0:.1f}s)")
    return all_ok
