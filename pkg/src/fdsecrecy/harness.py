"""Channel generation, Monte Carlo trials and parameter sweeps with CSV output.

Seeds.  Trial ``k`` of a sweep with master seed ``m`` draws its channels from
``derive_seed(m, k)``, which hashes ``(m, k)`` through
:class:`numpy.random.SeedSequence`.  The seed does not depend on the grid
index: every grid point sees the same channel realizations (common random
numbers), so schemes and grid points are paired and quantities that do not
depend on the swept parameter are exactly constant along the grid.

Draw order inside :func:`gen_channels` is fixed: ``h_d, h_i, g_d, g_i, g_u``,
a unit-variance self-interference matrix that is then scaled by
``sqrt(sigma_si2)``, and finally the extra antenna entries used by the
half-duplex baseline.
"""

from __future__ import annotations

import configparser
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import SCHEMES, BaselineResult, check_hd_feasible, solve_scheme
from .model import (
    ChannelSet,
    ContractError,
    InfeasibleError,
    SystemConfig,
    db_to_linear,
    energy_bound,
)

__all__ = [
    "PARAMS",
    "CSV_HEADER",
    "SweepSpec",
    "SweepResult",
    "PointStats",
    "InstanceOutcome",
    "derive_seed",
    "gen_channels",
    "run_instance",
    "sweep",
    "write_csv",
    "read_csv",
    "load_config",
    "default_grid",
]

log = logging.getLogger(__name__)

PARAMS = ("sigma_si2_db", "e_min_w")
CSV_HEADER = ["param", "value", "scheme", "mean_rate_bits", "stderr_bits",
              "n_ok", "n_infeasible", "n_failed"]


def derive_seed(master: int, trial: int) -> int:
    """64-bit channel seed of trial ``trial`` under master seed ``master``."""
    if master < 0 or trial < 0:
        raise ContractError("seeds and trial indices must be nonnegative")
    ss = np.random.SeedSequence([int(master), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_channels(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Rayleigh-fading channel set with the configured attenuations."""
    rng = np.random.default_rng(seed)

    def cn(var, *shape):
        z = rng.standard_normal(shape + (2,))
        return math.sqrt(var / 2.0) * (z[..., 0] + 1j * z[..., 1])

    a_i = db_to_linear(-cfg.attn_bs_idle_db)
    a_o = db_to_linear(-cfg.attn_other_db)
    h_d = cn(a_o, cfg.n_tx)
    h_i = cn(a_i, cfg.n_tx)
    g_d = cn(a_o, 1)[0]
    g_i = cn(a_o, 1)[0]
    g_u = cn(a_o, cfg.n_rx)
    h_si = math.sqrt(cfg.sigma_si2) * cn(1.0, cfg.n_rx, cfg.n_tx)
    h_d_extra = cn(a_o, cfg.n_rx)
    h_i_extra = cn(a_i, cfg.n_rx)
    g_u_extra = cn(a_o, cfg.n_tx)
    return ChannelSet(h_d, h_i, g_d, g_i, g_u, h_si, h_d_extra, h_i_extra, g_u_extra)


@dataclass(frozen=True)
class InstanceOutcome:
    status: str                       # ok | infeasible | failed
    result: Optional[BaselineResult] = None
    message: str = ""


def _infeasible_all(schemes, msg):
    return {s: InstanceOutcome("infeasible", None, msg) for s in schemes}


def run_instance(ch: ChannelSet, cfg: SystemConfig, schemes: Sequence[str] = SCHEMES,
                 **solver_kw) -> dict:
    """Run every scheme on the same channels; failures are returned, not raised.

    An instance whose full-duplex problem is infeasible is infeasible for all
    schemes, so that averages stay paired.  The half-duplex energy bound is
    checked separately on top of that.
    """
    for s in schemes:
        if s not in SCHEMES:
            raise ContractError(f"unknown scheme {s!r}; choose from {SCHEMES}")
    if cfg.e_min > energy_bound(ch, cfg):
        return _infeasible_all(schemes, "energy requirement above the harvestable maximum")
    out = {}
    for s in schemes:
        if s == "half-duplex":
            msg = check_hd_feasible(ch, cfg)
            if msg:
                out[s] = InstanceOutcome("infeasible", None, msg)
                continue
        try:
            out[s] = InstanceOutcome("ok", solve_scheme(s, ch, cfg, **solver_kw))
        except InfeasibleError as exc:
            out[s] = InstanceOutcome("infeasible", None, str(exc))
        except Exception as exc:  # a failed solve is data, not a batch abort
            log.warning("scheme %s failed: %s", s, exc)
            out[s] = InstanceOutcome("failed", None, f"{type(exc).__name__}: {exc}")
    return out


# ---------------------------------------------------------------------------
# Sweeps


def default_grid(param: str) -> list:
    if param == "sigma_si2_db":
        return [-100.0, -90.0, -80.0, -70.0, -60.0, -50.0, -40.0]
    if param == "e_min_w":
        return [round(0.2e-3 * k, 12) for k in range(1, 11)]
    raise ContractError(f"unknown sweep parameter {param!r}; choose from {PARAMS}")


def _patch(cfg: SystemConfig, param: str, value: float) -> SystemConfig:
    if param == "sigma_si2_db":
        return cfg.replace(sigma_si2=db_to_linear(value))
    if param == "e_min_w":
        return cfg.replace(e_min=float(value))
    raise ContractError(f"unknown sweep parameter {param!r}; choose from {PARAMS}")


# the swept parameter each scheme depends on; other sweeps can reuse one run per trial
_DEPENDS = {
    "full-duplex": {"sigma_si2_db", "e_min_w"},
    "perfect-fd": {"e_min_w"},
    "half-duplex": {"e_min_w"},
}


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple
    trials: int = 200
    schemes: tuple = SCHEMES
    base: SystemConfig = field(default_factory=SystemConfig)
    seed: int = 0

    def __post_init__(self):
        if self.param not in PARAMS:
            raise ContractError(f"unknown sweep parameter {self.param!r}; choose from {PARAMS}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ContractError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ContractError("sweep grid must be strictly increasing")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ContractError("trials must be a positive integer")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ContractError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "schemes", tuple(self.schemes))


@dataclass(frozen=True)
class PointStats:
    mean: float
    stderr: float
    n_ok: int
    n_infeasible: int
    n_failed: int

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[InstanceOutcome]) -> "PointStats":
        rates = np.array([o.result.rate for o in outcomes if o.status == "ok"], float)
        n_inf = sum(o.status == "infeasible" for o in outcomes)
        n_fail = sum(o.status == "failed" for o in outcomes)
        if rates.size == 0:
            mean = se = 0.0
        else:
            # index-ordered reduction keeps the result independent of scheduling
            mean = float(math.fsum(rates) / rates.size)
            se = float(np.std(rates, ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else 0.0
        return cls(mean, se, int(rates.size), int(n_inf), int(n_fail))


@dataclass
class SweepResult:
    param: str
    grid: tuple
    schemes: tuple
    stats: dict                                   # (value, scheme) -> PointStats
    samples: dict = field(default_factory=dict)   # (value, scheme) -> per-trial outcomes

    def series(self, scheme: str, what: str = "mean") -> list:
        return [getattr(self.stats[(v, scheme)], what) for v in self.grid]

    def paired_rates(self, value: float, scheme: str) -> np.ndarray:
        """Per-trial rates at one grid point, ``nan`` where the trial did not succeed."""
        return np.array([o.result.rate if o.status == "ok" else np.nan
                         for o in self.samples[(value, scheme)]])


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sweep(spec: SweepSpec, threads: int = 1, progress=None, **solver_kw) -> SweepResult:
    """Run ``spec.trials`` paired trials at every grid value."""
    seeds = [derive_seed(spec.seed, k) for k in range(spec.trials)]
    shared = [s for s in spec.schemes if spec.param not in _DEPENDS[s]]
    swept = [s for s in spec.schemes if spec.param in _DEPENDS[s]]

    cache = {}
    if shared:
        cfg0 = _patch(spec.base, spec.param, spec.grid[0])

        def run_shared(k):
            return run_instance(gen_channels(cfg0, seeds[k]), cfg0, shared, **solver_kw)

        cache = dict(enumerate(_map(run_shared, range(spec.trials), threads)))

    samples = {}
    for value in spec.grid:
        cfg = _patch(spec.base, spec.param, value)

        def run(k):
            return run_instance(gen_channels(cfg, seeds[k]), cfg, swept, **solver_kw) if swept else {}

        per_trial = _map(run, range(spec.trials), threads)
        for s in spec.schemes:
            samples[(value, s)] = [per_trial[k][s] if s in swept else cache[k][s]
                                   for k in range(spec.trials)]
        if progress is not None:
            progress(value)

    stats = {key: PointStats.from_outcomes(v) for key, v in samples.items()}
    return SweepResult(spec.param, spec.grid, spec.schemes, stats, samples)


# ---------------------------------------------------------------------------
# CSV


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_csv(res: SweepResult, path) -> None:
    rows = sorted(res.stats.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for (value, scheme), st in rows:
                w.writerow([res.param, _fmt(value), scheme, _fmt(st.mean), _fmt(st.stderr),
                            st.n_ok, st.n_infeasible, st.n_failed])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ContractError(f"{path}: unexpected CSV header")
    stats = {}
    param = ""
    for r in rows[1:]:
        param = r[0]
        stats[(float(r[1]), r[2])] = PointStats(float(r[3]), float(r[4]),
                                                int(r[5]), int(r[6]), int(r[7]))
    grid = tuple(sorted({k[0] for k in stats}))
    schemes = tuple(sorted({k[1] for k in stats}))
    return SweepResult(param, grid, schemes, stats)


# ---------------------------------------------------------------------------
# Config files

_SWEEP_KEYS = {"param", "grid", "trials", "schemes", "seed"}


def _parse_value(key: str, raw: str, kind):
    try:
        if kind is int:
            f = float(raw)
            if f != int(f):
                raise ValueError
            return int(f)
        return kind(raw)
    except ValueError:
        raise ContractError(f"config key {key!r}: cannot parse {raw!r}") from None


def load_config(path=None, overrides: Optional[dict] = None) -> tuple:
    """Read a flat ``key = value`` file and apply overrides.

    Keys are the :class:`SystemConfig` field names plus the sweep keys
    ``param``, ``grid`` (comma separated), ``trials``, ``schemes`` (comma
    separated) and ``seed``.  ``#`` starts a comment.  Overrides win over the
    file.  Returns ``(SystemConfig, sweep_settings_dict)``.
    """
    raw = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        cp.optionxform = str
        cp.read_string("[config]\n" + text)
        raw.update(cp["config"])
    raw.update({k: str(v) for k, v in (overrides or {}).items()})

    base = SystemConfig()
    sys_kw = {}
    sweep_kw = {}
    for key, val in raw.items():
        if key in _SWEEP_KEYS:
            sweep_kw[key] = val
        elif hasattr(base, key):
            kind = type(getattr(base, key))
            sys_kw[key] = _parse_value(key, val, kind)
        else:
            raise ContractError(f"unknown config key {key!r}")
    cfg = base.replace(**sys_kw)

    settings = {}
    if "param" in sweep_kw:
        settings["param"] = sweep_kw["param"].strip()
    if "grid" in sweep_kw:
        settings["grid"] = [_parse_value("grid", x.strip(), float)
                            for x in sweep_kw["grid"].split(",") if x.strip()]
    if "trials" in sweep_kw:
        settings["trials"] = _parse_value("trials", sweep_kw["trials"], int)
    if "schemes" in sweep_kw:
        settings["schemes"] = [x.strip() for x in sweep_kw["schemes"].split(",") if x.strip()]
    if "seed" in sweep_kw:
        settings["seed"] = _parse_value("seed", sweep_kw["seed"], int)
    return cfg, settings
