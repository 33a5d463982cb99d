"""Sequential parametric convex approximation for the sum secrecy rate.

The non-convex rate terms are split with log-domain slack variables
``x_d, y_d, x_i, y_i, t_u, y_u``; the three constraints that bound a convex
function from above are replaced at every round by first-order surrogates that
are tight at the previous iterate, and the resulting convex program is handed
to :mod:`fdsecrecy.subsolver`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import subsolver as ss
from .model import (
    ChannelSet,
    ContractError,
    InfeasibleError,
    NumericalError,
    RatesReport,
    SystemConfig,
    TransmitDesign,
    energy_bound,
    full_report,
)
from .receiver import ReceiveVector, interference_covariance, optimal_receiver

__all__ = [
    "SlackVector",
    "LinearizationPoint",
    "IterationRecord",
    "SpcaTrace",
    "SpcaError",
    "SecrecyProblem",
    "exp_tangent",
    "uplink_gain",
    "g_linearization",
    "init_feasible",
    "linearization_point",
    "build_subproblem",
    "feasibility_spec",
    "spca_solve",
    "solve_problem",
    "kkt_residual",
    "SLACK_NAMES",
]

log = logging.getLogger(__name__)

LOG2E = 1.0 / math.log(2.0)
SLACK_NAMES = ("x_d", "y_d", "x_i", "y_i", "t_u", "y_u")


class SpcaError(RuntimeError):
    """The convex subproblem could not be solved at some round."""

    def __init__(self, message, iteration, last_design, trace):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration
        self.last_design = last_design
        self.trace = trace


@dataclass(frozen=True)
class SlackVector:
    x_d: float
    y_d: float
    x_i: float
    y_i: float
    t_u: float
    y_u: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_d, self.y_d, self.x_i, self.y_i, self.t_u, self.y_u])

    @property
    def downlink_nats(self) -> float:
        return self.x_d - self.y_d - self.x_i + self.y_i

    @property
    def uplink_nats(self) -> float:
        return self.t_u - self.x_i + self.y_u

    @property
    def objective_bits(self) -> float:
        return (self.downlink_nats + self.uplink_nats) * LOG2E


@dataclass(frozen=True, eq=False)
class LinearizationPoint:
    s_star: np.ndarray
    v_star: np.ndarray
    y_d_star: float
    x_i_star: float
    x_u_star: Optional[np.ndarray]


@dataclass
class IterationRecord:
    u: float
    slacks: SlackVector
    status: str
    kkt: float
    subproblem_objective: float
    newton_steps: int


@dataclass
class SpcaTrace:
    u0: float
    records: list = field(default_factory=list)
    termination: str = ""
    links: tuple = (True, True)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def objectives(self) -> list:
        return [self.u0] + [r.u for r in self.records]


# ---------------------------------------------------------------------------
# Problem data


@dataclass(frozen=True, eq=False)
class SecrecyProblem:
    """Data of one sum-secrecy program in covariance form.

    ``c_d`` and ``c_i`` are the interference-plus-noise floors seen by the
    downlink user and by the idle user's downlink decoder.  The uplink block
    (``g_u``, ``h_si``, ``p_u``) is ``None`` for a downlink-only program.
    Harvested energy is ``energy_gain * h_i^H (S+V) h_i + energy_const``.
    """

    h_d: np.ndarray
    h_i: np.ndarray
    c_d: float
    c_i: float
    noise: float
    p_bs: float
    e_min: float
    energy_gain: float
    energy_const: float
    g_u: Optional[np.ndarray] = None
    h_si: Optional[np.ndarray] = None
    p_u: float = 0.0
    eve_ul_power: float = 0.0   # P_U |g_I|^2

    @classmethod
    def from_channels(cls, ch: ChannelSet, cfg: SystemConfig) -> "SecrecyProblem":
        ch.check(cfg)
        pu_gd = cfg.p_u * abs(ch.g_d) ** 2
        pu_gi = cfg.p_u * abs(ch.g_i) ** 2
        return cls(
            h_d=ch.h_d, h_i=ch.h_i,
            c_d=pu_gd + cfg.sigma_z2, c_i=pu_gi + cfg.sigma_z2, noise=cfg.sigma_z2,
            p_bs=cfg.p_bs, e_min=cfg.e_min,
            energy_gain=cfg.zeta, energy_const=cfg.zeta * pu_gi,
            g_u=ch.g_u, h_si=ch.h_si, p_u=cfg.p_u, eve_ul_power=pu_gi,
        )

    @property
    def n(self) -> int:
        return self.h_d.size

    @property
    def has_uplink(self) -> bool:
        return self.g_u is not None

    @property
    def energy_max(self) -> float:
        return self.energy_gain * self.p_bs * float(np.vdot(self.h_i, self.h_i).real) \
            + self.energy_const

    def x_u(self, total_cov) -> np.ndarray:
        x = self.h_si @ total_cov @ self.h_si.conj().T
        x = 0.5 * (x + x.conj().T)
        x[np.diag_indices_from(x)] += self.noise
        return x

    def gamma_u(self, total_cov) -> float:
        if not self.has_uplink or self.p_u == 0:
            return 0.0
        return uplink_gain(self.x_u(total_cov), self.g_u, self.p_u)

    def powers(self, s, v) -> dict:
        m = s + v
        q = lambda h, a: float(np.vdot(h, a @ h).real)
        return {"d_all": q(self.h_d, m), "d_v": q(self.h_d, v),
                "i_all": q(self.h_i, m), "i_v": q(self.h_i, v)}

    def energy(self, s, v) -> float:
        return self.energy_gain * float(np.vdot(self.h_i, (s + v) @ self.h_i).real) \
            + self.energy_const

    def tight_slacks(self, s, v) -> SlackVector:
        p = self.powers(s, v)
        return SlackVector(
            x_d=math.log(p["d_all"] + self.c_d),
            y_d=math.log(p["d_v"] + self.c_d),
            x_i=math.log(p["i_all"] + self.c_i),
            y_i=math.log(p["i_v"] + self.c_i),
            t_u=math.log1p(self.gamma_u(s + v)),
            y_u=math.log(p["i_all"] + self.noise),
        )

    def link_rates(self, s, v) -> tuple:
        """Unclamped downlink and uplink secrecy rates in bits/s/Hz."""
        sl = self.tight_slacks(s, v)
        r_d = sl.downlink_nats * LOG2E
        r_u = sl.uplink_nats * LOG2E if self.has_uplink else 0.0
        return r_d, r_u

    def objective(self, s, v, links=(True, True)) -> float:
        """Sum of clamped secrecy rates over the active links."""
        r_d, r_u = self.link_rates(s, v)
        return (max(r_d, 0.0) if links[0] else 0.0) + (max(r_u, 0.0) if links[1] else 0.0)


# ---------------------------------------------------------------------------
# Surrogates


def exp_tangent(y: float, y_star: float) -> float:
    """Tangent of ``exp`` at ``y_star`` evaluated at ``y``; never exceeds ``exp(y)``."""
    return math.exp(y_star) * (y - y_star + 1.0)


def uplink_gain(x_u: np.ndarray, g_u: np.ndarray, p_u: float) -> float:
    """``p_u g^H X^{-1} g`` via a Cholesky solve."""
    try:
        fac = cho_factor(x_u, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"X_U is not positive definite: {exc}") from exc
    return p_u * float(np.vdot(g_u, cho_solve(fac, g_u)).real)


def _g_gradient(x_star, g_u, p_u):
    """Value and Hermitian gradient ``-p_u X*^{-1} g g^H X*^{-1}`` at ``x_star``."""
    try:
        fac = cho_factor(x_star, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"X_U* is not positive definite: {exc}") from exc
    q = cho_solve(fac, g_u)
    return p_u * float(np.vdot(g_u, q).real), -p_u * np.outer(q, q.conj())


def g_linearization(x_u: np.ndarray, lp: LinearizationPoint, ch: ChannelSet,
                    cfg: SystemConfig, _sign: float = 1.0) -> float:
    """First-order lower bound of ``p_u g^H X_U^{-1} g`` around ``lp.x_u_star``.

    ``_sign`` exists only for the self-test mutation hook.
    """
    val, grad = _g_gradient(lp.x_u_star, ch.g_u, cfg.p_u)
    return val + _sign * float(np.vdot(grad, x_u - lp.x_u_star).real)


# ---------------------------------------------------------------------------
# Initialization and subproblem assembly


def _energy_beam(problem: SecrecyProblem) -> TransmitDesign:
    """All power as artificial noise along ``h_i``: maximal harvested energy, zero downlink leakage."""
    n = problem.n
    nrm = np.linalg.norm(problem.h_i)
    if nrm == 0:
        v = np.eye(n) * (problem.p_bs / n)
    else:
        u = problem.h_i / nrm
        v = problem.p_bs * np.outer(u, u.conj())
    return TransmitDesign(np.zeros((n, n)), v)


def linearization_point(problem: SecrecyProblem, d: TransmitDesign) -> LinearizationPoint:
    p = problem.powers(d.s_cov, d.v_cov)
    x_u = problem.x_u(d.total_cov) if problem.has_uplink else None
    return LinearizationPoint(
        s_star=d.s_cov, v_star=d.v_cov,
        y_d_star=math.log(p["d_v"] + problem.c_d),
        x_i_star=math.log(p["i_all"] + problem.c_i),
        x_u_star=x_u,
    )


def _initial_design(problem: SecrecyProblem):
    if problem.e_min > problem.energy_max:
        raise InfeasibleError(
            f"energy requirement e_min={problem.e_min:.6g} W exceeds the harvestable "
            f"maximum {problem.energy_max:.6g} W under the power budget p_bs={problem.p_bs:g} W")
    d = _energy_beam(problem)
    return d, linearization_point(problem, d)


def init_feasible(ch: ChannelSet, cfg: SystemConfig):
    """Feasible starting design and its linearization point."""
    return _initial_design(SecrecyProblem.from_channels(ch, cfg))


def active_links(problem: SecrecyProblem, d: TransmitDesign) -> tuple:
    """Which secrecy links can carry a strictly positive rate near ``d``.

    The downlink is usable when some information direction reaches the
    downlink user relatively better than the idle user; the uplink when its
    secrecy rate at ``d`` is positive.
    """
    p = problem.powers(d.s_cov, d.v_cov)
    dmat = (np.outer(problem.h_d, problem.h_d.conj()) / (p["d_v"] + problem.c_d)
            - np.outer(problem.h_i, problem.h_i.conj()) / (p["i_v"] + problem.c_i))
    lam = np.linalg.eigvalsh(0.5 * (dmat + dmat.conj().T))
    dl = lam[-1] > 1e-9 * max(np.abs(lam).max(), 1e-300)
    ul = False
    if problem.has_uplink and problem.p_u > 0:
        ul = problem.link_rates(d.s_cov, d.v_cov)[1] > 1e-9
    return bool(dl), bool(ul)


def _zero(n):
    return np.zeros((n, n), complex)


def _affine(n, k, s=None, v=None, slack=None, const=0.0):
    sc = np.zeros(k)
    for j, a in (slack or {}).items():
        sc[j] = a
    return ss.AffineForm(_zero(n) if s is None else s, _zero(n) if v is None else v, sc, float(const))


def build_problem_spec(problem: SecrecyProblem, lp: LinearizationPoint,
                       links=(True, True)) -> ss.SubproblemSpec:
    dl, ul = links
    names = [nm for nm, on in zip(SLACK_NAMES, (dl, dl, True, dl, ul, ul)) if on]
    idx = {nm: j for j, nm in enumerate(names)}
    n, k = problem.n, len(names)
    a_d = np.outer(problem.h_d, problem.h_d.conj())
    a_i = np.outer(problem.h_i, problem.h_i.conj())
    obj = np.zeros(k)
    coef = {"x_d": 1.0, "y_d": -1.0, "x_i": -float(dl + ul), "y_i": 1.0, "t_u": 1.0, "y_u": 1.0}
    for nm in names:
        obj[idx[nm]] = coef[nm] * LOG2E
    log_noise = math.log(problem.noise)
    offsets = np.array([0.0 if nm == "t_u" else log_noise for nm in names])

    cons = []
    e_y, e_x = math.exp(lp.y_d_star), math.exp(lp.x_i_star)
    if dl:
        cons.append(ss.ExpConstraint(idx["x_d"], _affine(n, k, s=a_d, v=a_d, const=problem.c_d), "dl-signal"))
        cons.append(ss.AffineConstraint(_affine(
            n, k, v=-a_d, slack={idx["y_d"]: e_y},
            const=e_y * (1.0 - lp.y_d_star) - problem.c_d), "dl-interference"))
    cons.append(ss.AffineConstraint(_affine(
        n, k, s=-a_i, v=-a_i, slack={idx["x_i"]: e_x},
        const=e_x * (1.0 - lp.x_i_star) - problem.c_i), "idle-power"))
    if ul:
        val, grad = _g_gradient(lp.x_u_star, problem.g_u, problem.p_u)
        # G(X) = val + <grad, H (M - M*) H^H>  with  M = S + V
        b = problem.h_si.conj().T @ grad @ problem.h_si
        b = 0.5 * (b + b.conj().T)
        m_star = lp.s_star + lp.v_star
        const = val - float(np.vdot(b, m_star).real) + 1.0
        cons.append(ss.ExpConstraint(idx["t_u"], _affine(n, k, s=b, v=b, const=const), "ul-gain"))
    if dl:
        cons.append(ss.ExpConstraint(idx["y_i"], _affine(n, k, v=a_i, const=problem.c_i), "idle-noise"))
        cons.append(ss.AffineConstraint(_affine(
            n, k, slack={idx["x_d"]: 1.0, idx["y_d"]: -1.0, idx["x_i"]: -1.0, idx["y_i"]: 1.0}), "dl-secrecy"))
    if ul:
        cons.append(ss.ExpConstraint(idx["y_u"], _affine(n, k, s=a_i, v=a_i, const=problem.noise), "idle-ul"))
        cons.append(ss.AffineConstraint(_affine(
            n, k, slack={idx["t_u"]: 1.0, idx["x_i"]: -1.0, idx["y_u"]: 1.0}), "ul-secrecy"))
    cons.append(ss.TraceBudget(problem.p_bs, "power"))
    cons.append(ss.AffineConstraint(_affine(
        n, k, s=problem.energy_gain * a_i, v=problem.energy_gain * a_i,
        const=problem.energy_const - problem.e_min), "energy"))
    cons.append(ss.PsdConstraint("S", "S>=0"))
    cons.append(ss.PsdConstraint("V", "V>=0"))
    return ss.SubproblemSpec(n=n, slack_names=tuple(names), objective=obj,
                             constraints=tuple(cons), slack_offsets=offsets)


def feasibility_spec(problem: SecrecyProblem) -> ss.SubproblemSpec:
    """Power budget, energy requirement and PSD cones alone, with no slacks.

    Phase one of the subsolver on this program decides the same question as
    the closed-form energy bound.
    """
    n = problem.n
    a_i = np.outer(problem.h_i, problem.h_i.conj())
    cons = (
        ss.TraceBudget(problem.p_bs, "power"),
        ss.AffineConstraint(_affine(
            n, 0, s=problem.energy_gain * a_i, v=problem.energy_gain * a_i,
            const=problem.energy_const - problem.e_min), "energy"),
        ss.PsdConstraint("S", "S>=0"),
        ss.PsdConstraint("V", "V>=0"),
    )
    return ss.SubproblemSpec(n=n, slack_names=(), objective=np.zeros(0), constraints=cons,
                             slack_offsets=np.zeros(0))


def build_subproblem(lp: LinearizationPoint, ch: ChannelSet, cfg: SystemConfig,
                     links=(True, True)) -> ss.SubproblemSpec:
    return build_problem_spec(SecrecyProblem.from_channels(ch, cfg), lp, links)


def _select(slacks: SlackVector, names) -> np.ndarray:
    return np.array([getattr(slacks, nm) for nm in names])


# ---------------------------------------------------------------------------
# KKT residual of the slack-reformulated problem


def _true_constraints(problem: SecrecyProblem, s, v, x: dict, links):
    """(tag, value, dS, dV, dslack) of the un-linearized constraints, physical units.

    Gradients with respect to S and V are Hermitian matrices ``D`` such that the
    directional derivative along ``dS`` is ``Re tr(D dS)``.
    """
    dl, ul = links
    a_d = np.outer(problem.h_d, problem.h_d.conj())
    a_i = np.outer(problem.h_i, problem.h_i.conj())
    p = problem.powers(s, v)
    z = np.zeros((problem.n, problem.n), complex)
    out = []
    if dl:
        out.append(("dl-signal", p["d_all"] + problem.c_d - math.exp(x["x_d"]), a_d, a_d,
                    {"x_d": -math.exp(x["x_d"])}))
        out.append(("dl-interference", math.exp(x["y_d"]) - p["d_v"] - problem.c_d, z, -a_d,
                    {"y_d": math.exp(x["y_d"])}))
    out.append(("idle-power", math.exp(x["x_i"]) - p["i_all"] - problem.c_i, -a_i, -a_i,
                {"x_i": math.exp(x["x_i"])}))
    if ul:
        val, grad = _g_gradient(problem.x_u(s + v), problem.g_u, problem.p_u)
        b = problem.h_si.conj().T @ grad @ problem.h_si
        b = 0.5 * (b + b.conj().T)
        out.append(("ul-gain", val + 1.0 - math.exp(x["t_u"]), b, b, {"t_u": -math.exp(x["t_u"])}))
    if dl:
        out.append(("idle-noise", p["i_v"] + problem.c_i - math.exp(x["y_i"]), z, a_i,
                    {"y_i": -math.exp(x["y_i"])}))
        out.append(("dl-secrecy", x["x_d"] - x["y_d"] - x["x_i"] + x["y_i"], z, z,
                    {"x_d": 1.0, "y_d": -1.0, "x_i": -1.0, "y_i": 1.0}))
    if ul:
        out.append(("idle-ul", p["i_all"] + problem.noise - math.exp(x["y_u"]), a_i, a_i,
                    {"y_u": -math.exp(x["y_u"])}))
        out.append(("ul-secrecy", x["t_u"] - x["x_i"] + x["y_u"], z, z,
                    {"t_u": 1.0, "x_i": -1.0, "y_u": 1.0}))
    eye = np.eye(problem.n)
    out.append(("power", problem.p_bs - float(np.trace(s + v).real), -eye, -eye, {}))
    g = problem.energy_gain * a_i
    out.append(("energy", problem.energy(s, v) - problem.e_min, g, g, {}))
    return out


def _kkt(problem: SecrecyProblem, spec: ss.SubproblemSpec, sol: ss.SubproblemSolution,
         s, v, slacks: SlackVector, links) -> dict:
    if sol is None or sol.duals is None or sol.psd_duals is None:
        raise ContractError("kkt_residual needs subsolver multipliers")
    sc = sol.scaling
    names = spec.slack_names
    pos = {nm: j for j, nm in enumerate(names)}
    x = {nm: getattr(slacks, nm) for nm in names}
    scalar_tags = [c.tag for c in spec.scalar_constraints]
    lam = dict(zip(scalar_tags, sol.duals))
    kap = dict(zip(scalar_tags, sc.row_scale))
    n = problem.n
    grad = np.zeros(2 * n * n + len(names))
    grad[2 * n * n:] = spec.objective
    comp = 0.0
    primal = 0.0
    for tag, val, d_s, d_v, d_x in _true_constraints(problem, s, v, x, links):
        k = kap[tag]
        g_scaled = np.zeros_like(grad)
        g_scaled[: n * n] = to_c(d_s) * sc.power * k
        g_scaled[n * n: 2 * n * n] = to_c(d_v) * sc.power * k
        for nm, a in d_x.items():
            g_scaled[2 * n * n + pos[nm]] = a * k
        grad += lam[tag] * g_scaled
        comp = max(comp, abs(lam[tag] * val * k))
        primal = max(primal, max(0.0, -val * k))
    for name, m in (("S", s), ("V", v)):
        z = sol.psd_duals[name]
        blk = slice(0, n * n) if name == "S" else slice(n * n, 2 * n * n)
        grad[blk] += to_c(z)
        comp = max(comp, abs(float(np.vdot(z, m / sc.power).real)))
        primal = max(primal, max(0.0, -float(np.linalg.eigvalsh(m / sc.power)[0])))
    stat = float(np.abs(grad).max()) / max(1.0, float(np.abs(spec.objective).max()))
    return {"stationarity": stat, "complementarity": comp, "primal": primal,
            "residual": max(stat, comp, primal)}


def to_c(m):
    return ss.to_coords(0.5 * (m + m.conj().T))


def kkt_residual(d: TransmitDesign, slacks: SlackVector, duals, ch: ChannelSet,
                 cfg: SystemConfig, links=(True, True)) -> float:
    """Scale-normalized KKT residual of the slack-reformulated problem.

    ``duals`` is the :class:`SubproblemSolution` of the round that produced
    ``d``; its multipliers are reused for the un-linearized constraints.
    """
    problem = SecrecyProblem.from_channels(ch, cfg)
    if duals is None:
        raise ContractError("kkt_residual needs subsolver multipliers")
    spec = _rebuild_spec(problem, d, links)
    return _kkt(problem, spec, duals, d.s_cov, d.v_cov, slacks, links)["residual"]


def _rebuild_spec(problem, d, links):
    return build_problem_spec(problem, linearization_point(problem, d), links)


# ---------------------------------------------------------------------------
# The iteration


@dataclass
class SpcaResult:
    design: TransmitDesign
    trace: SpcaTrace
    links: tuple
    last_solution: Optional[ss.SubproblemSolution] = None
    last_spec: Optional[ss.SubproblemSpec] = None


def solve_problem(problem: SecrecyProblem, rel_tol: float = 1e-3, max_iter: int = 50,
                  opts: Optional[ss.SolverOptions] = None, check: bool = True) -> SpcaResult:
    """Run the SPCA iteration on ``problem`` starting from the energy beam."""
    design, lp = _initial_design(problem)
    links = active_links(problem, design)
    u_prev = problem.objective(design.s_cov, design.v_cov, links)
    trace = SpcaTrace(u0=u_prev, links=links)
    if not any(links):
        trace.termination = "converged"
        return SpcaResult(design, trace, links)

    interior = None
    sol = spec = None
    for it in range(1, max_iter + 1):
        spec = build_problem_spec(problem, lp, links)
        tight = problem.tight_slacks(design.s_cov, design.v_cov)
        warm = (design.s_cov, design.v_cov, _select(tight, spec.slack_names))
        try:
            sol = ss.solve(spec, warm=warm, interior=interior, opts=opts)
        except (np.linalg.LinAlgError, NumericalError) as exc:
            trace.termination = "subsolver-failure"
            raise SpcaError(str(exc), it, design, trace) from exc
        if not sol.ok:
            trace.termination = "subsolver-failure"
            raise SpcaError(f"subproblem status {sol.status} {sol.message}", it, design, trace)
        new = TransmitDesign(sol.s_cov, sol.v_cov)
        slacks = problem.tight_slacks(new.s_cov, new.v_cov)
        u = problem.objective(new.s_cov, new.v_cov, links)
        if check:
            _check_round(problem, spec, sol, new, links)
        kkt = _kkt(problem, spec, sol, new.s_cov, new.v_cov, slacks, links)["residual"]
        trace.records.append(IterationRecord(u, slacks, sol.status, kkt, sol.objective, sol.iterations))
        log.debug("spca round %d: u=%.9f kkt=%.2e newton=%d", it, u, kkt, sol.iterations)
        design = new
        interior = (sol.s_cov, sol.v_cov, sol.slacks)
        lp = linearization_point(problem, design)
        if u_prev >= 1e-9:
            done = (u - u_prev) / u_prev < rel_tol
        else:
            done = abs(u - u_prev) < 1e-6
        u_prev = u
        if done:
            trace.termination = "converged"
            break
    else:
        trace.termination = "max-iterations"
    return SpcaResult(design, trace, links, sol, spec)


class RoundCheckError(AssertionError):
    pass


def _check_round(problem, spec, sol, design, links, tol=1e-8):
    """Independent re-check of a subproblem solution against the true model."""
    viol = ss.check_solution(spec, sol)
    bad = {k: v for k, v in viol.items() if v > tol}
    if bad:
        raise RoundCheckError(f"subproblem constraints violated: {bad}")
    if design.total_power > problem.p_bs * (1 + tol):
        raise RoundCheckError("power budget violated")
    if problem.energy(design.s_cov, design.v_cov) < problem.e_min * (1 - tol):
        raise RoundCheckError("energy requirement violated")
    # the surrogates are conservative, so the solver's slacks satisfy the true constraints
    x = dict(zip(spec.slack_names, sol.slacks))
    for tag, val, *_ in _true_constraints(problem, design.s_cov, design.v_cov, x, links):
        if tag in ("dl-interference", "idle-power", "ul-gain"):
            scale = max(abs(val), math.exp(x[{"dl-interference": "y_d", "idle-power": "x_i", "ul-gain": "t_u"}[tag]]))
            if val < -tol * scale:
                raise RoundCheckError(f"true constraint {tag} violated by {val:.3e}")


def spca_solve(ch: ChannelSet, cfg: SystemConfig, rel_tol: float = 1e-3, max_iter: int = 50,
               opts: Optional[ss.SolverOptions] = None):
    """Optimize ``(S, V)`` and the receive vector for one channel realization.

    Returns ``(design, receiver, report, trace)``.
    """
    problem = SecrecyProblem.from_channels(ch, cfg)
    res = solve_problem(problem, rel_tol=rel_tol, max_iter=max_iter, opts=opts)
    w = optimal_receiver(ch, res.design, cfg)
    report = full_report(ch, res.design, w, cfg)
    return res.design, w, report, res.trace


def spca_solve_full(ch: ChannelSet, cfg: SystemConfig, **kw) -> SpcaResult:
    """Like :func:`spca_solve` but returns the raw result with the last subproblem."""
    return solve_problem(SecrecyProblem.from_channels(ch, cfg), **kw)
