"""Dense log-barrier interior-point solver for the linearized secrecy subproblem.

The program has Hermitian PSD matrix variables ``S`` and ``V`` plus a handful of
real scalar slacks.  Its constraints come in four shapes::

    exp(slack_j) <= affine(S, V, slacks)       (exponential cone, scalar)
    affine(S, V, slacks) >= 0
    tr(S) + tr(V) <= p_max
    S >= 0, V >= 0                              (PSD cones)

and the objective is linear in the slacks.  Both matrices are parameterized by
real coordinates over an orthonormal Hermitian basis, so every Newton system
is real symmetric.  The PSD barrier ``-log det M`` is half the log-determinant
barrier of the real embedding ``[[Re M, -Im M], [Im M, Re M]]``; it is
evaluated on the complex matrix, which is half the size.

Internally all quantities are rescaled: matrices by the power budget and
log-power slacks by their documented offset (``ln sigma^2``), so received
powers are measured in noise units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import ContractError

__all__ = [
    "AffineForm",
    "ExpConstraint",
    "AffineConstraint",
    "TraceBudget",
    "PsdConstraint",
    "SubproblemSpec",
    "SubproblemSolution",
    "Phase1Result",
    "SolverOptions",
    "hermitian_basis",
    "to_coords",
    "from_coords",
    "real_embedding",
    "real_embedding_inverse",
    "phase1",
    "solve",
    "check_solution",
    "dump_debug",
    "DUMP_SCHEMA_VERSION",
]

DUMP_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Hermitian coordinates and the real embedding

_BASIS_CACHE: dict = {}


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis (under ``Re tr(A^H B)``) of n x n Hermitian matrices.

    Returns an array of shape ``(n*n, n, n)``: the diagonal units first, then
    ``(E_ij + E_ji)/sqrt 2`` and ``i(E_ij - E_ji)/sqrt 2`` for each ``i < j``.
    """
    if n in _BASIS_CACHE:
        return _BASIS_CACHE[n]
    mats = []
    for i in range(n):
        e = np.zeros((n, n), complex)
        e[i, i] = 1.0
        mats.append(e)
    r = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), complex)
            e[i, j] = e[j, i] = r
            mats.append(e)
            e = np.zeros((n, n), complex)
            e[i, j] = 1j * r
            e[j, i] = -1j * r
            mats.append(e)
    basis = np.array(mats)
    basis.setflags(write=False)
    _BASIS_CACHE[n] = basis
    return basis


def to_coords(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix; ``<A, B> = to_coords(A) @ to_coords(B)``."""
    n = m.shape[0]
    b = hermitian_basis(n).reshape(n * n, -1)
    return (b.conj() @ np.asarray(m, complex).ravel()).real


def from_coords(z: np.ndarray, n: int) -> np.ndarray:
    b = hermitian_basis(n).reshape(n * n, -1)
    return (np.asarray(z, float) @ b).reshape(n, n)


def real_embedding(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError("real_embedding needs a square matrix")
    if np.linalg.norm(m - m.conj().T) > 1e-10 * max(1.0, np.linalg.norm(m)):
        raise ContractError("real_embedding needs a Hermitian matrix")
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def real_embedding_inverse(e: np.ndarray) -> np.ndarray:
    n = e.shape[0] // 2
    return e[:n, :n] + 1j * e[n:, :n]


class _Cone:
    """PSD block ``M(z) = sum_i z[idx_i] B_i`` with barrier ``-log det M``.

    ``-log det M`` equals ``-1/2 log det`` of the real embedding of ``M``; the
    complex form is used because it is half the size.
    """

    def __init__(self, idx: np.ndarray, basis: np.ndarray):
        self.idx = idx
        self.n = basis.shape[1]
        self.flat = np.ascontiguousarray(basis.reshape(len(idx), -1))
        # tr(W B_i) = sum_ab W_ab (B_i)_ba
        self.flat_t = np.ascontiguousarray(basis.transpose(0, 2, 1).reshape(len(idx), -1))
        self.basis = basis
        self.block = np.ix_(idx, idx)

    def matrix(self, z) -> np.ndarray:
        return (z[self.idx] @ self.flat).reshape(self.n, self.n)


# ---------------------------------------------------------------------------
# Problem description


@dataclass(frozen=True, eq=False)
class AffineForm:
    """``Re tr(s_coef S) + Re tr(v_coef V) + slack_coef @ slacks + const``."""

    s_coef: np.ndarray
    v_coef: np.ndarray
    slack_coef: np.ndarray
    const: float

    def value(self, s, v, slacks) -> float:
        return float(np.vdot(self.s_coef, s).real + np.vdot(self.v_coef, v).real
                     + np.dot(self.slack_coef, slacks) + self.const)


@dataclass(frozen=True, eq=False)
class ExpConstraint:
    """``exp(slacks[slack]) <= rhs``."""

    slack: int
    rhs: AffineForm
    tag: str

    def value(self, s, v, slacks) -> float:
        return self.rhs.value(s, v, slacks) - math.exp(slacks[self.slack])


@dataclass(frozen=True, eq=False)
class AffineConstraint:
    """``form >= 0``."""

    form: AffineForm
    tag: str

    def value(self, s, v, slacks) -> float:
        return self.form.value(s, v, slacks)


@dataclass(frozen=True)
class TraceBudget:
    p_max: float
    tag: str

    def value(self, s, v, slacks) -> float:
        return self.p_max - float(np.trace(s).real + np.trace(v).real)


@dataclass(frozen=True)
class PsdConstraint:
    var: str
    tag: str

    def value(self, s, v, slacks) -> float:
        return float(np.linalg.eigvalsh(s if self.var == "S" else v)[0])


Constraint = Union[ExpConstraint, AffineConstraint, TraceBudget, PsdConstraint]


@dataclass(frozen=True, eq=False)
class SubproblemSpec:
    """Linear-objective program over ``(S, V, slacks)``.

    ``slack_offsets[j]`` is the natural log of the unit in which slack ``j``
    measures power (zero for dimensionless slacks); it drives scaling only.
    """

    n: int
    slack_names: tuple
    objective: np.ndarray
    constraints: tuple
    slack_offsets: np.ndarray
    objective_const: float = 0.0

    def __post_init__(self):
        k = len(self.slack_names)
        if np.shape(self.objective) != (k,) or np.shape(self.slack_offsets) != (k,):
            raise ContractError("objective and offsets must have one entry per slack")
        budgets = [c for c in self.constraints if isinstance(c, TraceBudget)]
        if len(budgets) != 1:
            raise ContractError("exactly one trace budget is required")
        cones = sorted(c.var for c in self.constraints if isinstance(c, PsdConstraint))
        if cones != ["S", "V"]:
            raise ContractError("PSD constraints for both S and V are required")

    @property
    def n_slacks(self) -> int:
        return len(self.slack_names)

    @property
    def p_max(self) -> float:
        return next(c.p_max for c in self.constraints if isinstance(c, TraceBudget))

    @property
    def scalar_constraints(self) -> list:
        return [c for c in self.constraints if not isinstance(c, PsdConstraint)]

    def objective_value(self, slacks) -> float:
        return float(np.dot(self.objective, slacks) + self.objective_const)

    def tags(self) -> list:
        return [c.tag for c in self.constraints]


@dataclass
class SolverOptions:
    tol: float = 1e-8
    t0: float = 1.0
    mu: float = 30.0
    armijo_alpha: float = 0.01
    armijo_beta: float = 0.5
    newton_tol: float = 1e-10
    stage_tol: float = 1e-3
    max_newton: int = 600
    warm_pull: float = 1e-3
    warm_budget: int = 60
    stall_tol: float = 1e-2
    stall_steps: int = 5


@dataclass
class SubproblemSolution:
    s_cov: np.ndarray
    v_cov: np.ndarray
    slacks: np.ndarray
    objective: float
    status: str
    iterations: int
    gap: float = math.inf
    duals: Optional[np.ndarray] = None      # one per scalar constraint, scaled units
    psd_duals: Optional[dict] = None        # {"S": Z_S, "V": Z_V}, scaled units
    scaling: Optional["_Scaling"] = None
    message: str = ""
    z: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


@dataclass
class Phase1Result:
    feasible: bool
    margin: float          # min scaled slack of the returned point (negative if infeasible)
    point: Optional[tuple]  # (S, V, slacks) in physical units when feasible
    iterations: int
    z: Optional[np.ndarray] = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# Scaled representation


@dataclass
class _Scaling:
    power: float               # S = power * S_scaled
    offsets: np.ndarray        # slacks = slacks_scaled + offsets
    row_scale: np.ndarray      # scaled constraint = row_scale * physical constraint
    n: int

    def pack(self, s, v, slacks) -> np.ndarray:
        return np.concatenate([to_coords(s) / self.power, to_coords(v) / self.power,
                               np.asarray(slacks, float) - self.offsets])

    def unpack(self, z):
        nn = self.n * self.n
        s = from_coords(z[:nn], self.n) * self.power
        v = from_coords(z[nn:2 * nn], self.n) * self.power
        return s, v, z[2 * nn:] + self.offsets


class _Program:
    """Scaled scalar rows ``g(z) = A z + b - exp(z[e])`` plus two PSD blocks."""

    def __init__(self, spec: SubproblemSpec):
        n, k = spec.n, spec.n_slacks
        nn = n * n
        self.n, self.nn, self.k = n, nn, k
        self.dim = 2 * nn + k
        power = spec.p_max
        offsets = np.asarray(spec.slack_offsets, float)
        rows, consts, exp_cols, scales = [], [], [], []
        for c in spec.scalar_constraints:
            if isinstance(c, TraceBudget):
                ident = to_coords(np.eye(n))
                lin = np.concatenate([-ident * power, -ident * power, np.zeros(k)])
                const = c.p_max
                kappa = 1.0 / power
                col = -1
            else:
                form = c.rhs if isinstance(c, ExpConstraint) else c.form
                lin = np.concatenate([to_coords(form.s_coef) * power,
                                      to_coords(form.v_coef) * power,
                                      np.asarray(form.slack_coef, float)])
                const = form.const + float(np.dot(form.slack_coef, offsets))
                if isinstance(c, ExpConstraint):
                    col = 2 * nn + c.slack
                    kappa = math.exp(-offsets[c.slack])
                else:
                    col = -1
                    peak = np.abs(lin).max()
                    kappa = 1.0 / peak if peak > 0 else 1.0
            rows.append(lin * kappa)
            consts.append(const * kappa)
            exp_cols.append(col)
            scales.append(kappa)
        self.A = np.array(rows).reshape(len(rows), self.dim)
        self.b = np.array(consts, float)
        self.exp_cols = np.array(exp_cols, int)
        self.exp_rows = np.nonzero(self.exp_cols >= 0)[0]
        self.m = len(rows)
        self.scaling = _Scaling(power, offsets, np.array(scales), n)
        self.c = np.concatenate([np.zeros(2 * nn), np.asarray(spec.objective, float)])
        self.c_const = spec.objective_const + float(np.dot(spec.objective, offsets))
        hb = hermitian_basis(n)
        self.cones = [_Cone(np.arange(0, nn), hb), _Cone(np.arange(nn, 2 * nn), hb)]
        self.barrier_param = self.m + 2 * n
        self.psd_names = ("S", "V")

    def constraint_values(self, z):
        g = self.A @ z + self.b
        er = self.exp_rows
        g[er] -= np.exp(z[self.exp_cols[er]])
        return g


class _Phase1Program:
    """Shifted program: every constraint relaxed by the extra variable ``tau``.

    Slacks bounded on one side only would let the barrier run off to infinity,
    so phase one also keeps each slack within ``radius`` of ``center`` (these
    box rows are not relaxed by ``tau``).
    """

    def __init__(self, prog: _Program, center, radius: float = 1e3):
        self.base = prog
        self.dim = prog.dim + 1
        k0 = 2 * prog.nn
        box = np.zeros((2 * prog.k, self.dim))
        box[np.arange(prog.k), k0 + np.arange(prog.k)] = 1.0
        box[prog.k + np.arange(prog.k), k0 + np.arange(prog.k)] = -1.0
        ctr = np.asarray(center, float)[k0:prog.dim]
        self.A = np.vstack([np.hstack([prog.A, np.ones((prog.m, 1))]), box])
        self.b = np.concatenate([prog.b, radius - ctr, radius + ctr])
        self.exp_cols = np.concatenate([prog.exp_cols, -np.ones(2 * prog.k, int)])
        self.exp_rows = prog.exp_rows
        self.m = prog.m + 2 * prog.k
        n = prog.n
        tau = np.array([prog.dim])
        eye = np.eye(n, dtype=complex)[None]
        self.cones = [_Cone(np.concatenate([c.idx, tau]), np.concatenate([c.basis, eye]))
                      for c in prog.cones]
        self.barrier_param = self.m + 2 * n
        self.c = np.zeros(self.dim)
        self.c[-1] = -1.0

    constraint_values = _Program.constraint_values


def _strictly_feasible(prog, z) -> bool:
    if not np.all(np.isfinite(z)):
        return False
    if np.any(prog.constraint_values(z) <= 0):
        return False
    for cone in prog.cones:
        try:
            np.linalg.cholesky(cone.matrix(z))
        except LinAlgError:
            return False
    return True


def _barrier_value(prog, z, t):
    """Value of ``-t c.z - sum log g - 1/2 sum log det``; ``inf`` outside the domain."""
    with np.errstate(over="ignore", invalid="ignore"):
        g = prog.constraint_values(z)
    if np.any(g <= 0):
        return math.inf
    val = -t * float(prog.c @ z) - float(np.sum(np.log(g)))
    for cone in prog.cones:
        try:
            L = np.linalg.cholesky(cone.matrix(z))
        except LinAlgError:
            return math.inf
        val -= 2.0 * float(np.sum(np.log(np.diag(L).real)))
    return val


def _barrier_derivatives(prog, z, t):
    g = prog.constraint_values(z)
    w = 1.0 / g
    G = prog.A.copy()
    er = prog.exp_rows
    ec = prog.exp_cols[er]
    ez = np.exp(z[ec])
    G[er, ec] -= ez
    grad = -t * prog.c - G.T @ w
    Gw = G * w[:, None]
    H = Gw.T @ Gw
    np.add.at(H, (ec, ec), ez * w[er])
    for cone in prog.cones:
        W = np.linalg.inv(cone.matrix(z))
        grad[cone.idx] -= (cone.flat_t @ W.ravel()).real
        T = np.matmul(np.matmul(W, cone.basis), W).reshape(len(cone.idx), -1)
        H[cone.block] += (T @ cone.flat_t.T).real
    return grad, H


def _newton_direction(grad, H):
    # symmetric diagonal equilibration: the barrier Hessian mixes curvatures
    # that differ by many orders of magnitude late in the path
    d = np.sqrt(np.maximum(np.diag(H), 1e-300))
    Hs = H / np.outer(d, d)
    try:
        fac = cho_factor(Hs, lower=True, check_finite=False)
        return -cho_solve(fac, grad / d, check_finite=False) / d
    except LinAlgError:
        scale = max(np.abs(np.diag(H)).max(), 1.0)
        Hr = H + 1e-12 * scale * np.eye(H.shape[0])
        return -np.linalg.lstsq(Hr, grad, rcond=None)[0]


def _center(prog, z, t, opts: SolverOptions, budget: int, tol: Optional[float] = None):
    """Damped Newton centering for the barrier problem at parameter ``t``.

    Inside the quadratic-convergence region (small Newton decrement) the full
    step is taken without the Armijo test, which is unreliable there because
    the barrier value is dominated by ``t * objective`` rounding.  When the
    line search keeps cutting the step short, the gradient is at the rounding
    level of the constraint values; the point is accepted if the decrement is
    already below ``opts.stall_tol``.
    """
    used = 0
    f = _barrier_value(prog, z, t)
    prev_dec = math.inf
    short = 0
    while used < budget:
        grad, H = _barrier_derivatives(prog, z, t)
        dz = _newton_direction(grad, H)
        slope = float(grad @ dz)
        dec = -slope / 2.0
        used += 1
        # below this the barrier value and gradient are rounding noise
        floor = 1e1 * np.finfo(float).eps * max(abs(f), t * abs(float(prog.c @ z)), 1.0)
        if dec <= max(opts.newton_tol if tol is None else tol, floor):
            return z, used, True
        if slope >= 0 or not math.isfinite(slope):
            return z, used, dec < 1e-7
        if dec < max(1e-7, 10 * floor) and dec > 0.25 * prev_dec:
            # decrement no longer shrinks: working-precision floor
            return z, used, True
        prev_dec = dec
        step = 1.0
        while True:
            z_new = z + step * dz
            f_new = _barrier_value(prog, z_new, t)
            if math.isfinite(f_new) and (dec < 1e-3 or f_new <= f + opts.armijo_alpha * step * slope):
                break
            step *= opts.armijo_beta
            if step < 1e-14:
                return z, used, dec < 1e-7
        z, f = z_new, f_new
        short = short + 1 if step < 1e-3 else 0
        if short >= opts.stall_steps:
            return z, used, dec <= opts.stall_tol
    return z, used, False


def _centrality_t(prog, z, t_lo, t_hi):
    """Barrier parameter for which ``z`` is closest to the central path."""
    grad0, H = _barrier_derivatives(prog, z, 0.0)
    try:
        fac = cho_factor(H, lower=True)
    except LinAlgError:
        return t_lo
    hc = cho_solve(fac, prog.c)
    denom = float(prog.c @ hc)
    if denom <= 0:
        return t_lo
    t = float(prog.c @ cho_solve(fac, grad0)) / denom
    return float(min(max(t, t_lo), t_hi))


def _initial_point(prog: _Program) -> np.ndarray:
    """Isotropic covariances at a quarter of the budget with slacks near their bounds."""
    n, nn = prog.n, prog.nn
    ident = to_coords(np.eye(n)) / (4.0 * n)
    z = np.concatenate([ident, ident, np.zeros(prog.k)])
    base = prog.A[:, : 2 * nn] @ z[: 2 * nn] + prog.b
    for j in range(prog.k):
        col = 2 * nn + j
        ups = [base[i] for i in prog.exp_rows if prog.exp_cols[i] == col]
        if ups:
            z[col] = math.log(max(min(ups), 1e-300)) - 0.1
            continue
        lows = []
        for i in range(prog.m):
            a = prog.A[i, 2 * nn:]
            if prog.exp_cols[i] < 0 and a[j] > 0 and np.count_nonzero(a) == 1:
                lows.append(-base[i] / a[j])
        if lows:
            z[col] = max(lows) + 0.1
    return z


def _phase1_run(prog: _Program, opts: SolverOptions, z0=None):
    z = _initial_point(prog) if z0 is None else np.array(z0, float)
    p1 = _Phase1Program(prog, z)
    viol = -prog.constraint_values(z)
    worst = float(viol.max()) if viol.size else 0.0
    for cone in prog.cones:
        lam = np.linalg.eigvalsh(cone.matrix(z))[0]
        worst = max(worst, -lam)
    zz = np.append(z, worst + 1.0)
    t = 1.0
    used = 0
    while True:
        zz, it, _ = _center(p1, zz, t, opts, opts.max_newton - used)
        used += it
        tau = zz[-1]
        gap = p1.barrier_param / t
        if tau < 0:
            return True, zz[:-1], -tau, used
        if tau - gap > 0 or gap < 1e-13 or used >= opts.max_newton:
            return False, zz[:-1], -tau, used
        t *= opts.mu


def phase1(spec: SubproblemSpec, opts: Optional[SolverOptions] = None) -> Phase1Result:
    """Find a strictly feasible point or certify that none exists.

    The margin is the largest uniform shift ``tau`` by which every scaled scalar
    constraint and both PSD cones (``M >= tau I``) are simultaneously satisfied.
    """
    opts = opts or SolverOptions()
    prog = _Program(spec)
    ok, z, margin, used = _phase1_run(prog, opts)
    if ok and _strictly_feasible(prog, z):
        return Phase1Result(True, margin, prog.scaling.unpack(z), used, z)
    return Phase1Result(False, margin if not ok else 0.0, None, used, None)


def _dual_estimates(prog: _Program, z, t):
    g = prog.constraint_values(z)
    lam = 1.0 / (t * g)
    psd = {}
    for name, cone in zip(prog.psd_names, prog.cones):
        inv = np.linalg.inv(cone.matrix(z))
        psd[name] = 0.5 * (inv + inv.conj().T) / t
    return lam, psd


def solve(spec: SubproblemSpec, warm=None, tol: Optional[float] = None,
          interior=None, opts: Optional[SolverOptions] = None) -> SubproblemSolution:
    """Maximize ``objective @ slacks`` subject to the constraints of ``spec``.

    ``warm`` is a (possibly boundary) feasible point ``(S, V, slacks)``;
    ``interior`` an optional strictly feasible hint.  The warm point is pulled
    a fraction ``opts.warm_pull`` toward the interior point before use.
    """
    opts = opts or SolverOptions()
    if tol is not None:
        opts = SolverOptions(**{**opts.__dict__, "tol": tol})
    prog = _Program(spec)
    sc = prog.scaling
    used = 0

    z_int = None
    if interior is not None:
        cand = sc.pack(*interior)
        if _strictly_feasible(prog, cand):
            z_int = cand
    if z_int is None:
        ok, z_p1, margin, used = _phase1_run(prog, opts)
        if not ok or not _strictly_feasible(prog, z_p1):
            return SubproblemSolution(
                s_cov=None, v_cov=None, slacks=None, objective=-math.inf,
                status="infeasible", iterations=used, scaling=sc,
                message=f"phase 1 margin {margin:.3e}")
        z_int = z_p1

    z = z_int
    t = opts.t0
    if interior is not None and z_int is not None and used == 0:
        # the hint is the previous round's solver iterate: already interior
        # and close to the new central path when rounds change little
        t = _centrality_t(prog, z, opts.t0, prog.barrier_param / opts.tol)
    elif warm is not None:
        zw = sc.pack(*warm)
        zp = zw + opts.warm_pull * (z_int - zw)
        if _strictly_feasible(prog, zp):
            # a point this close to the boundary can need many damped steps;
            # give it a short budget and fall back to the interior point
            tw = _centrality_t(prog, zp, opts.t0, prog.barrier_param / opts.tol)
            zc, it, centered = _center(prog, zp, tw, opts, opts.warm_budget, opts.stage_tol)
            used += it
            if centered:
                z, t = zc, tw
            else:
                t = _centrality_t(prog, z, opts.t0, prog.barrier_param / opts.tol)

    status = "max-iter"
    message = ""
    while True:
        budget = opts.max_newton - used
        if budget <= 0:
            break
        final = prog.barrier_param / t <= opts.tol * (1 + 1e-9)
        z, it, centered = _center(prog, z, t, opts, budget, None if final else opts.stage_tol)
        used += it
        if not np.all(np.isfinite(z)):
            status, message = "numerical-failure", "non-finite iterate"
            break
        if final:
            status = "optimal" if centered else "numerical-failure"
            if not centered:
                message = "centering stalled at the final stage"
            break
        t = min(t * opts.mu, prog.barrier_param / opts.tol)

    lam, psd = _dual_estimates(prog, z, t)
    s, v, slacks = sc.unpack(z)
    return SubproblemSolution(
        s_cov=s, v_cov=v, slacks=slacks,
        objective=float(prog.c @ z) + prog.c_const,
        status=status, iterations=used, gap=prog.barrier_param / t,
        duals=lam, psd_duals=psd, scaling=sc, message=message, z=z,
    )


def check_solution(spec: SubproblemSpec, sol: SubproblemSolution) -> dict:
    """Scaled constraint violations recomputed in physical units from ``spec``.

    Each scalar constraint's violation is divided by the magnitude of its
    largest term, so the result is dimensionless.
    """
    out = {}
    s, v, x = sol.s_cov, sol.v_cov, sol.slacks
    for c in spec.constraints:
        val = c.value(s, v, x)
        if isinstance(c, ExpConstraint):
            scale = max(abs(c.rhs.value(s, v, x)), math.exp(x[c.slack]))
        elif isinstance(c, AffineConstraint):
            f = c.form
            parts = [abs(np.vdot(f.s_coef, s).real), abs(np.vdot(f.v_coef, v).real),
                     float(np.abs(f.slack_coef * x).sum()), abs(f.const)]
            scale = max(max(parts), 1e-300)
        elif isinstance(c, TraceBudget):
            scale = c.p_max
        else:
            scale = max(np.trace(s if c.var == "S" else v).real, 1e-300)
        out[c.tag] = max(0.0, -val) / scale
    return out


def _jsonable(x):
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def dump_debug(path, spec: SubproblemSpec, sol: Optional[SubproblemSolution] = None) -> None:
    """Write ``spec`` (and ``sol``) as JSON for offline inspection.

    Schema (version 1): ``{"schema": 1, "spec": {n, slack_names, objective,
    objective_const, slack_offsets, constraints: [{kind, tag, ...}]},
    "solution": {status, objective, iterations, gap, S, V, slacks, duals} | null}``.
    Complex matrices are stored as ``{"re": [[...]], "im": [[...]]}``.
    """
    cons = []
    for c in spec.constraints:
        if isinstance(c, (ExpConstraint, AffineConstraint)):
            f = c.rhs if isinstance(c, ExpConstraint) else c.form
            d = {"kind": "exp" if isinstance(c, ExpConstraint) else "affine", "tag": c.tag,
                 "s_coef": _jsonable(f.s_coef), "v_coef": _jsonable(f.v_coef),
                 "slack_coef": _jsonable(np.asarray(f.slack_coef)), "const": f.const}
            if isinstance(c, ExpConstraint):
                d["slack"] = c.slack
        elif isinstance(c, TraceBudget):
            d = {"kind": "trace", "tag": c.tag, "p_max": c.p_max}
        else:
            d = {"kind": "psd", "tag": c.tag, "var": c.var}
        cons.append(d)
    doc = {
        "schema": DUMP_SCHEMA_VERSION,
        "spec": {"n": spec.n, "slack_names": list(spec.slack_names),
                 "objective": _jsonable(np.asarray(spec.objective)),
                 "objective_const": spec.objective_const,
                 "slack_offsets": _jsonable(np.asarray(spec.slack_offsets)),
                 "constraints": cons},
        "solution": None,
    }
    if sol is not None:
        doc["solution"] = {
            "status": sol.status, "objective": sol.objective, "iterations": sol.iterations,
            "gap": sol.gap, "S": _jsonable(sol.s_cov), "V": _jsonable(sol.v_cov),
            "slacks": _jsonable(sol.slacks), "duals": _jsonable(sol.duals),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
