import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdsecrecy import subsolver as ss
from fdsecrecy.model import ContractError


def _herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def _form(n, s=0.0, v=0.0, slack=(0.0,), const=0.0):
    eye = np.eye(n, dtype=complex)
    return ss.AffineForm(s * eye, v * eye, np.asarray(slack, float), const)


def _common(n):
    return (ss.TraceBudget(1.0, "power"), ss.PsdConstraint("S", "S>=0"), ss.PsdConstraint("V", "V>=0"))


def toy_spec(n=1, price=0.3):
    """max ln(1 + 4 tr S) + ln(1 + tr V) - price tr S over tr S + tr V <= 1."""
    cons = (
        ss.ExpConstraint(0, _form(n, s=4.0, slack=(0, 0, 0), const=1.0), "a"),
        ss.ExpConstraint(1, _form(n, v=1.0, slack=(0, 0, 0), const=1.0), "b"),
        ss.AffineConstraint(_form(n, s=-price, slack=(0, 0, 1)), "c"),
    ) + _common(n)
    return ss.SubproblemSpec(n, ("x1", "x2", "y"), np.array([1.0, 1.0, -1.0]), cons, np.zeros(3))


def toy_oracle(price=0.3):
    s = np.linspace(0, 1, 400_001)
    return float(np.max(np.log1p(4 * s) + np.log1p(1 - s) - price * s))


def test_real_embedding_examples():
    m = np.array([[1, 1j], [-1j, 2]])
    e = ss.real_embedding(m)
    assert e.shape == (4, 4)
    np.testing.assert_allclose(e, [[1, 0, 0, -1], [0, 2, 1, 0], [0, 1, 1, 0], [-1, 0, 0, 2]])
    np.testing.assert_allclose(ss.real_embedding_inverse(e), m)
    assert ss.real_embedding(np.eye(3)).tolist() == np.eye(6).tolist()
    flip = ss.real_embedding(np.array([[0, 1j], [-1j, 0]]))
    np.testing.assert_allclose(np.linalg.eigvalsh(flip), [-1, -1, 1, 1], atol=1e-14)
    assert np.trace(ss.real_embedding(m)) == pytest.approx(2 * np.trace(m).real)
    with pytest.raises(ContractError):
        ss.real_embedding(np.array([[0, 1], [0, 0]]))


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_real_embedding_spectrum(n, seed):
    m = _herm(np.random.default_rng(seed), n)
    ev = np.linalg.eigvalsh(m)
    ev2 = np.linalg.eigvalsh(ss.real_embedding(m))
    np.testing.assert_allclose(np.repeat(ev, 2), ev2, atol=1e-10)
    sign, ld = np.linalg.slogdet(ss.real_embedding(m @ m + np.eye(n)))
    assert sign > 0
    assert ld == pytest.approx(2 * np.linalg.slogdet(m @ m + np.eye(n))[1], rel=1e-10)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_coordinates_round_trip(n, seed):
    m = _herm(np.random.default_rng(seed), n)
    z = ss.to_coords(m)
    assert z.shape == (n * n,) and z.dtype.kind == "f"
    np.testing.assert_allclose(ss.from_coords(z, n), m, atol=1e-12)
    assert float(z @ z) == pytest.approx(np.linalg.norm(m) ** 2, rel=1e-12)


def test_hermitian_basis_orthonormal():
    for n in (1, 2, 4):
        b = ss.hermitian_basis(n)
        gram = np.einsum("kij,lij->kl", b.conj(), b).real
        np.testing.assert_allclose(gram, np.eye(n * n), atol=1e-14)
        for m in b:
            np.testing.assert_allclose(m, m.conj().T)


def test_spec_contracts():
    good = toy_spec()
    with pytest.raises(ContractError):
        ss.SubproblemSpec(1, good.slack_names, good.objective, good.constraints[:3] + good.constraints[4:],
                          good.slack_offsets)
    with pytest.raises(ContractError):
        ss.SubproblemSpec(1, good.slack_names, good.objective, good.constraints[:4], good.slack_offsets)
    with pytest.raises(ContractError):
        ss.SubproblemSpec(1, good.slack_names, np.ones(2), good.constraints, good.slack_offsets)


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("price", [0.0, 0.3, 2.0])
def test_toy_matches_grid(n, price):
    sol = ss.solve(toy_spec(n, price))
    assert sol.ok
    assert sol.objective == pytest.approx(toy_oracle(price), abs=1e-4)
    assert sol.objective <= toy_oracle(price) + 1e-6
    viol = ss.check_solution(toy_spec(n, price), sol)
    assert max(viol.values()) < 1e-9


def test_duals_and_complementarity():
    spec = toy_spec(2)
    sol = ss.solve(spec)
    assert np.all(sol.duals > 0)
    for z in sol.psd_duals.values():
        assert np.linalg.eigvalsh(z)[0] > 0
    assert sol.gap <= 1e-8 * (1 + 1e-6)
    # the trace budget binds and its multiplier is strictly positive
    tr = next(i for i, c in enumerate(spec.scalar_constraints) if isinstance(c, ss.TraceBudget))
    assert float(np.trace(sol.s_cov + sol.v_cov).real) == pytest.approx(1.0, abs=1e-6)
    assert sol.duals[tr] > 1e-3


def test_stationarity_in_physical_units():
    # at the optimum of the toy, d/ds [ln(1+4s) + ln(1+v) - p s] along s+v=1 is zero
    sol = ss.solve(toy_spec(1, 0.3))
    s = float(sol.s_cov.real[0, 0])
    v = float(sol.v_cov.real[0, 0])
    assert 4 / (1 + 4 * s) - 1 / (1 + v) - 0.3 == pytest.approx(0.0, abs=1e-5)


def test_phase1_examples():
    res = ss.phase1(toy_spec(2))
    assert res.feasible and res.margin > 0
    s, v, x = res.point
    spec = toy_spec(2)
    for c in spec.constraints:
        assert c.value(s, v, x) > 0, c.tag


def _infeasible_spec():
    cons = (
        ss.ExpConstraint(0, _form(1, s=1.0, const=1.0), "cap"),
        ss.AffineConstraint(_form(1, slack=(1.0,), const=-5.0), "floor"),
    ) + _common(1)
    return ss.SubproblemSpec(1, ("x",), np.array([1.0]), cons, np.zeros(1))


def test_infeasible_spec():
    res = ss.phase1(_infeasible_spec())
    assert not res.feasible and res.point is None and res.margin < 0
    sol = ss.solve(_infeasible_spec())
    assert sol.status == "infeasible" and sol.objective == -math.inf


def test_warm_start_agrees_with_cold():
    spec = toy_spec(3)
    cold = ss.solve(spec)
    warm = ss.solve(spec, warm=(0.5 * np.eye(3) / 3, 0.5 * np.eye(3) / 3, np.array([0.0, 0.0, 0.2])))
    hint = ss.solve(spec, interior=(cold.s_cov * 0.9, cold.v_cov * 0.9, cold.slacks - [0.1, 0.1, -0.1]))
    assert warm.objective == pytest.approx(cold.objective, abs=1e-7)
    assert hint.objective == pytest.approx(cold.objective, abs=1e-7)


def test_dump_debug_round_trip(tmp_path):
    spec = toy_spec(2)
    sol = ss.solve(spec)
    path = tmp_path / "dump.json"
    ss.dump_debug(path, spec, sol)
    doc = json.loads(path.read_text())
    assert doc["schema"] == ss.DUMP_SCHEMA_VERSION == 1
    assert [c["tag"] for c in doc["spec"]["constraints"]] == spec.tags()
    assert doc["solution"]["status"] == "optimal"
    assert doc["solution"]["objective"] == pytest.approx(sol.objective)
    s = np.array(doc["solution"]["S"]["re"]) + 1j * np.array(doc["solution"]["S"]["im"])
    np.testing.assert_allclose(s, sol.s_cov)
    ss.dump_debug(tmp_path / "spec_only.json", spec)
    assert json.loads((tmp_path / "spec_only.json").read_text())["solution"] is None


def test_phase1_zero_energy_requirement():
    from fdsecrecy.harness import gen_channels
    from fdsecrecy.model import SystemConfig
    from fdsecrecy.spca import SecrecyProblem, feasibility_spec

    cfg = SystemConfig(e_min=0.0)
    spec = feasibility_spec(SecrecyProblem.from_channels(gen_channels(cfg, 0), cfg))
    iso = np.eye(cfg.n_tx) * cfg.p_bs / (4 * cfg.n_tx)
    assert all(c.value(iso, iso, np.zeros(0)) > 0 for c in spec.constraints)
    res = ss.phase1(spec)
    assert res.feasible and res.margin > 0
