"""Solver tests: stepping identity, convergence orders, costs, reproducibility.

``modified_euler`` below is an independently written specialization for
r = 0; the general stepper must reproduce it bit for bit, which pins down
the exact arithmetic of the update (no algebraically-equal-but-reordered
variants allowed).
"""

import dataclasses
import math

import numpy as np
import pytest

from ivporacle import (
    ContractViolationError,
    CostLedger,
    DivergenceError,
    DomainError,
    MODES,
    OracleConfig,
    SolveConfig,
    Trajectory,
    VecPolynomial,
    boost_median,
    catalog,
    derive_seed,
    eval_rhs,
    eval_trajectory,
    integrate_deterministic,
    integrate_quantum_sim,
    integrate_randomized,
    integrate_reference,
    quantum_reference,
    repetitions_for,
    solve,
    sup_error,
)


def modified_euler(problem, cfg):
    """Independent r = 0 stepper: y + h f(y) + h^(1+rho) A, same oracles."""
    a, b = problem.interval
    n = cfg.n
    h = (b - a) / n
    rho = problem.smoothness.rho
    ledger = CostLedger()
    f_eta = eval_rhs(problem, problem.eta, ledger)
    if np.max(np.abs(f_eta)) == 0.0:
        raise ContractViolationError("stationary start")
    oracle_cfg = None
    if cfg.mode in ("det_values", "randomized", "quantum_sim"):
        kind = "deterministic" if cfg.mode == "det_values" else cfg.mode
        oracle_cfg = OracleConfig(kind=kind, eps1=h, smoothness=(0, rho),
                                  seed=cfg.seed, cost_constant=cfg.cost_constant)
    k = repetitions_for(cfg.delta, n, cfg.c) if cfg.mode in ("randomized", "quantum_sim") else 1
    y = problem.eta.copy()
    states = [y.copy()]
    for i in range(n):
        f0 = eval_rhs(problem, y, ledger)

        def g(u, y=y, f0=f0):
            u = np.asarray(u, dtype=float)
            s = u * h
            pts = f0[:, None] * s + y[:, None] if s.ndim else f0 * s + y
            fv = eval_rhs(problem, pts, ledger)
            w = f0[:, None] if s.ndim else f0
            return (fv - w) * h ** (-rho)

        g.dim = problem.dim
        if cfg.mode == "det_exact":
            a_i = integrate_reference(lambda u: g(u, y=y, f0=f0), tol=1e-12)
        elif cfg.mode == "det_values":
            a_i = integrate_deterministic(g, oracle_cfg).value
        elif cfg.mode == "randomized":
            a_i = boost_median(
                lambda j: integrate_randomized(
                    g, dataclasses.replace(oracle_cfg, seed=derive_seed(cfg.seed, i, j))),
                k).value
        else:
            ref = quantum_reference(g)
            a_i = boost_median(
                lambda j: integrate_quantum_sim(
                    g, dataclasses.replace(oracle_cfg, seed=derive_seed(cfg.seed, i, j)),
                    reference=ref),
                k).value
        y = y + f0 * (h ** 1 / 1) + h ** (1.0 + rho) * a_i
        states.append(y.copy())
    return np.array(states)


class TestSolveConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(n=0),
        dict(n=2.5),
        dict(n=4, mode="rk4"),
        dict(n=4, delta=0.5),
        dict(n=4, delta=0.0),
        dict(n=4, seed=-3),
        dict(n=4, cost_constant=0.0),
        dict(n=4, c=-1.0),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ContractViolationError):
            SolveConfig(**kwargs)

    def test_defaults(self):
        cfg = SolveConfig(n=8)
        assert cfg.mode == "det_exact"
        assert cfg.delta == 0.1


class TestSolveBasics:
    def test_one_step_hand_value(self):
        # h = 0.1: 1 + 0.1 + 0.01 * (1/2)
        p = catalog("scalar-exponential", r=0, interval=(0.0, 0.1))
        traj = solve(p, SolveConfig(n=1))
        assert traj.endpoints[-1, 0] == pytest.approx(1.105, abs=1e-12)

    def test_trajectory_structure(self):
        p = catalog("scalar-quadratic", r=2)
        traj = solve(p, SolveConfig(n=5))
        assert traj.n == 5
        assert traj.dim == 1
        assert len(traj.breakpoints) == 6
        np.testing.assert_allclose(traj.breakpoints, np.linspace(0.0, 0.5, 6), atol=1e-15)
        np.testing.assert_array_equal(traj.endpoints[0], p.eta)
        for i, piece in enumerate(traj.pieces):
            assert piece.degree == 3  # r + 1
            np.testing.assert_array_equal(piece(traj.breakpoints[i]), traj.endpoints[i])

    def test_linear_rhs_r1_residual_vanishes(self):
        # w reproduces f, so the correction target is zero and det modes agree
        p = catalog("scalar-exponential", r=1)
        t_exact = solve(p, SolveConfig(n=8, mode="det_exact"))
        t_values = solve(p, SolveConfig(n=8, mode="det_values"))
        np.testing.assert_allclose(t_exact.endpoints, t_values.endpoints, atol=1e-12)

    def test_product_formula_r0(self):
        # per step the update factors: y -> y (1 + h + h^2/2)
        p = catalog("scalar-exponential", r=0)
        n = 16
        traj = solve(p, SolveConfig(n=n))
        h = 1.0 / n
        expected = (1.0 + h + 0.5 * h * h) ** n
        assert traj.endpoints[-1, 0] == pytest.approx(expected, abs=1e-12)

    def test_integration_reduction_endpoint(self):
        # v(1) = int_0^1 cos(pi u) du = 0
        p = catalog("integration-reduction:cos-pi", r=2)
        traj = solve(p, SolveConfig(n=32))
        assert abs(traj.endpoints[-1, 1]) <= 1e-6

    def test_stationary_start_rejected(self):
        p = catalog("logistic", eta=1.0)  # f(1) = 0
        with pytest.raises(ContractViolationError):
            solve(p, SolveConfig(n=4))

    def test_divergence_reported_with_step(self):
        # quadratic blow-up at t = 1 inside the requested interval
        p = catalog("scalar-quadratic", r=1, interval=(0.0, 2.0))
        with pytest.raises(DivergenceError) as info:
            solve(p, SolveConfig(n=64))
        assert 0 <= info.value.step < 64


class TestEvalTrajectory:
    def test_grid_points_exact(self):
        p = catalog("scalar-quadratic", r=1)
        traj = solve(p, SolveConfig(n=4))
        for i, t in enumerate(traj.breakpoints[:-1]):
            np.testing.assert_array_equal(eval_trajectory(traj, t), traj.endpoints[i])

    def test_right_endpoint_uses_last_piece(self):
        p = catalog("scalar-exponential", r=0)
        traj = solve(p, SolveConfig(n=4))
        expected = traj.pieces[-1](traj.breakpoints[-1])
        np.testing.assert_array_equal(eval_trajectory(traj, 1.0), expected)

    def test_midpoint_of_degree_one_piece(self):
        p = catalog("scalar-exponential", r=0, interval=(0.0, 0.1))
        traj = solve(p, SolveConfig(n=1))
        assert eval_trajectory(traj, 0.05)[0] == pytest.approx(1.05, abs=1e-15)

    @pytest.mark.parametrize("t", [-0.1, 1.1])
    def test_domain_guard(self, t):
        p = catalog("scalar-exponential", r=0)
        traj = solve(p, SolveConfig(n=4))
        with pytest.raises(DomainError):
            eval_trajectory(traj, t)


class TestSupError:
    def test_self_reference_is_zero(self):
        # single piece: no seams, so the trajectory matches itself exactly
        p = catalog("logistic", r=1)
        traj = solve(p, SolveConfig(n=1))
        assert sup_error(traj, lambda t: eval_trajectory(traj, t)) == 0.0

    def test_constant_gap(self):
        traj = Trajectory(
            breakpoints=np.array([0.0, 1.0]),
            pieces=(VecPolynomial(center=0.0, coeffs=np.array([[1.0]])),),
            endpoints=np.array([[1.0], [1.0]]),
            ledger=CostLedger(), mode="det_exact",
        )
        assert sup_error(traj, lambda t: np.array([0.0])) == 1.0

    def test_samples_per_step_floor(self):
        p = catalog("scalar-exponential", r=0)
        traj = solve(p, SolveConfig(n=2))
        with pytest.raises(ContractViolationError):
            sup_error(traj, p.reference, samples_per_step=1)

    def test_halving_h_quarters_error(self):
        p = catalog("scalar-exponential", r=0)
        errs = {n: sup_error(solve(p, SolveConfig(n=n)), p.reference) for n in (16, 32)}
        ratio = errs[16] / errs[32]
        assert 3.0 <= ratio <= 5.0  # 2^(r+rho+1) = 4 within 25%


ORDER_CASES = [
    ("scalar-exponential", 0, 1.0),
    ("scalar-exponential", 1, 1.0),
    ("scalar-exponential", 2, 1.0),
    ("integration-reduction:cos-pi", 0, 1.0),
    ("integration-reduction:cos-pi", 1, 1.0),
    ("integration-reduction:cos-pi", 2, 1.0),
]


@pytest.mark.parametrize("name,r,rho", ORDER_CASES)
def test_det_exact_convergence_order(name, r, rho):
    """log-log slope of sup_error vs h must sit near r + rho + 1."""
    p = catalog(name, r=r, rho=rho)
    ns = np.array([8, 16, 32, 64, 128])
    errs = np.array([sup_error(solve(p, SolveConfig(n=int(n))), p.reference) for n in ns])
    hs = (p.interval[1] - p.interval[0]) / ns
    slope = np.polyfit(np.log2(hs), np.log2(errs), 1)[0]
    assert r + rho + 0.7 <= slope <= r + rho + 1.5, (name, r, rho, slope)


@pytest.mark.parametrize("mode", ["randomized", "quantum_sim"])
def test_probabilistic_order_bound(mode):
    """sup_error <= 3x the det_exact error at the same n, for >= 90% of seeds."""
    p = catalog("scalar-exponential", r=0)
    n = 16
    base = sup_error(solve(p, SolveConfig(n=n, mode="det_exact")), p.reference)
    bound = 3.0 * base
    hits = 0
    seeds = 200
    for seed in range(seeds):
        traj = solve(p, SolveConfig(n=n, mode=mode, delta=0.1, seed=seed))
        hits += sup_error(traj, p.reference) <= bound
    assert hits / seeds >= 0.9, (mode, hits / seeds)


class TestCostAccounting:
    def test_det_exact_charges_one_functional_per_component_per_step(self):
        p = catalog("integration-reduction:cos-pi", r=1)
        traj = solve(p, SolveConfig(n=6, mode="det_exact"))
        assert traj.ledger.oracle_queries == 6 * 2
        assert traj.ledger.repetitions == 0

    def test_det_values_pays_in_classical_evals(self):
        p = catalog("scalar-exponential", r=0)
        n = 8
        traj = solve(p, SolveConfig(n=n, mode="det_values"))
        budget = math.ceil(4.0 * (1.0 / n) ** (-1.0))
        # 1 start check + per step: 1 derivative fetch + 1 map fetch + budget points
        assert traj.ledger.classical_evals == 1 + n * (2 + budget)
        assert traj.ledger.oracle_queries == 0

    def test_boosted_modes_log_repetitions(self):
        p = catalog("scalar-exponential", r=0)
        n = 8
        k = repetitions_for(0.1, n)
        for mode in ("randomized", "quantum_sim"):
            traj = solve(p, SolveConfig(n=n, mode=mode, delta=0.1))
            assert traj.ledger.repetitions == n * k, mode

    def test_quantum_queries_are_modeled_budget(self):
        p = catalog("scalar-exponential", r=0)
        n = 8
        k = repetitions_for(0.1, n)
        per_call = math.ceil(4.0 * (1.0 / n) ** (-0.5))
        traj = solve(p, SolveConfig(n=n, mode="quantum_sim"))
        assert traj.ledger.oracle_queries == n * k * per_call
        # the reference quadrature inside the simulator is never charged
        assert traj.ledger.classical_evals == 1 + n * 2


@pytest.mark.parametrize("mode", MODES)
def test_seed_reproducibility(mode):
    p = catalog("scalar-quadratic", r=1)
    cfg = SolveConfig(n=8, mode=mode, seed=1234)
    t1, t2 = solve(p, cfg), solve(p, cfg)
    np.testing.assert_array_equal(t1.endpoints, t2.endpoints)
    for a, b in zip(t1.pieces, t2.pieces):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name", ["scalar-exponential", "logistic"])
def test_general_stepper_specializes_to_modified_euler(mode, name):
    """At r = 0 the stepper is modified Euler, bit for bit."""
    p = catalog(name, r=0)
    for seed in range(3):
        cfg = SolveConfig(n=8, mode=mode, seed=seed)
        states = modified_euler(p, cfg)
        traj = solve(p, cfg)
        np.testing.assert_array_equal(traj.endpoints, states)
