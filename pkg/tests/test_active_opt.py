import dataclasses

import numpy as np
import pytest

from irs_swipt import conic
from irs_swipt.active_opt import (
    ActiveStepInfeasible,
    PowerLpInfeasible,
    build_active_sdr,
    power_lp,
    rank_report,
    solve_active,
)
from irs_swipt.channel import ChannelSet, generate, make_rng
from irs_swipt.conic import Constraint, ConicProblem, Functional
from irs_swipt.metrics import (
    check_feasible,
    effective_eh_channel,
    effective_id_channel,
    min_received_power,
)
from irs_swipt.scenario import default_config


def cfg_small(**kw):
    return default_config(**{"M": 3, "N": 4, "K_I": 1, "K_E": 1, **kw})


def test_energy_only_collapses_to_mrt():
    # K_I = 0, K_E = 1: optimum is P ||g||^2 with S_E on the matched direction
    cfg = cfg_small(K_I=0)
    ch = generate(cfg, make_rng(0))
    theta = np.zeros(cfg.N)
    act, sdr = solve_active(ch, theta, cfg, make_rng(1))
    g = effective_eh_channel(ch, theta, 0)
    expect = cfg.P * np.linalg.norm(g) ** 2
    assert sdr.t_star == pytest.approx(expect, rel=1e-6)
    assert act.t == pytest.approx(expect, rel=1e-6)
    assert act.w.shape == (0, cfg.M)
    assert sdr.rank_S_E == 1
    assert min_received_power(ch, theta, act) == pytest.approx(expect, rel=1e-6)


def test_single_user_power_minimization_oracle():
    # power-minimization variant: minimize tr(W) s.t. lifted SINR >= Gamma
    # has the closed form Gamma sigma^2 / ||h||^2
    cfg = cfg_small(K_I=1, K_E=1)
    ch = generate(cfg, make_rng(2))
    h = effective_id_channel(ch, np.zeros(cfg.N), 0)
    H = np.outer(h, h.conj())
    prob = ConicProblem(
        psd_dims=(cfg.M,),
        scalar_nonneg=(),
        objective=Functional(blocks={0: -np.eye(cfg.M, dtype=complex)}),
        constraints=[Constraint(Functional(blocks={0: H / cfg.Gamma[0]}), ">=", cfg.sigma2[0])],
    )
    sol = conic.solve(prob, 1e-9)
    expect = cfg.Gamma[0] * cfg.sigma2[0] / np.linalg.norm(h) ** 2
    assert sol.status == "optimal"
    assert -sol.objective == pytest.approx(expect, rel=1e-6)


def test_infeasible_gamma_detected():
    cfg = cfg_small()
    cfg = dataclasses.replace(cfg, Gamma=(1e18,))
    ch = generate(cfg, make_rng(3))
    with pytest.raises(ActiveStepInfeasible):
        solve_active(ch, np.zeros(cfg.N), cfg, make_rng(4))


def grid_oracle_fixed_phase(ch, theta, cfg, n_beam=64):
    """Exhaustive fixed-phase oracle for M = 2, K_I = 1, K_E = 1.

    The information beam direction is gridded on the complex unit sphere
    (up to global phase); the power split has a closed form: the SINR
    constraint binds (energy covariance always pays at least as well), and
    the remaining power goes to the matched energy covariance.
    """
    h = effective_id_channel(ch, theta, 0)
    g = effective_eh_channel(ch, theta, 0)
    alphas = np.linspace(0, np.pi / 2, n_beam)
    betas = np.linspace(0, 2 * np.pi, n_beam, endpoint=False)
    A, B = np.meshgrid(alphas, betas, indexing="ij")
    U = np.stack([np.cos(A), np.sin(A) * np.exp(1j * B)], axis=-1).reshape(-1, 2)
    sig_h = np.abs(U @ h.conj()) ** 2
    sig_g = np.abs(U @ g.conj()) ** 2
    p_min = cfg.Gamma[0] * cfg.sigma2[0] / np.maximum(sig_h, 1e-300)
    feas = p_min <= cfg.P
    obj = p_min * sig_g + (cfg.P - p_min) * np.linalg.norm(g) ** 2
    obj[~feas] = -np.inf
    return float(obj.max())


def test_solve_active_matches_grid_oracle():
    cfg = default_config(M=2, N=3, K_I=1, K_E=1)
    ch = generate(cfg, make_rng(5))
    theta = make_rng(6).uniform(0, 2 * np.pi, cfg.N)
    act, sdr = solve_active(ch, theta, cfg, make_rng(7))
    oracle = grid_oracle_fixed_phase(ch, theta, cfg)
    achieved = min_received_power(ch, theta, act)
    assert achieved == pytest.approx(oracle, rel=0.01)


def test_relaxation_dominates_recovered():
    for seed in range(5):
        cfg = cfg_small(K_I=2, K_E=2)
        ch = generate(cfg, make_rng(100 + seed))
        theta = make_rng(200 + seed).uniform(0, 2 * np.pi, cfg.N)
        act, sdr = solve_active(ch, theta, cfg, make_rng(300 + seed))
        achieved = min_received_power(ch, theta, act)
        assert achieved <= sdr.t_star * (1 + 1e-6) + 1e-15


def test_returned_solution_is_feasible():
    for seed in range(5):
        cfg = cfg_small(K_I=2, K_E=2)
        ch = generate(cfg, make_rng(400 + seed))
        theta = make_rng(500 + seed).uniform(0, 2 * np.pi, cfg.N)
        act, _ = solve_active(ch, theta, cfg, make_rng(600 + seed))
        assert check_feasible(ch, theta, act, cfg).feasible


def test_sdr_bound_monotone_in_power_and_gamma():
    cfg = cfg_small(K_I=1, K_E=2)
    ch = generate(cfg, make_rng(8))
    theta = np.zeros(cfg.N)

    def bound(cfg_v):
        sol = conic.solve(build_active_sdr(ch, theta, cfg_v), 1e-9)
        assert sol.status == "optimal"
        return sol.objective

    t_by_P = [bound(dataclasses.replace(cfg, P=P)) for P in (2.0, 5.0, 8.0)]
    assert t_by_P[0] <= t_by_P[1] * (1 + 1e-8) and t_by_P[1] <= t_by_P[2] * (1 + 1e-8)

    t_by_G = [bound(dataclasses.replace(cfg, Gamma=(g,))) for g in (3.16, 31.6, 316.0)]
    assert t_by_G[0] * (1 + 1e-8) >= t_by_G[1] and t_by_G[1] * (1 + 1e-8) >= t_by_G[2]


def test_power_lp_single_user_min_power():
    # beam aligned with h but orthogonal to g: the LP spends only the SINR
    # minimum on it, so p = Gamma sigma^2 / ||h||^2
    cfg = cfg_small(M=3, K_I=1, K_E=1)
    rng = np.random.default_rng(9)
    h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    g = np.cross(h.conj(), rng.standard_normal(3) + 1j * rng.standard_normal(3))
    g = g - (np.vdot(h, g) / np.linalg.norm(h) ** 2) * h   # exact orthogonality
    ch = ChannelSet(
        T=np.zeros((cfg.N, 3), complex),
        h_d=h.reshape(1, 3), h_r=np.zeros((1, cfg.N), complex),
        g_d=g.reshape(1, 3), g_r=np.zeros((1, cfg.N), complex),
    )
    w_hat = (h / np.linalg.norm(h)).reshape(1, 3)
    S = 0.25 * np.outer(g, g.conj()) / np.linalg.norm(g) ** 2
    p, t = power_lp(ch, np.zeros(cfg.N), w_hat, S, cfg)
    expect_p = cfg.Gamma[0] * cfg.sigma2[0] / np.linalg.norm(h) ** 2
    expect_t = float(np.real(g.conj() @ S @ g))
    assert p[0] == pytest.approx(expect_p, rel=1e-6)
    assert t == pytest.approx(expect_t, rel=1e-6)


def test_power_lp_orthogonal_beam_infeasible():
    # w_hat orthogonal to h: the SINR target is unreachable at any power
    cfg = cfg_small(M=3, K_I=1, K_E=1)
    ch = generate(cfg, make_rng(10))
    h = effective_id_channel(ch, np.zeros(cfg.N), 0)
    u = np.zeros(3, complex)
    u[np.argmin(np.abs(h))] = 1.0
    u = u - (np.vdot(h, u) / np.linalg.norm(h) ** 2) * h
    u /= np.linalg.norm(u)
    assert abs(np.vdot(h, u)) < 1e-12
    with pytest.raises(PowerLpInfeasible):
        power_lp(ch, np.zeros(cfg.N), u.reshape(1, 3), np.zeros((3, 3), complex), cfg)


def test_power_lp_scaling_oracle():
    # doubling the EH channels (and thus the fixed S_E term) rescales t by 4
    # while leaving the optimal p unchanged
    cfg = cfg_small(M=3, K_I=1, K_E=2)
    ch = generate(cfg, make_rng(11))
    theta = np.zeros(cfg.N)
    rng = np.random.default_rng(12)
    w_hat = rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))
    w_hat /= np.linalg.norm(w_hat)
    V = rng.standard_normal((3, 1)) + 1j * rng.standard_normal((3, 1))
    S = 0.1 * (V @ V.conj().T) / np.linalg.norm(V) ** 2
    p1, t1 = power_lp(ch, theta, w_hat, S, cfg)
    ch2 = ChannelSet(T=ch.T, h_d=ch.h_d, h_r=ch.h_r, g_d=2 * ch.g_d, g_r=2 * ch.g_r)
    p2, t2 = power_lp(ch2, theta, w_hat, S, cfg)
    np.testing.assert_allclose(p1, p2, rtol=1e-6, atol=1e-12)
    assert t2 == pytest.approx(4 * t1, rel=1e-6)


def test_rank_report():
    cfg = cfg_small(K_I=0, K_E=1)
    ch = generate(cfg, make_rng(13))
    _, sdr = solve_active(ch, np.zeros(cfg.N), cfg, make_rng(14))
    rep = rank_report(sdr)
    assert rep["S_E"] == 1
    assert rep["W"] == ()
    assert conic.rank_of(np.eye(4, dtype=complex), 1e-6) == 4


def test_sdr_solution_satisfies_lifted_constraints():
    # the relaxed optimum itself honors EH floors, lifted SINR rows, the
    # power budget, and PSD-ness within solver tolerance
    cfg = cfg_small(K_I=2, K_E=2, M=4)
    ch = generate(cfg, make_rng(17))
    theta = make_rng(18).uniform(0, 2 * np.pi, cfg.N)
    _, sdr = solve_active(ch, theta, cfg, make_rng(19))
    tol = 1e-6
    g = [effective_eh_channel(ch, theta, j) for j in range(cfg.K_E)]
    h = [effective_id_channel(ch, theta, i) for i in range(cfg.K_I)]
    for j in range(cfg.K_E):
        eh = sum(float(np.real(g[j].conj() @ W @ g[j])) for W in sdr.W_star)
        eh += float(np.real(g[j].conj() @ sdr.S_E_star @ g[j]))
        assert eh >= sdr.t_star * (1 - tol)
    for i in range(cfg.K_I):
        sig = float(np.real(h[i].conj() @ sdr.W_star[i] @ h[i]))
        inter = sum(float(np.real(h[i].conj() @ sdr.W_star[k] @ h[i]))
                    for k in range(cfg.K_I) if k != i)
        assert sig / cfg.Gamma[i] - inter - cfg.sigma2[i] >= -tol * cfg.sigma2[i] * cfg.Gamma[i]
    total = sum(float(np.trace(W).real) for W in sdr.W_star)
    total += float(np.trace(sdr.S_E_star).real)
    assert total <= cfg.P * (1 + tol)
    for W in list(sdr.W_star) + [sdr.S_E_star]:
        assert np.linalg.eigvalsh(W)[0] >= -tol * max(np.trace(W).real, 1e-300)


def test_build_active_sdr_without_energy():
    cfg = cfg_small(K_I=1, K_E=1)
    ch = generate(cfg, make_rng(15))
    prob = build_active_sdr(ch, np.zeros(cfg.N), cfg, with_energy=False)
    assert prob.psd_dims == (cfg.M,)          # only W_1, no S_E block
    act, sdr = solve_active(ch, np.zeros(cfg.N), cfg, make_rng(16), with_energy=False)
    assert np.all(sdr.S_E_star == 0)
    assert check_feasible(ch, np.zeros(cfg.N), act, cfg).feasible
