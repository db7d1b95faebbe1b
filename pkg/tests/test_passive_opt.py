import numpy as np
import pytest

from irs_swipt import conic
from irs_swipt.channel import ChannelSet, generate, make_rng
from irs_swipt.metrics import (
    ActiveSolution,
    effective_eh_channel,
    min_received_power,
    received_power,
    sinr,
)
from irs_swipt.passive_opt import (
    build_lifted,
    build_passive_sdr,
    energy_factors,
    recover_phases,
    solve_passive,
)
from irs_swipt.scenario import default_config


def unit_channels(rng, M, N, K_I, K_E):
    def c(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return ChannelSet(T=c(N, M), h_d=c(K_I, M), h_r=c(K_I, N), g_d=c(K_E, M), g_r=c(K_E, N))


def random_active(rng, M, K_I, power=1.0):
    w = (rng.standard_normal((K_I, M)) + 1j * rng.standard_normal((K_I, M)))
    if K_I:
        w *= np.sqrt(power / 2 / max(np.sum(np.abs(w) ** 2), 1e-30))
    V = rng.standard_normal((M, 2)) + 1j * rng.standard_normal((M, 2))
    S = (power / 2) * (V @ V.conj().T) / np.trace(V @ V.conj().T).real
    return ActiveSolution(w=w, S_E=S, t=0.0)


def theta_of_phi(phi):
    return np.mod(-np.angle(phi[:-1] * np.conj(phi[-1])), 2 * np.pi)


def test_energy_factors_reconstruction():
    rng = np.random.default_rng(0)
    V = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    S = V @ V.conj().T
    v = energy_factors(S)
    S_back = sum(np.outer(vk, vk.conj()) for vk in v)
    assert np.linalg.norm(S_back - S) / np.linalg.norm(S) < 1e-9
    assert v.shape[0] == 3


def test_build_lifted_no_energy():
    cfg = default_config(M=3, N=4, K_I=1, K_E=1)
    ch = generate(cfg, make_rng(1))
    act = ActiveSolution(w=np.ones((1, 3), complex), S_E=np.zeros((3, 3), complex), t=0.0)
    ld = build_lifted(ch, act, cfg)
    assert ld.n_factors == 0
    assert ld.eh_energy_blocks.shape == (1, 0, 5, 5)
    assert ld.eh_energy_direct.shape == (1, 0)


def test_build_lifted_energy_only():
    cfg = default_config(M=3, N=4, K_I=0, K_E=2)
    ch = generate(cfg, make_rng(2))
    rng = np.random.default_rng(3)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    act = ActiveSolution(w=np.zeros((0, 3), complex), S_E=np.outer(v, v.conj()), t=0.0)
    ld = build_lifted(ch, act, cfg)
    assert ld.n_factors == 1
    assert ld.id_blocks.shape == (0, 0, 5, 5) and ld.eh_info_blocks.shape == (2, 0, 5, 5)
    assert ld.eh_energy_blocks.shape == (2, 1, 5, 5)


def test_lifted_matches_direct_eh_power():
    # tr(E Phi) + |f|^2 and tr(O Phi) + |q|^2 reproduce the received power of
    # each beam at theta = -arg(phi_{1..N} / phi_{N+1})
    rng = np.random.default_rng(4)
    cfg = default_config(M=3, N=5, K_I=2, K_E=2)
    ch = unit_channels(rng, 3, 5, 2, 2)
    act = random_active(rng, 3, 2)
    ld = build_lifted(ch, act, cfg)
    for _ in range(50):
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.N + 1))
        Phi = np.outer(phi, phi.conj())
        theta = theta_of_phi(phi)
        for j in range(cfg.K_E):
            g = effective_eh_channel(ch, theta, j)
            for i in range(cfg.K_I):
                lifted = np.real(np.trace(ld.eh_info_blocks[j, i] @ Phi)) + abs(ld.eh_info_direct[j, i]) ** 2
                direct = abs(np.vdot(act.w[i], g)) ** 2
                assert lifted == pytest.approx(direct, rel=1e-10, abs=1e-12)
            total = np.real(np.trace((ld.eh_info_blocks[j].sum(0) + ld.eh_energy_blocks[j].sum(0)) @ Phi))
            total += np.sum(np.abs(ld.eh_info_direct[j]) ** 2) + np.sum(np.abs(ld.eh_energy_direct[j]) ** 2)
            assert total == pytest.approx(received_power(ch, theta, act, j), rel=1e-10)


def test_lifted_matches_direct_sinr_terms():
    rng = np.random.default_rng(5)
    cfg = default_config(M=3, N=4, K_I=2, K_E=1)
    ch = unit_channels(rng, 3, 4, 2, 1)
    act = random_active(rng, 3, 2)
    ld = build_lifted(ch, act, cfg)
    for _ in range(20):
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.N + 1))
        Phi = np.outer(phi, phi.conj())
        theta = theta_of_phi(phi)
        for i in range(cfg.K_I):
            sig = np.real(np.trace(ld.id_blocks[i, i] @ Phi)) + abs(ld.id_direct[i, i]) ** 2
            inter = sum(np.real(np.trace(ld.id_blocks[i, k] @ Phi)) + abs(ld.id_direct[i, k]) ** 2
                        for k in range(cfg.K_I) if k != i)
            direct = sinr(ch, theta, act, i, cfg.sigma2[i])
            assert sig / (inter + cfg.sigma2[i]) == pytest.approx(direct, rel=1e-9)


def test_phase_sdr_feasible_point_dominance():
    # the lifted point of the incoming phases is feasible, so the relaxed
    # optimum can only be larger than the incoming objective
    cfg = default_config(M=3, N=5, K_I=1, K_E=2)
    ch = generate(cfg, make_rng(6))
    rng = make_rng(7)
    theta0 = rng.uniform(0, 2 * np.pi, cfg.N)
    from irs_swipt.active_opt import solve_active
    act, _ = solve_active(ch, theta0, cfg, rng)
    ld = build_lifted(ch, act, cfg)
    sol = conic.solve(build_passive_sdr(ld, cfg), 1e-8)
    assert sol.status == "optimal"
    incoming = min_received_power(ch, theta0, act)
    assert sol.objective >= incoming * (1 - 1e-8)


def test_phase_sdr_zero_reflect_channels():
    # no reflect path: the objective cannot depend on the phases
    cfg = default_config(M=3, N=4, K_I=0, K_E=1)
    ch = generate(cfg, make_rng(8)).without_irs()
    rng = np.random.default_rng(9)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    act = ActiveSolution(w=np.zeros((0, 3), complex),
                         S_E=np.outer(v, v.conj()) / np.linalg.norm(v) ** 2, t=0.0)
    ld = build_lifted(ch, act, cfg)
    sol = conic.solve(build_passive_sdr(ld, cfg), 1e-8)
    expect = received_power(ch, np.zeros(cfg.N), act, 0)
    assert sol.objective == pytest.approx(expect, rel=1e-7, abs=1e-12)


def test_recover_rank_one_all_ones():
    cfg = default_config(M=3, N=4, K_I=0, K_E=1)
    ch = generate(cfg, make_rng(10))
    act = ActiveSolution(w=np.zeros((0, 3), complex), S_E=np.eye(3, dtype=complex), t=0.0)
    ld = build_lifted(ch, act, cfg)
    phi = np.ones(cfg.N + 1, complex)
    Phi = np.outer(phi, phi.conj())
    ph = recover_phases(Phi, ld, act, ch, cfg, make_rng(11))
    np.testing.assert_allclose(ph.theta, 0.0, atol=1e-9)
    assert ph.phi_rank == 1


def test_recover_global_phase_invariance():
    cfg = default_config(M=3, N=4, K_I=0, K_E=1)
    ch = generate(cfg, make_rng(12))
    act = ActiveSolution(w=np.zeros((0, 3), complex), S_E=np.eye(3, dtype=complex), t=0.0)
    ld = build_lifted(ch, act, cfg)
    rng = np.random.default_rng(13)
    phi = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.N + 1))
    for psi in (0.0, 1.1, 4.0):
        rotated = np.exp(1j * psi) * phi
        Phi = np.outer(rotated, rotated.conj())
        ph = recover_phases(Phi, ld, act, ch, cfg, make_rng(14))
        np.testing.assert_allclose(ph.theta, theta_of_phi(phi), atol=1e-9)


def test_solve_passive_n1_alignment_closed_form():
    # N = 1, K_E = 1, K_I = 0, rank-one S_E: theta* = arg(q) - arg(o) and the
    # optimum is (|o| + |q|)^2
    cfg = default_config(M=2, N=1, K_I=0, K_E=1)
    ch = unit_channels(np.random.default_rng(15), 2, 1, 0, 1)
    rng = np.random.default_rng(16)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    act = ActiveSolution(w=np.zeros((0, 2), complex), S_E=np.outer(v, v.conj()), t=0.0)
    o = (ch.g_r[0].conj() * (ch.T @ v))[0]
    q = np.vdot(ch.g_d[0], v)
    ph, t_star = solve_passive(ch, act, cfg, make_rng(17))
    expect_theta = np.mod(np.angle(q) - np.angle(o), 2 * np.pi)
    expect_obj = (abs(o) + abs(q)) ** 2
    assert ph.theta[0] == pytest.approx(expect_theta, abs=1e-5)
    assert t_star == pytest.approx(expect_obj, rel=1e-6)
    assert min_received_power(ch, ph.theta, act) == pytest.approx(expect_obj, rel=1e-6)


def test_recover_matches_grid_oracle_n2():
    # N = 2, K_E = 1, K_I = 0, rank-one S_E: exhaustive 256x256 phase grid
    cfg = default_config(M=2, N=2, K_I=0, K_E=1)
    ch = unit_channels(np.random.default_rng(18), 2, 2, 0, 1)
    rng = np.random.default_rng(19)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    act = ActiveSolution(w=np.zeros((0, 2), complex), S_E=np.outer(v, v.conj()), t=0.0)

    grid = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    o = ch.g_r[0].conj() * (ch.T @ v)
    q = np.vdot(ch.g_d[0], v)
    t1, t2 = np.meshgrid(grid, grid, indexing="ij")
    vals = np.abs(np.exp(1j * t1) * o[0] + np.exp(1j * t2) * o[1] + q) ** 2
    oracle = vals.max()

    ph, t_star = solve_passive(ch, act, cfg, make_rng(20))
    achieved = min_received_power(ch, ph.theta, act)
    assert achieved == pytest.approx(oracle, rel=0.01)
    assert achieved <= t_star * (1 + 1e-8)


def test_solve_passive_relaxation_dominates():
    from irs_swipt.active_opt import solve_active
    for seed in range(4):
        cfg = default_config(M=3, N=5, K_I=1, K_E=2)
        ch = generate(cfg, make_rng(700 + seed))
        rng = make_rng(800 + seed)
        theta0 = rng.uniform(0, 2 * np.pi, cfg.N)
        act, _ = solve_active(ch, theta0, cfg, rng)
        ph, t_star = solve_passive(ch, act, cfg, rng)
        achieved = min_received_power(ch, ph.theta, act)
        assert achieved <= t_star * (1 + 1e-6)
        # recovered phases keep the SINR constraints satisfied
        for i in range(cfg.K_I):
            assert sinr(ch, ph.theta, act, i, cfg.sigma2[i]) >= cfg.Gamma[i] * (1 - 1e-5)


def test_relaxed_phase_matrix_unit_diagonal():
    cfg = default_config(M=3, N=6, K_I=1, K_E=2)
    ch = generate(cfg, make_rng(30))
    rng = make_rng(31)
    from irs_swipt.active_opt import solve_active
    act, _ = solve_active(ch, rng.uniform(0, 2 * np.pi, cfg.N), cfg, rng)
    sol = conic.solve(build_passive_sdr(build_lifted(ch, act, cfg), cfg), 1e-8)
    assert sol.status == "optimal"
    Phi = sol.blocks[0]
    np.testing.assert_allclose(np.diag(Phi).real, 1.0, atol=1e-7)
    np.testing.assert_allclose(np.diag(Phi).imag, 0.0, atol=1e-7)
    assert np.linalg.eigvalsh(Phi)[0] >= -1e-7 * cfg.N


def test_recovered_theta_in_range():
    cfg = default_config(M=2, N=6, K_I=0, K_E=2)
    ch = generate(cfg, make_rng(21))
    act = ActiveSolution(w=np.zeros((0, 2), complex), S_E=np.eye(2, dtype=complex), t=0.0)
    ph, _ = solve_passive(ch, act, cfg, make_rng(22))
    assert np.all(ph.theta >= 0) and np.all(ph.theta < 2 * np.pi)
