"""Fixed-phase transmit optimization: semidefinite relaxation over lifted
beamformer matrices {W_i} and the energy covariance S_E, rank-one recovery by
eigen-decomposition plus Gaussian randomization, and the power-allocation LP
that restores feasibility after randomization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic
from .channel import ChannelSet
from .conic import Constraint, ConicProblem, Functional
from .metrics import ActiveSolution, effective_eh_channel, effective_id_channel
from .scenario import SystemConfig


class ActiveStepInfeasible(RuntimeError):
    """The fixed-phase SDR has no feasible point (SINR targets too high for P)."""


class RandomizationFailed(RuntimeError):
    """No randomized rank-one candidate admitted a feasible power allocation."""


class PowerLpInfeasible(RuntimeError):
    """Power LP for one randomized candidate is infeasible (trial discarded)."""


@dataclass
class ActiveSdrSolution:
    """Optimum of the relaxed problem: lifted matrices, bound t_star, ranks."""

    W_star: tuple[np.ndarray, ...]
    S_E_star: np.ndarray
    t_star: float
    ranks: tuple[int, ...]
    rank_S_E: int
    status: str = "optimal"
    gap: float = 0.0


def build_active_sdr(ch: ChannelSet, theta: np.ndarray, cfg: SystemConfig, with_energy: bool = True) -> ConicProblem:
    """Relaxed fixed-phase problem: maximize t over W_i >= 0, S_E >= 0 with
    per-EH received power >= t, linearized per-ID SINR constraints, and the
    total power budget. ``with_energy=False`` drops S_E (information-only
    benchmark, same constraint set with sum ||w_i||^2 <= P)."""
    K_I, K_E, M = cfg.K_I, cfg.K_E, cfg.M
    h = [effective_id_channel(ch, theta, i) for i in range(K_I)]
    g = [effective_eh_channel(ch, theta, j) for j in range(K_E)]

    n_blocks = K_I + (1 if with_energy else 0)
    se_idx = K_I if with_energy else None
    eye = np.eye(M, dtype=complex)

    constraints = []
    for j in range(K_E):
        G = np.outer(g[j], g[j].conj())
        blocks = {i: G for i in range(K_I)}
        if with_energy:
            blocks[se_idx] = G
        constraints.append(Constraint(Functional(blocks=blocks, scalars={0: -1.0}), ">=", 0.0))
    for i in range(K_I):
        # SINR row in noise units (both sides divided by sigma_i^2) so the
        # right-hand side is O(1) for any noise power
        H = np.outer(h[i], h[i].conj()) / cfg.sigma2[i]
        blocks = {i: H / cfg.Gamma[i]}
        for k in range(K_I):
            if k != i:
                blocks[k] = -H
        constraints.append(Constraint(Functional(blocks=blocks), ">=", 1.0))
    power_blocks = {b: eye for b in range(n_blocks)}
    constraints.append(Constraint(Functional(blocks=power_blocks), "<=", cfg.P))

    return ConicProblem(
        psd_dims=tuple([M] * n_blocks),
        scalar_nonneg=(False,),            # t
        objective=Functional(scalars={0: 1.0}),
        constraints=constraints,
    )


def _principal_component(W: np.ndarray) -> np.ndarray:
    """sqrt(lambda_1) * u_1 with a deterministic global phase (largest entry
    rotated to the positive real axis)."""
    lam, U = np.linalg.eigh((W + W.conj().T) / 2.0)
    u = U[:, -1]
    k = int(np.argmax(np.abs(u)))
    if np.abs(u[k]) > 0:
        u = u * np.exp(-1j * np.angle(u[k]))
    return np.sqrt(max(lam[-1], 0.0)) * u


def power_lp(
    ch: ChannelSet,
    theta: np.ndarray,
    w_hat: np.ndarray,
    S_E_star: np.ndarray,
    cfg: SystemConfig,
    minimize_power: bool = True,
) -> tuple[np.ndarray, float]:
    """Power re-allocation for unit-norm rank-one directions w_hat (K_I x M):
    maximize the epigraph t over per-user powers p_i >= 0 with S_E fixed,
    subject to EH floors, SINR targets, and the residual power budget.

    With ``minimize_power`` the least-total-power optimal allocation is
    returned (a second LP pass), so no power is burned beyond what the
    objective needs; randomization sweeps skip the cleanup for speed and the
    winning candidate is re-solved with it.
    """
    K_I, K_E = cfg.K_I, cfg.K_E
    g = [effective_eh_channel(ch, theta, j) for j in range(K_E)]
    h = [effective_id_channel(ch, theta, i) for i in range(K_I)]
    a = np.array([[abs(np.vdot(w_hat[i], gj)) ** 2 for i in range(K_I)] for gj in g])
    s_const = np.array([float(np.real(gj.conj() @ S_E_star @ gj)) for gj in g])
    b = np.array([[abs(np.vdot(w_hat[k], hi)) ** 2 for k in range(K_I)] for hi in h])
    budget = max(cfg.P - float(np.trace(S_E_star).real), 0.0)

    def sinr_rows():
        rows = []
        for i in range(K_I):
            # noise units: rhs 1 keeps tiny sigma^2 visible to the LP solver
            coeff = {i: b[i, i] / (cfg.Gamma[i] * cfg.sigma2[i])}
            for k in range(K_I):
                if k != i:
                    coeff[k] = coeff.get(k, 0.0) - b[i, k] / cfg.sigma2[i]
            rows.append(Constraint(Functional(scalars=coeff), ">=", 1.0))
        return rows

    t_idx = K_I
    cons = [
        Constraint(
            Functional(scalars={**{i: a[j, i] for i in range(K_I)}, t_idx: -1.0}),
            ">=",
            -s_const[j],
        )
        for j in range(K_E)
    ]
    cons += sinr_rows()
    cons.append(Constraint(Functional(scalars={i: 1.0 for i in range(K_I)}), "<=", budget))
    prob = ConicProblem(
        psd_dims=(),
        scalar_nonneg=tuple([True] * K_I + [False]),
        objective=Functional(scalars={t_idx: 1.0}),
        constraints=cons,
    )
    sol = conic.solve(prob, cfg.algo.solver_tol)
    if sol.status in ("infeasible", "unbounded") or not sol.scalars:
        raise PowerLpInfeasible("power LP infeasible for this candidate")
    t_opt = sol.objective
    p = np.maximum(np.array(sol.scalars[:K_I]), 0.0)
    if not minimize_power:
        return p, float(t_opt)

    # lexicographic cleanup: hold t and minimize total power
    t_req = t_opt - abs(t_opt) * 1e-9
    cons2 = [
        Constraint(Functional(scalars={i: a[j, i] for i in range(K_I)}), ">=", t_req - s_const[j])
        for j in range(K_E)
    ]
    cons2 += sinr_rows()
    cons2.append(Constraint(Functional(scalars={i: 1.0 for i in range(K_I)}), "<=", budget))
    prob2 = ConicProblem(
        psd_dims=(),
        scalar_nonneg=tuple([True] * K_I),
        objective=Functional(scalars={i: -1.0 for i in range(K_I)}),
        constraints=cons2,
    )
    sol2 = conic.solve(prob2, cfg.algo.solver_tol)
    if sol2.status == "optimal":
        p = np.maximum(np.array(sol2.scalars[:K_I]), 0.0)
        t_opt = float(min(a @ p + s_const)) if K_E else t_opt
    return p, float(t_opt)


def solve_active(
    ch: ChannelSet,
    theta: np.ndarray,
    cfg: SystemConfig,
    rng: np.random.Generator,
    with_energy: bool = True,
) -> tuple[ActiveSolution, ActiveSdrSolution]:
    """Full fixed-phase pipeline: solve the SDR; if every W_i is rank one,
    extract beamformers directly, otherwise run Gaussian randomization with
    the power LP and keep the best feasible trial. Falls back to principal
    eigenvectors if every random trial fails."""
    M, K_I = cfg.M, cfg.K_I
    prob = build_active_sdr(ch, theta, cfg, with_energy=with_energy)
    sol = conic.solve(prob, cfg.algo.solver_tol)
    if sol.status in ("infeasible", "unbounded"):
        raise ActiveStepInfeasible(f"active step {sol.status}")
    if not sol.blocks:
        raise ActiveStepInfeasible("active step solver failure")

    W_list = [sol.blocks[i] for i in range(K_I)]
    S_E = sol.blocks[K_I] if with_energy else np.zeros((M, M), complex)
    t_star = float(sol.objective)
    tol = cfg.algo.rank_eig_tol
    sdr = ActiveSdrSolution(
        W_star=tuple(W_list),
        S_E_star=S_E,
        t_star=t_star,
        ranks=tuple(conic.rank_of(W, tol) for W in W_list),
        rank_S_E=conic.rank_of(S_E, tol),
        status=sol.status,
        gap=sol.gap,
    )

    if K_I == 0:
        return ActiveSolution(w=np.zeros((0, M), complex), S_E=S_E, t=t_star), sdr

    # Rank-one branch, judged functionally: principal-eigenvector extraction
    # is kept when it is feasible and achieves the relaxation bound, which is
    # exactly the all-rank-one case but robust to solver eigenvalue noise.
    w_try = np.array([_principal_component(W) for W in W_list])
    act_try = ActiveSolution(w=w_try, S_E=S_E, t=t_star)
    from .metrics import check_feasible, min_received_power  # local: avoid cycle
    if check_feasible(ch, theta, act_try, cfg).feasible:
        obj_try = min_received_power(ch, theta, act_try)
        if obj_try >= t_star - abs(t_star) * 1e-6:
            return act_try, sdr

    # Gaussian randomization: w_bar = U Sigma^(1/2) r, r ~ CN(0, I)
    eigs = []
    for W in W_list:
        lam, U = np.linalg.eigh((W + W.conj().T) / 2.0)
        eigs.append((np.sqrt(np.maximum(lam, 0.0)), U))
    best = None
    for _ in range(cfg.algo.n_randomizations):
        w_hat = np.zeros((K_I, M), complex)
        degenerate = False
        for i, (slam, U) in enumerate(eigs):
            r = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / np.sqrt(2.0)
            w_bar = U @ (slam * r)
            nrm = np.linalg.norm(w_bar)
            if nrm < 1e-30:
                degenerate = True
                break
            w_hat[i] = w_bar / nrm
        if degenerate:
            continue
        try:
            p, t_trial = power_lp(ch, theta, w_hat, S_E, cfg, minimize_power=False)
        except PowerLpInfeasible:
            continue
        if best is None or t_trial > best[1]:
            best = (w_hat.copy(), t_trial)

    if best is None:
        # deterministic last resort: principal directions of each W_i
        w_hat = np.zeros((K_I, M), complex)
        for i, W in enumerate(W_list):
            v = _principal_component(W)
            nrm = np.linalg.norm(v)
            if nrm < 1e-30:
                raise RandomizationFailed("randomization failed: degenerate W block")
            w_hat[i] = v / nrm
        try:
            power_lp(ch, theta, w_hat, S_E, cfg, minimize_power=False)
        except PowerLpInfeasible as exc:
            raise RandomizationFailed("randomization failed: no feasible candidate") from exc
        best = (w_hat, float("nan"))

    w_hat = best[0]
    p, t_best = power_lp(ch, theta, w_hat, S_E, cfg, minimize_power=True)
    w = np.sqrt(p)[:, None] * w_hat
    return ActiveSolution(w=w, S_E=S_E, t=float(t_best)), sdr


def rank_report(sdr: ActiveSdrSolution) -> dict:
    """Rank diagnostics of the relaxed optimum (number of active beams)."""
    return {"W": sdr.ranks, "S_E": sdr.rank_S_E}
