"""Fixed-beamformer phase optimization: lift the unit-modulus phase vector to
a PSD matrix with unit diagonal, solve the relaxed problem, and recover
phases by eigen-decomposition or Gaussian randomization.

Sign convention: the lifted vector phi carries e^{-j theta_n} in its first N
entries plus an auxiliary unit-modulus scalar, and the lifted matrix is the
outer product with entries Phi[m, n] = phi_m * conj(phi_n). Phases are
recovered as theta = -arg(phi_n / phi_{N+1}), which makes every lifted
constraint value equal the direct one computed with Theta = diag(e^{j theta}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic
from .channel import ChannelSet
from .conic import Constraint, ConicProblem, Functional
from .metrics import ActiveSolution, PhaseSolution, min_received_power, sinr
from .scenario import SystemConfig


class PassiveStepFailure(RuntimeError):
    """Phase subproblem could not produce a feasible phase vector; the caller
    keeps the incumbent phases."""


@dataclass
class LiftedData:
    """Block matrices and scalars of the lifted phase problem.

    id_blocks[k, i]:        ID channel k x information beam i (SINR terms)
    eh_info_blocks[j, i]:   EH channel j x information beam i
    eh_energy_blocks[j, k]: EH channel j x energy eigen-beam k
    id_direct / eh_info_direct / eh_energy_direct: the matching direct-link
    scalars; factors: rows v_k with S_E = sum_k v_k v_k^H (n_factors kept).
    """

    id_blocks: np.ndarray
    eh_info_blocks: np.ndarray
    eh_energy_blocks: np.ndarray
    id_direct: np.ndarray
    eh_info_direct: np.ndarray
    eh_energy_direct: np.ndarray
    factors: np.ndarray
    n_factors: int


def _lift(c: np.ndarray, d: complex) -> np.ndarray:
    """(N+1)x(N+1) Hermitian block [[c c^H, c d*], [c^H d, 0]]: for unit-modulus
    phi, tr(lift(c,d) phi^H phi) + |d|^2 = |sum_n e^{j theta_n} c_n + d|^2."""
    N = c.shape[0]
    M = np.zeros((N + 1, N + 1), complex)
    M[:N, :N] = np.outer(c, c.conj())
    M[:N, N] = c * np.conj(d)
    M[N, :N] = c.conj() * d
    return M


def energy_factors(S_E: np.ndarray, keep_tol: float = 1e-10) -> np.ndarray:
    """Factor S_E = sum_k v_k v_k^H by eigen-decomposition, keeping eigenpairs
    above keep_tol * lambda_max so the reconstruction error stays below 1e-9
    relative Frobenius. Returns (r_E, M) rows v_k, strongest first."""
    lam, U = np.linalg.eigh((S_E + S_E.conj().T) / 2.0)
    lam_max = lam[-1] if lam.size else 0.0
    if lam_max <= 0.0:
        return np.zeros((0, S_E.shape[0]), complex)
    keep = lam > keep_tol * lam_max
    order = np.argsort(lam[keep])[::-1]
    lam_k = lam[keep][order]
    U_k = U[:, keep][:, order]
    return (np.sqrt(lam_k)[None, :] * U_k).T


def build_lifted(ch: ChannelSet, active: ActiveSolution, cfg: SystemConfig) -> LiftedData:
    """Assemble the lifted coefficient blocks for the current beamformers."""
    N, K_I, K_E = cfg.N, cfg.K_I, cfg.K_E
    v = energy_factors(active.S_E)
    r_E = v.shape[0]

    Tw = np.array([ch.T @ active.w[i] for i in range(K_I)]).reshape(K_I, N)
    Tv = np.array([ch.T @ v[k] for k in range(r_E)]).reshape(r_E, N)

    C = np.zeros((K_I, K_I, N + 1, N + 1), complex)
    d = np.zeros((K_I, K_I), complex)
    for k in range(K_I):
        for i in range(K_I):
            c_ki = ch.h_r[k].conj() * Tw[i]          # diag(h_r^H) T w_i
            d[k, i] = ch.h_d[k].conj() @ active.w[i]
            C[k, i] = _lift(c_ki, d[k, i])

    E = np.zeros((K_E, K_I, N + 1, N + 1), complex)
    f = np.zeros((K_E, K_I), complex)
    for j in range(K_E):
        for i in range(K_I):
            e_ji = ch.g_r[j].conj() * Tw[i]
            f[j, i] = ch.g_d[j].conj() @ active.w[i]
            E[j, i] = _lift(e_ji, f[j, i])

    O = np.zeros((K_E, r_E, N + 1, N + 1), complex)
    q = np.zeros((K_E, r_E), complex)
    for j in range(K_E):
        for k in range(r_E):
            o_jk = ch.g_r[j].conj() * Tv[k]
            q[j, k] = ch.g_d[j].conj() @ v[k]
            O[j, k] = _lift(o_jk, q[j, k])

    return LiftedData(id_blocks=C, eh_info_blocks=E, eh_energy_blocks=O,
                      id_direct=d, eh_info_direct=f, eh_energy_direct=q,
                      factors=v, n_factors=r_E)


def build_passive_sdr(ld: LiftedData, cfg: SystemConfig) -> ConicProblem:
    """Relaxed lifted problem: maximize t over Phi >= 0 with unit diagonal,
    EH floors and SINR constraints expressed through the lifted blocks."""
    N1 = cfg.N + 1
    K_I, K_E = cfg.K_I, cfg.K_E
    constraints = []
    for j in range(K_E):
        A = ld.eh_info_blocks[j].sum(axis=0) if K_I else np.zeros((N1, N1), complex)
        if ld.n_factors:
            A = A + ld.eh_energy_blocks[j].sum(axis=0)
        const = float(np.sum(np.abs(ld.eh_info_direct[j]) ** 2) + np.sum(np.abs(ld.eh_energy_direct[j]) ** 2))
        if np.abs(A).max() > 0.0:
            constraints.append(
                Constraint(Functional(blocks={0: A}, scalars={0: -1.0}), ">=", -const))
        else:
            constraints.append(Constraint(Functional(scalars={0: -1.0}), ">=", -const))
    for i in range(K_I):
        B = ld.id_blocks[i, i].copy()
        rhs = -float(np.abs(ld.id_direct[i, i]) ** 2) + cfg.Gamma[i] * cfg.sigma2[i]
        for k in range(K_I):
            if k != i:
                B -= cfg.Gamma[i] * ld.id_blocks[i, k]
                rhs += cfg.Gamma[i] * float(np.abs(ld.id_direct[i, k]) ** 2)
        if np.abs(B).max() > 0.0:
            constraints.append(Constraint(Functional(blocks={0: B}), ">=", rhs))
        elif rhs > 0.0:
            raise PassiveStepFailure(
                "fixed beamformers violate a SINR target for every phase choice")
        # else: constraint holds identically; row dropped
    for n in range(N1):
        En = np.zeros((N1, N1), complex)
        En[n, n] = 1.0
        constraints.append(Constraint(Functional(blocks={0: En}), "==", 1.0))
    return ConicProblem(
        psd_dims=(N1,),
        scalar_nonneg=(False,),
        objective=Functional(scalars={0: 1.0}),
        constraints=constraints,
    )


def _project_unit(phi: np.ndarray) -> np.ndarray:
    out = phi.copy()
    mags = np.abs(out)
    out[mags < 1e-300] = 1.0
    mags = np.abs(out)
    return out / mags


def _theta_from_phi(phi: np.ndarray) -> np.ndarray:
    """theta_n = -arg(phi_n / phi_{N+1}) wrapped into [0, 2pi)."""
    ratio = phi[:-1] * np.conj(phi[-1])
    return np.mod(-np.angle(ratio), 2.0 * np.pi)


def recover_phases(
    Phi_star: np.ndarray,
    ld: LiftedData,
    active: ActiveSolution,
    ch: ChannelSet,
    cfg: SystemConfig,
    rng: np.random.Generator,
    feas_tol: float = 1e-6,
) -> PhaseSolution:
    """Turn the relaxed optimum into unit-modulus phases.

    Rank one: the principal eigenvector already has unit-modulus entries.
    Higher rank: Gaussian randomization phi = U Sigma^(1/2) r with every entry
    projected to the unit circle; candidates are scored on the true objective
    and must satisfy the SINR constraints (relative slack feas_tol) with the
    fixed beamformers. The projected principal eigenvector always enters as a
    deterministic candidate. Raises PassiveStepFailure if nothing feasible."""
    Phi = (Phi_star + Phi_star.conj().T) / 2.0
    lam, U = np.linalg.eigh(Phi)
    lam = np.maximum(lam, 0.0)
    rank = conic.rank_of(Phi, cfg.algo.rank_eig_tol)

    candidates = [_project_unit(np.sqrt(lam[-1]) * U[:, -1])]
    if rank > 1:
        scaled = U * np.sqrt(lam)[None, :]
        n1 = Phi.shape[0]
        for _ in range(cfg.algo.n_randomizations):
            r = (rng.standard_normal(n1) + 1j * rng.standard_normal(n1)) / np.sqrt(2.0)
            candidates.append(_project_unit(scaled @ r))

    best_obj, best_phi, best_theta = -np.inf, None, None
    for phi in candidates:
        theta = _theta_from_phi(phi)
        ok = all(
            sinr(ch, theta, active, i, cfg.sigma2[i]) >= cfg.Gamma[i] * (1.0 - feas_tol)
            for i in range(cfg.K_I)
        )
        if not ok:
            continue
        obj = min_received_power(ch, theta, active)
        if obj > best_obj:
            best_obj, best_phi, best_theta = obj, phi, theta
    if best_phi is None:
        raise PassiveStepFailure("passive recovery failed: no feasible candidate")
    return PhaseSolution(theta=best_theta, l=complex(best_phi[-1]), phi_rank=rank)


def solve_passive(
    ch: ChannelSet,
    active: ActiveSolution,
    cfg: SystemConfig,
    rng: np.random.Generator,
) -> tuple[PhaseSolution, float]:
    """Build, relax, solve, and recover. Returns the recovered phases and the
    relaxation optimum t_star (an upper bound on any recovered objective)."""
    ld = build_lifted(ch, active, cfg)
    prob = build_passive_sdr(ld, cfg)
    sol = conic.solve(prob, cfg.algo.solver_tol)
    if sol.status in ("infeasible", "unbounded") or not sol.blocks:
        raise PassiveStepFailure(f"phase relaxation {sol.status}")
    ph = recover_phases(sol.blocks[0], ld, active, ch, cfg, rng)
    return ph, float(sol.objective)
