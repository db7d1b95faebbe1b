"""Physical-layer metrics for candidate solutions: combined channels through
the reflecting surface, per-user SINR, received RF power, and feasibility
reports. Every objective the package reports is computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .scenario import SystemConfig


@dataclass
class ActiveSolution:
    """Transmit-side solution: information beamformers w (K_I x M, one row per
    ID receiver), energy covariance S_E (M x M Hermitian PSD), epigraph value
    t in watts (the solver's achieved min received power)."""

    w: np.ndarray
    S_E: np.ndarray
    t: float

    def __post_init__(self):
        M = self.S_E.shape[0]
        if self.S_E.shape != (M, M) or self.w.ndim != 2 or self.w.shape[1] != M:
            raise ValueError("inconsistent beamformer / covariance shapes")
        scale = max(float(np.abs(self.S_E).max()), 1e-300)
        if np.abs(self.S_E - self.S_E.conj().T).max() > 1e-9 * scale:
            raise ValueError("S_E must be Hermitian")

    def transmit_power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2) + np.trace(self.S_E).real)


@dataclass
class PhaseSolution:
    """Reflecting phases theta in [0, 2pi)^N plus lifting diagnostics: the
    auxiliary unit-modulus scalar l and the rank of the lifted certificate
    (phi_rank == 1 means the relaxation was tight; -1 means not applicable)."""

    theta: np.ndarray
    l: complex = 1.0 + 0.0j
    phi_rank: int = -1

    def __post_init__(self):
        object.__setattr__(self, "theta", np.mod(np.asarray(self.theta, float), 2.0 * np.pi))


def phase_diag(theta: np.ndarray) -> np.ndarray:
    """Diagonal of the reflection matrix: e^{j theta_n}."""
    return np.exp(1j * np.asarray(theta))


def effective_id_channel(ch: ChannelSet, theta: np.ndarray, i: int) -> np.ndarray:
    """Combined AP->ID channel T^H Theta^H h_r + h_d (length M)."""
    return ch.T.conj().T @ (np.conj(phase_diag(theta)) * ch.h_r[i]) + ch.h_d[i]


def effective_eh_channel(ch: ChannelSet, theta: np.ndarray, j: int) -> np.ndarray:
    """Combined AP->EH channel T^H Theta^H g_r + g_d (length M)."""
    return ch.T.conj().T @ (np.conj(phase_diag(theta)) * ch.g_r[j]) + ch.g_d[j]


def sinr(ch: ChannelSet, theta: np.ndarray, active: ActiveSolution, i: int, sigma2: float) -> float:
    """Post-cancellation SINR at ID receiver i: the energy signal is a known
    pseudo-random sequence the receiver subtracts, so only other users'
    information beams interfere."""
    h = effective_id_channel(ch, theta, i)
    if active.w.size == 0:
        return 0.0
    gains = np.abs(active.w @ h.conj()) ** 2
    interference = float(np.sum(gains) - gains[i])
    return float(gains[i]) / (interference + sigma2)


def received_power(ch: ChannelSet, theta: np.ndarray, active: ActiveSolution, j: int) -> float:
    """RF power collected at EH receiver j: g^H S_E g + sum_i |g^H w_i|^2."""
    g = effective_eh_channel(ch, theta, j)
    energy = float(np.real(g.conj() @ active.S_E @ g))
    info = float(np.sum(np.abs(active.w @ g.conj()) ** 2)) if active.w.size else 0.0
    return energy + info


def min_received_power(ch: ChannelSet, theta: np.ndarray, active: ActiveSolution) -> float:
    return min(received_power(ch, theta, active, j) for j in range(ch.g_d.shape[0]))


@dataclass
class FeasibilityReport:
    """Raw constraint slacks (positive = satisfied) plus a tolerance verdict.

    sinr_slack[i] = gamma_i - Gamma_i (linear SINR units); power_slack in
    watts; se_min_eig is the smallest eigenvalue of S_E. The `feasible` flag
    applies `tol` relatively: each slack is compared against -tol times its
    natural scale (Gamma_i, P, tr S_E).
    """

    sinr_slack: tuple[float, ...]
    power_slack: float
    se_min_eig: float
    phases_in_range: bool
    feasible: bool
    sinr: tuple[float, ...] = field(default=())


def check_feasible(
    ch: ChannelSet,
    theta: np.ndarray,
    active: ActiveSolution,
    cfg: SystemConfig,
    tol: float = 1e-6,
) -> FeasibilityReport:
    theta = np.asarray(theta, float)
    sinrs = tuple(sinr(ch, theta, active, i, cfg.sigma2[i]) for i in range(cfg.K_I))
    sinr_slack = tuple(s - g for s, g in zip(sinrs, cfg.Gamma))
    power_slack = cfg.P - active.transmit_power()
    se_min_eig = float(np.linalg.eigvalsh((active.S_E + active.S_E.conj().T) / 2.0)[0])
    se_tr = float(np.trace(active.S_E).real)
    phases_ok = bool(np.all((theta >= 0.0) & (theta < 2.0 * np.pi)))

    ok = all(sl >= -tol * g for sl, g in zip(sinr_slack, cfg.Gamma))
    ok = ok and power_slack >= -tol * cfg.P
    ok = ok and se_min_eig >= -tol * max(se_tr, 1e-300)
    ok = ok and phases_ok
    return FeasibilityReport(
        sinr_slack=sinr_slack,
        power_slack=power_slack,
        se_min_eig=se_min_eig,
        phases_in_range=phases_ok,
        feasible=bool(ok),
        sinr=sinrs,
    )
