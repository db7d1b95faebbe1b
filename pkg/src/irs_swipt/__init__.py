"""Max-min energy beamforming for an IRS-assisted multiuser MISO SWIPT
downlink: joint transmit (information + energy) beamforming and reflective
phase-shift optimization via alternating semidefinite relaxation."""

from .scenario import SystemConfig, Placement, AlgoKnobs, default_config, link_distances
from .channel import ChannelSet, generate, make_rng, path_loss, draw_rayleigh, draw_rician
from .metrics import (
    ActiveSolution,
    PhaseSolution,
    check_feasible,
    effective_eh_channel,
    effective_id_channel,
    min_received_power,
    received_power,
    sinr,
)
from .conic import ConicProblem, ConicSolution, solve, rank_of
from .active_opt import build_active_sdr, solve_active, power_lp, rank_report
from .passive_opt import build_lifted, build_passive_sdr, recover_phases, solve_passive
from .optimizer import Scheme, RunRecord, optimize, compare_schemes

__all__ = [
    "SystemConfig", "Placement", "AlgoKnobs", "default_config", "link_distances",
    "ChannelSet", "generate", "make_rng", "path_loss", "draw_rayleigh", "draw_rician",
    "ActiveSolution", "PhaseSolution", "check_feasible", "effective_eh_channel",
    "effective_id_channel", "min_received_power", "received_power", "sinr",
    "ConicProblem", "ConicSolution", "solve", "rank_of",
    "build_active_sdr", "solve_active", "power_lp", "rank_report",
    "build_lifted", "build_passive_sdr", "recover_phases", "solve_passive",
    "Scheme", "RunRecord", "optimize", "compare_schemes",
]
