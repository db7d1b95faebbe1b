"""System configuration, unit conversions, and placement geometry.

All internal math runs in linear units (watts, linear SINR). Decibel values
appear only at the config-file / CSV boundary; the JSON schema makes the unit
explicit in every field name (``p_watts``, ``gamma_db``, ...).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

Coord = tuple[float, float]


def db_to_linear(db: float) -> float:
    """10^(db/10)."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("dB undefined for non-positive value")
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(w: float) -> float:
    if w <= 0:
        raise ValueError("dBm undefined for non-positive power")
    return 10.0 * math.log10(w * 1000.0)


@dataclass(frozen=True)
class Placement:
    """2-D node positions in meters. Receivers are single-antenna points."""

    ap: Coord = (0.0, 0.0)
    irs: Coord = (8.0, 0.0)
    id_positions: tuple[Coord, ...] = ()
    eh_positions: tuple[Coord, ...] = ()


@dataclass(frozen=True)
class AlgoKnobs:
    """Algorithm controls: loop caps, tolerances, randomization counts, seed."""

    max_outer_iters: int = 50
    rel_tol: float = 1e-3            # relative objective improvement for convergence
    n_randomizations: int = 100      # Gaussian randomization trials per SDR recovery
    rank_eig_tol: float = 1e-6       # eigenvalue/lambda_max ratio treated as zero
    solver_tol: float = 1e-7         # conic duality-gap tolerance
    seed: int = 0
    init_theta: str = "random"       # "random" | "zeros"

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.rel_tol <= 0 or self.rank_eig_tol <= 0 or self.solver_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.n_randomizations < 1:
            raise ValueError("n_randomizations must be >= 1")
        if self.init_theta not in ("random", "zeros"):
            raise ValueError("init_theta must be 'random' or 'zeros'")


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario description: counts, powers, fading and path-loss model.

    Gamma (per-ID SINR thresholds) and sigma2 (per-ID noise powers) are in
    linear scale / watts and must have length K_I.
    """

    M: int = 4                       # AP antennas
    N: int = 40                      # IRS reflecting units
    K_I: int = 2                     # information-decoding receivers
    K_E: int = 2                     # energy-harvesting receivers
    P: float = 8.0                   # max transmit power, watts
    Gamma: tuple[float, ...] = ()    # SINR thresholds, linear
    sigma2: tuple[float, ...] = ()   # noise powers, watts
    rician_K: float = 10.0           # Rician factor of the AP-IRS link, linear
    kappa: float = 1e-3              # path loss at reference distance, linear
    d0: float = 1.0                  # reference distance, meters
    alpha_ap_irs: float = 2.0
    alpha_ap_rx: float = 3.5
    alpha_irs_rx: float = 2.5
    geometry: Placement = field(default_factory=Placement)
    algo: AlgoKnobs = field(default_factory=AlgoKnobs)

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.K_I < 0 or self.K_E < 1:
            raise ValueError("need K_I >= 0 and K_E >= 1")
        if self.P <= 0:
            raise ValueError("P must be > 0")
        if len(self.Gamma) != self.K_I or len(self.sigma2) != self.K_I:
            raise ValueError("Gamma and sigma2 must have length K_I")
        if any(g <= 0 for g in self.Gamma) or any(s <= 0 for s in self.sigma2):
            raise ValueError("Gamma and sigma2 entries must be > 0")
        if self.kappa <= 0 or self.d0 <= 0:
            raise ValueError("kappa and d0 must be > 0")
        if self.rician_K < 0:
            raise ValueError("rician_K must be >= 0")
        if len(self.geometry.id_positions) != self.K_I:
            raise ValueError("geometry has wrong number of ID positions")
        if len(self.geometry.eh_positions) != self.K_E:
            raise ValueError("geometry has wrong number of EH positions")


def _ring_positions(radius: float, count: int) -> tuple[Coord, ...]:
    """Evenly spaced points on a circle around the origin, angles in [-30, 30] deg."""
    if count == 0:
        return ()
    if count == 1:
        angles = [0.0]
    else:
        lo, hi = -math.pi / 6, math.pi / 6
        angles = [lo + (hi - lo) * k / (count - 1) for k in range(count)]
    return tuple((radius * math.cos(a), radius * math.sin(a)) for a in angles)


def default_config(
    M: int = 4,
    N: int = 40,
    K_I: int = 2,
    K_E: int = 2,
    P: float = 8.0,
    gamma_db: float = 15.0,
    noise_dbm: float = -80.0,
    seed: int = 0,
) -> SystemConfig:
    """Reference scenario: AP at the origin, IRS 8 m away, EH receivers on a
    3 m ring, ID receivers on a 50 m ring, N = 40 units, P = 8 W, 15 dB SINR
    targets, 10 dB Rician factor, -30 dB path loss at 1 m.

    Noise power defaults to -80 dBm; receiver counts, antenna count, and noise
    are not pinned by the reference experiments and can be overridden.
    """
    geometry = Placement(
        ap=(0.0, 0.0),
        irs=(8.0, 0.0),
        id_positions=_ring_positions(50.0, K_I),
        eh_positions=_ring_positions(3.0, K_E),
    )
    return SystemConfig(
        M=M,
        N=N,
        K_I=K_I,
        K_E=K_E,
        P=P,
        Gamma=tuple(db_to_linear(gamma_db) for _ in range(K_I)),
        sigma2=tuple(dbm_to_watts(noise_dbm) for _ in range(K_I)),
        rician_K=db_to_linear(10.0),
        kappa=db_to_linear(-30.0),
        d0=1.0,
        alpha_ap_irs=2.0,
        alpha_ap_rx=3.5,
        alpha_irs_rx=2.5,
        geometry=geometry,
        algo=AlgoKnobs(seed=seed),
    )


@dataclass(frozen=True)
class LinkDistances:
    ap_irs: float
    ap_id: tuple[float, ...]
    ap_eh: tuple[float, ...]
    irs_id: tuple[float, ...]
    irs_eh: tuple[float, ...]


def _dist(a: Coord, b: Coord) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def link_distances(cfg: SystemConfig) -> LinkDistances:
    """Euclidean distances of every link. Raises on coincident nodes."""
    g = cfg.geometry
    d = LinkDistances(
        ap_irs=_dist(g.ap, g.irs),
        ap_id=tuple(_dist(g.ap, p) for p in g.id_positions),
        ap_eh=tuple(_dist(g.ap, p) for p in g.eh_positions),
        irs_id=tuple(_dist(g.irs, p) for p in g.id_positions),
        irs_eh=tuple(_dist(g.irs, p) for p in g.eh_positions),
    )
    all_d = [d.ap_irs, *d.ap_id, *d.ap_eh, *d.irs_id, *d.irs_eh]
    if any(x <= 0.0 for x in all_d):
        raise ValueError("degenerate geometry: coincident nodes give zero link distance")
    return d


# --- config file schema (JSON, dB/dBm at the boundary) ---------------------

def config_to_dict(cfg: SystemConfig) -> dict:
    return {
        "m_antennas": cfg.M,
        "n_irs_units": cfg.N,
        "k_id": cfg.K_I,
        "k_eh": cfg.K_E,
        "p_watts": cfg.P,
        "gamma_db": [linear_to_db(g) for g in cfg.Gamma],
        "noise_dbm": [watts_to_dbm(s) for s in cfg.sigma2],
        "rician_k_db": linear_to_db(cfg.rician_K) if cfg.rician_K > 0 else -math.inf,
        "pathloss_ref_db": linear_to_db(cfg.kappa),
        "ref_distance_m": cfg.d0,
        "alpha_ap_irs": cfg.alpha_ap_irs,
        "alpha_ap_rx": cfg.alpha_ap_rx,
        "alpha_irs_rx": cfg.alpha_irs_rx,
        "geometry": {
            "ap_xy": list(cfg.geometry.ap),
            "irs_xy": list(cfg.geometry.irs),
            "id_xy": [list(p) for p in cfg.geometry.id_positions],
            "eh_xy": [list(p) for p in cfg.geometry.eh_positions],
        },
        "algo": asdict(cfg.algo),
    }


def config_from_dict(d: dict) -> SystemConfig:
    geo = d["geometry"]
    rician_db = d["rician_k_db"]
    return SystemConfig(
        M=int(d["m_antennas"]),
        N=int(d["n_irs_units"]),
        K_I=int(d["k_id"]),
        K_E=int(d["k_eh"]),
        P=float(d["p_watts"]),
        Gamma=tuple(db_to_linear(g) for g in d["gamma_db"]),
        sigma2=tuple(dbm_to_watts(s) for s in d["noise_dbm"]),
        rician_K=0.0 if rician_db == -math.inf else db_to_linear(rician_db),
        kappa=db_to_linear(d["pathloss_ref_db"]),
        d0=float(d["ref_distance_m"]),
        alpha_ap_irs=float(d["alpha_ap_irs"]),
        alpha_ap_rx=float(d["alpha_ap_rx"]),
        alpha_irs_rx=float(d["alpha_irs_rx"]),
        geometry=Placement(
            ap=tuple(geo["ap_xy"]),
            irs=tuple(geo["irs_xy"]),
            id_positions=tuple(tuple(p) for p in geo["id_xy"]),
            eh_positions=tuple(tuple(p) for p in geo["eh_xy"]),
        ),
        algo=AlgoKnobs(**d["algo"]),
    )


def save_config(cfg: SystemConfig, path: str) -> None:
    with open(path, "w") as f:
        json.dump(config_to_dict(cfg), f, indent=2)
        f.write("\n")


def load_config(path: str) -> SystemConfig:
    """Parse and validate a config file; construction enforces all invariants."""
    with open(path) as f:
        return config_from_dict(json.load(f))
