"""Random channel synthesis: Rician AP-IRS matrix, Rayleigh direct/reflect
links, each scaled by distance-based path loss kappa*(d/d0)^(-alpha).

Everything is driven by a numpy Generator; ``make_rng(seed, *key)`` builds
independent streams from a seed and an integer key path, so Monte-Carlo
trials are reproducible and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import SystemConfig, link_distances


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible stream for (seed, key...). Streams with
    different keys never overlap; the same (seed, key) always reproduces."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    T:   (N, M) AP -> IRS
    h_d: (K_I, M) AP -> ID receivers     h_r: (K_I, N) IRS -> ID receivers
    g_d: (K_E, M) AP -> EH receivers     g_r: (K_E, N) IRS -> EH receivers
    """

    T: np.ndarray
    h_d: np.ndarray
    h_r: np.ndarray
    g_d: np.ndarray
    g_r: np.ndarray

    def __post_init__(self):
        for name in ("T", "h_d", "h_r", "g_d", "g_r"):
            a = getattr(self, name)
            if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def n_units(self) -> int:
        return self.T.shape[0]

    def without_irs(self) -> "ChannelSet":
        """Copy with all reflect links zeroed (IRS absent)."""
        return ChannelSet(
            T=np.zeros_like(self.T),
            h_d=self.h_d.copy(),
            h_r=np.zeros_like(self.h_r),
            g_d=self.g_d.copy(),
            g_r=np.zeros_like(self.g_r),
        )


def path_loss(d: float, alpha: float, kappa: float, d0: float = 1.0) -> float:
    """Linear power gain kappa * (d/d0)^(-alpha); requires d > 0."""
    if d <= 0:
        raise ValueError("path_loss requires d > 0")
    return kappa * (d / d0) ** (-alpha)


def draw_rayleigh(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    """i.i.d. CSCG entries with per-entry variance = gain (E|x|^2 = gain)."""
    scale = np.sqrt(gain / 2.0)
    return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))


def steering_vector(phi: float, length: int) -> np.ndarray:
    """Uniform linear array response at half-wavelength spacing:
    entry m = exp(j*pi*m*sin(phi)), m = 0..length-1."""
    return np.exp(1j * np.pi * np.arange(length) * np.sin(phi))


def draw_rician(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    gain: float,
    K: float,
    aod: float,
    aoa: float,
) -> np.ndarray:
    """Rician matrix: sqrt(gain) * (sqrt(K/(K+1))*LOS + sqrt(1/(K+1))*NLOS).

    LOS is the unit-modulus outer product a(aoa, rows) a(aod, cols)^H of ULA
    steering vectors; NLOS has i.i.d. unit-variance CSCG entries. Per-entry
    second moment is gain for any K >= 0.
    """
    los = np.outer(steering_vector(aoa, rows), steering_vector(aod, cols).conj())
    nlos = draw_rayleigh(rng, rows, cols, 1.0)
    return np.sqrt(gain) * (np.sqrt(K / (K + 1.0)) * los + np.sqrt(1.0 / (K + 1.0)) * nlos)


def generate(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """One full channel realization for cfg.

    Draw order (fixed for reproducibility): LOS departure/arrival angles,
    AP-IRS matrix, then per-receiver AP->ID, IRS->ID, AP->EH, IRS->EH links.
    LOS angles are redrawn uniformly in [0, 2pi) per realization.
    """
    d = link_distances(cfg)
    g_ap_irs = path_loss(d.ap_irs, cfg.alpha_ap_irs, cfg.kappa, cfg.d0)

    aod = rng.uniform(0.0, 2.0 * np.pi)
    aoa = rng.uniform(0.0, 2.0 * np.pi)
    T = draw_rician(rng, cfg.N, cfg.M, g_ap_irs, cfg.rician_K, aod, aoa)

    h_d = np.zeros((cfg.K_I, cfg.M), complex)
    h_r = np.zeros((cfg.K_I, cfg.N), complex)
    for i in range(cfg.K_I):
        h_d[i] = draw_rayleigh(rng, 1, cfg.M, path_loss(d.ap_id[i], cfg.alpha_ap_rx, cfg.kappa, cfg.d0))
        h_r[i] = draw_rayleigh(rng, 1, cfg.N, path_loss(d.irs_id[i], cfg.alpha_irs_rx, cfg.kappa, cfg.d0))

    g_d = np.zeros((cfg.K_E, cfg.M), complex)
    g_r = np.zeros((cfg.K_E, cfg.N), complex)
    for j in range(cfg.K_E):
        g_d[j] = draw_rayleigh(rng, 1, cfg.M, path_loss(d.ap_eh[j], cfg.alpha_ap_rx, cfg.kappa, cfg.d0))
        g_r[j] = draw_rayleigh(rng, 1, cfg.N, path_loss(d.irs_eh[j], cfg.alpha_irs_rx, cfg.kappa, cfg.d0))

    return ChannelSet(T=T, h_d=h_d, h_r=h_r, g_d=g_d, g_r=g_r)


def save_channels(ch: ChannelSet, path: str) -> None:
    """Dump a realization to .npz (keys T, h_d, h_r, g_d, g_r) so the exact
    channels can be replayed elsewhere."""
    np.savez(path, T=ch.T, h_d=ch.h_d, h_r=ch.h_r, g_d=ch.g_d, g_r=ch.g_r)


def load_channels(path: str) -> ChannelSet:
    with np.load(path) as z:
        return ChannelSet(T=z["T"], h_d=z["h_d"], h_r=z["h_r"], g_d=z["g_d"], g_r=z["g_r"])
