"""Synthetic uplink channels and link-budget arithmetic.

Channels are i.i.d. Rayleigh with unit average entry power: full path-loss
compensation to a common received power removes large-scale disparity
between users, so the signal-to-noise ratio enters only through the
normalized noise power returned by :func:`noise_power`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinkBudget",
    "THERMAL_NOISE_DBM_PER_HZ",
    "noise_power_dbm",
    "noise_power",
    "snr_db",
    "generate_iid_rayleigh",
    "save_channel",
    "load_channel",
]

THERMAL_NOISE_DBM_PER_HZ = -174.0

_MAGIC = b"CHM1"
_HEADER = struct.Struct("<4sIIQ")


@dataclass(frozen=True)
class LinkBudget:
    """Target received power plus the receiver noise parameters."""

    p0_dbm: float
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 5.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")


def noise_power_dbm(budget: LinkBudget) -> float:
    """Thermal noise power at the receiver in dBm."""
    return (
        THERMAL_NOISE_DBM_PER_HZ
        + 10.0 * np.log10(budget.bandwidth_hz)
        + budget.noise_figure_db
    )


def noise_power(budget: LinkBudget) -> float:
    """Noise power normalized to the target received power (linear scale).

    With unit-average-power channel columns the per-stream SNR in dB is
    ``p0_dbm - noise_power_dbm(budget)``, so the rate formulas take this
    normalized value directly.
    """
    return float(10.0 ** ((noise_power_dbm(budget) - budget.p0_dbm) / 10.0))


def snr_db(budget: LinkBudget) -> float:
    """Nominal per-stream SNR in dB for a unit-norm-squared channel."""
    return budget.p0_dbm - noise_power_dbm(budget)


def generate_iid_rayleigh(m: int, u: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an m-by-u channel matrix with i.i.d. unit-variance complex entries.

    Column norms squared then average to m. All-zero columns (probability
    zero, but the contract forbids them) are redrawn.
    """
    if m < 1 or u < 1:
        raise ValueError(f"require m >= 1 and u >= 1, got m={m}, u={u}")
    h = (rng.standard_normal((m, u)) + 1j * rng.standard_normal((m, u))) / np.sqrt(2.0)
    while True:
        dead = ~h.any(axis=0)
        if not dead.any():
            break
        n_dead = int(dead.sum())
        h[:, dead] = (
            rng.standard_normal((m, n_dead)) + 1j * rng.standard_normal((m, n_dead))
        ) / np.sqrt(2.0)
    return h


def save_channel(path, matrix: np.ndarray, seed: int = 0) -> None:
    """Write a channel matrix as a small regression fixture.

    Layout: magic ``CHM1``, little-endian uint32 m, uint32 u, uint64 seed,
    then for each column its m entries as interleaved (real, imag) float64.
    """
    h = np.asarray(matrix, dtype=np.complex128)
    if h.ndim != 2:
        raise ValueError(f"channel matrix must be 2-D, got shape {h.shape}")
    m, u = h.shape
    payload = np.empty((u, m, 2), dtype="<f8")
    payload[:, :, 0] = h.real.T
    payload[:, :, 1] = h.imag.T
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, m, u, int(seed) & (2**64 - 1)))
        fh.write(payload.tobytes())


def load_channel(path) -> tuple[np.ndarray, int]:
    """Read a channel fixture written by :func:`save_channel`."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"truncated channel file: {path}")
        magic, m, u, seed = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"not a channel file (bad magic): {path}")
        raw = fh.read()
    expected = m * u * 2 * 8
    if len(raw) != expected:
        raise ValueError(
            f"channel file payload is {len(raw)} bytes, expected {expected}: {path}"
        )
    payload = np.frombuffer(raw, dtype="<f8").reshape(u, m, 2)
    h = (payload[:, :, 0] + 1j * payload[:, :, 1]).T
    return np.ascontiguousarray(h), int(seed)
