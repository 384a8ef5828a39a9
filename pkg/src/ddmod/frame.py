"""Frame geometry, QAM mapping and deterministic randomness.

A frame has M delay bins (subcarriers) spaced delta_f apart and N Doppler
bins (symbols) of duration 1/delta_f, so the bandwidth is B = M*delta_f,
the duration is T = N/delta_f and the time-bandwidth product B*T = M*N is
the dimension of every signal vector in the simulator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameConfig",
    "SeededRng",
    "make_frame_config",
    "qam_constellation",
    "qam_map",
    "qam_demap",
]


@dataclass(frozen=True)
class FrameConfig:
    """Grid geometry shared by all modules."""

    m: int
    n: int
    delta_f: float

    @property
    def bandwidth(self) -> float:
        """B in Hz."""
        return self.m * self.delta_f

    @property
    def duration(self) -> float:
        """T in seconds."""
        return self.n / self.delta_f

    @property
    def mn(self) -> int:
        """Total dimension B*T = M*N."""
        return self.m * self.n


def make_frame_config(m: int, n: int, delta_f: float) -> FrameConfig:
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    if not delta_f > 0:
        raise ValueError(f"subcarrier spacing must be positive, got {delta_f}")
    return FrameConfig(int(m), int(n), float(delta_f))


@dataclass(frozen=True)
class SeededRng:
    """Deterministic, counter-derived random stream.

    Identical (master_seed, stream_id) pairs yield bitwise-identical draws;
    distinct stream_ids give statistically independent streams, so
    Monte-Carlo trials can run in parallel without sharing state.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(seq)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected SeededRng or numpy Generator, got {type(rng)!r}")


# Gray-coded, unit-average-energy constellations.  For 4-QAM the bit pair
# (b1, b0) maps to ((1 - 2*b1) + 1j*(1 - 2*b0)) / sqrt(2); demapping ties
# break toward the lowest constellation index.
_GRAY_LEVELS_2BIT = np.array([3, 1, -3, -1], dtype=float)  # index = 2*b_hi + b_lo


def _build_constellation(order: int) -> np.ndarray:
    if order == 4:
        b1 = np.array([0, 0, 1, 1])
        b0 = np.array([0, 1, 0, 1])
        return ((1 - 2 * b1) + 1j * (1 - 2 * b0)) / np.sqrt(2.0)
    if order == 16:
        pts = np.empty(16, dtype=complex)
        for idx in range(16):
            i_half = (idx >> 2) & 0b11
            q_half = idx & 0b11
            pts[idx] = _GRAY_LEVELS_2BIT[i_half] + 1j * _GRAY_LEVELS_2BIT[q_half]
        return pts / np.sqrt(10.0)
    raise ValueError(f"unsupported QAM order {order} (supported: 4, 16)")


_CONSTELLATIONS = {order: _build_constellation(order) for order in (4, 16)}


def qam_constellation(order: int) -> np.ndarray:
    """Gray-coded constellation with E[|s|^2] = 1, indexed by the bit word."""
    if order not in _CONSTELLATIONS:
        raise ValueError(f"unsupported QAM order {order} (supported: 4, 16)")
    return _CONSTELLATIONS[order].copy()


def qam_map(bits, order: int = 4) -> np.ndarray:
    """Map a flat 0/1 array to complex symbols, log2(order) bits per symbol."""
    const = qam_constellation(order)
    k = int(np.log2(order))
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} is not a multiple of {k}")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("bits must be 0 or 1")
    words = bits.reshape(-1, k)
    idx = words @ (1 << np.arange(k - 1, -1, -1))
    return const[idx]


def qam_demap(symbols, order: int = 4) -> np.ndarray:
    """Hard minimum-distance decision back to bits; inverse of qam_map."""
    const = qam_constellation(order)
    k = int(np.log2(order))
    symbols = np.asarray(symbols, dtype=complex).ravel()
    # argmin returns the first (lowest) index on exact ties
    idx = np.argmin(np.abs(symbols[:, None] - const[None, :]), axis=1)
    shifts = np.arange(k - 1, -1, -1)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return bits.reshape(-1).astype(np.int64)
