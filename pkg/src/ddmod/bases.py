"""Orthonormal carrier families for the five modulation schemes.

Every basis is an MN x MN complex matrix whose column i is the carrier
waveform phi_i[n], n in Z_MN.  The carrier index convention is
i = M * (Doppler index) + (delay index) throughout, i.e. floor(i/M) is the
Doppler/symbol index and i mod M the delay/subcarrier index.

Scheme definitions (n, i in Z_MN):

  OFDM      phi_i[n] = exp(j2pi*i*n/M)/sqrt(M) on the chunk floor(n/M) == floor(i/M)
  AFDM      phi_i[n] = exp(j2pi*(c1*n^2 + c2*i^2 + n*i/MN))/sqrt(MN), c1 = delta/MN
  ODDM      phi_i[n] = exp(j2pi*floor(i/M)*floor(n/M)/N)/sqrt(N) on n = i (mod M)
  OTSM      phi_i[n] = (-1)^<floor(i/M), floor(n/M)>/sqrt(N) on n = i (mod M),
            <,> the bitwise dot product (requires N a power of two)
  Zak-OTFS  pulse train at n = (i mod M) + d*M, d in Z_N, modulated by the
            tone exp(j2pi*d*floor(i/M)/N), amplitude 1/sqrt(N)

ODDM and the Zak-OTFS pulsone are the same waveform written two ways; they
are generated through independent code paths so the equality is a real
cross-check rather than a tautology.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frame import FrameConfig

__all__ = [
    "Scheme",
    "AfdmParams",
    "Basis",
    "generate_basis",
    "gram_matrix",
    "change_of_basis",
    "save_basis",
    "load_basis",
    "BASIS_FILE_MAGIC",
]


class Scheme(enum.Enum):
    OFDM = "ofdm"
    AFDM = "afdm"
    ODDM = "oddm"
    OTSM = "otsm"
    ZAK_OTFS = "zak_otfs"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = name.strip().lower().replace("-", "_")
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown scheme {name!r}; expected one of "
                         f"{[s.value for s in cls]}")


@dataclass(frozen=True)
class AfdmParams:
    """Chirp parameters: c1 = delta_num / MN, c2 a free real phase term.

    delta_num is an integer for every configuration the crystallization
    analysis covers; half-integer values (c1 = 1/(2MN)) stay representable
    but are outside the integer-delta sweep.
    """

    delta_num: float = 8
    c2: float = 0.0


@dataclass(frozen=True)
class Basis:
    scheme: Scheme
    cfg: FrameConfig
    carriers: np.ndarray  # (MN, MN), column i = phi_i


def _ofdm(cfg: FrameConfig) -> np.ndarray:
    m, mn = cfg.m, cfg.mn
    n = np.arange(mn)
    i = np.arange(mn)
    # argument reduced mod M before the complex exponential for precision
    phase = 2.0 * np.pi * ((np.outer(n, i) % m) / m)
    chunk = (n[:, None] // m) == (i[None, :] // m)
    return np.exp(1j * phase) * chunk / np.sqrt(m)


def _afdm(cfg: FrameConfig, params: AfdmParams) -> np.ndarray:
    mn = cfg.mn
    n = np.arange(mn, dtype=np.int64)
    i = np.arange(mn, dtype=np.int64)
    if float(params.delta_num).is_integer():
        delta = int(params.delta_num)
        quad = (delta * n * n) % mn  # exact integer reduction
        quad_frac = quad / mn
    else:
        quad_frac = np.mod(params.delta_num * (n * n) / mn, 1.0)
    cross_frac = (np.outer(n, i) % mn) / mn
    i_frac = np.mod(params.c2 * (i * i).astype(float), 1.0)
    phase = 2.0 * np.pi * (quad_frac[:, None] + i_frac[None, :] + cross_frac)
    return np.exp(1j * phase) / np.sqrt(mn)


def _oddm(cfg: FrameConfig) -> np.ndarray:
    m, n_dopp, mn = cfg.m, cfg.n, cfg.mn
    n = np.arange(mn)
    i = np.arange(mn)
    tone = 2.0 * np.pi * ((np.outer(n // m, i // m) % n_dopp) / n_dopp)
    support = (n[:, None] % m) == (i[None, :] % m)
    return np.exp(1j * tone) * support / np.sqrt(n_dopp)


def _otsm(cfg: FrameConfig) -> np.ndarray:
    m, n_dopp, mn = cfg.m, cfg.n, cfg.mn
    if n_dopp & (n_dopp - 1):
        raise ValueError(f"OTSM needs N a power of two, got N={n_dopp}")
    n = np.arange(mn)
    i = np.arange(mn)
    dots = np.bitwise_count(np.bitwise_and.outer(n // m, i // m)) & 1
    signs = 1.0 - 2.0 * dots
    support = (n[:, None] % m) == (i[None, :] % m)
    return (signs * support / np.sqrt(n_dopp)).astype(complex)


def _zak_otfs(cfg: FrameConfig) -> np.ndarray:
    m, n_dopp, mn = cfg.m, cfg.n, cfg.mn
    phi = np.zeros((mn, mn), dtype=complex)
    d = np.arange(n_dopp)
    for i in range(mn):
        train = (i % m) + d * m
        tone = np.exp(2j * np.pi * ((d * (i // m)) % n_dopp) / n_dopp)
        phi[train, i] = tone / np.sqrt(n_dopp)
    return phi


def generate_basis(scheme: Scheme, cfg: FrameConfig,
                   afdm: Optional[AfdmParams] = None) -> Basis:
    """Build the orthonormal carrier family for one scheme."""
    if scheme is Scheme.OFDM:
        carriers = _ofdm(cfg)
    elif scheme is Scheme.AFDM:
        if afdm is None:
            raise ValueError("AFDM requires AfdmParams")
        carriers = _afdm(cfg, afdm)
    elif scheme is Scheme.ODDM:
        carriers = _oddm(cfg)
    elif scheme is Scheme.OTSM:
        carriers = _otsm(cfg)
    elif scheme is Scheme.ZAK_OTFS:
        carriers = _zak_otfs(cfg)
    else:  # pragma: no cover
        raise ValueError(f"unhandled scheme {scheme}")
    carriers.setflags(write=False)
    return Basis(scheme, cfg, carriers)


def gram_matrix(basis: Basis) -> np.ndarray:
    """Entry (i, j) = sum_n conj(phi_i[n]) * phi_j[n]; identity when orthonormal."""
    return basis.carriers.conj().T @ basis.carriers


def change_of_basis(a: Basis, b: Basis) -> np.ndarray:
    """U[i, j] = <phi_j^(b), phi_i^(a)>, unitary whenever both bases are."""
    if a.cfg != b.cfg:
        raise ValueError("change_of_basis needs matching frame configs")
    return (b.carriers.conj().T @ a.carriers).T


BASIS_FILE_MAGIC = b"DDMB"
_HEADER = struct.Struct("<4sI8x")  # magic, u32 MN, 8 pad bytes -> 16 bytes


def save_basis(basis: Basis, path) -> None:
    """Binary export: 16-byte header (magic 'DDMB', u32 MN), then the carrier
    matrix row-major as little-endian complex64 pairs."""
    mn = basis.cfg.mn
    data = np.ascontiguousarray(basis.carriers, dtype=np.complex64)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(BASIS_FILE_MAGIC, mn))
        fh.write(data.astype("<c8").tobytes())


def load_basis(path) -> np.ndarray:
    """Read a matrix written by save_basis; returns the (MN, MN) complex array."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated basis file header")
        magic, mn = _HEADER.unpack(header)
        if magic != BASIS_FILE_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {BASIS_FILE_MAGIC!r}")
        raw = fh.read()
    expected = mn * mn * 8
    if len(raw) != expected:
        raise ValueError(f"basis payload has {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw, dtype="<c8").reshape(mn, mn).astype(complex)
