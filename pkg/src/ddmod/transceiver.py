"""Modulation, projection, effective channels, ambiguity surfaces,
pilot-based estimation and MMSE detection.

The effective channel of a linear channel operator A under a basis Phi is
H[f, i] = <phi_f, A(phi_i)> so that the projections r = project(y) of the
received waveform satisfy r = H s + v for transmitted symbols s.

The cross-ambiguity of two waveforms is

    A_{y,x}[k, l] = sum_n y[n] * conj(x[(n-k) mod MN]) * exp(-j*2pi*l*(n-k)/MN)

and the channel estimate from a known pilot waveform x is the cross-ambiguity
of the received pilot against x, windowed to the crystallization region.  For
a noiseless cyclic channel the estimate equals the twisted convolution of the
true taps with the pilot's self-ambiguity, which is the identity this module's
tests pin down.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .frame import FrameConfig
from .bases import Basis, Scheme
from .channel import SpreadingFunction, signed_doppler_bins

__all__ = [
    "EffectiveChannel",
    "AmbiguitySurface",
    "modulate",
    "project",
    "build_effective_h",
    "cross_ambiguity",
    "twisted_convolve",
    "default_pilot_index",
    "default_estimation_window",
    "estimate_pilot_channel",
    "mmse_detect",
]


@dataclass(frozen=True)
class EffectiveChannel:
    h: np.ndarray  # (MN, MN) symbol-domain channel matrix
    scheme: Scheme
    cfg: FrameConfig


@dataclass(frozen=True)
class AmbiguitySurface:
    cfg: FrameConfig
    values: np.ndarray  # (MN, MN), delay index k by Doppler index l

    def support_view(self, k_range, l_range) -> np.ndarray:
        """Windowed read access; l indices are interpreted mod MN so the
        signed Doppler window wraps naturally."""
        mn = self.cfg.mn
        ks = np.asarray(k_range, dtype=int) % mn
        ls = np.asarray(l_range, dtype=int) % mn
        return self.values[np.ix_(ks, ls)]


def modulate(basis: Basis, symbols: np.ndarray) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (basis.cfg.mn,):
        raise ValueError(f"symbol vector shape {symbols.shape} does not match MN={basis.cfg.mn}")
    return basis.carriers @ symbols


def project(basis: Basis, waveform: np.ndarray) -> np.ndarray:
    waveform = np.asarray(waveform, dtype=complex)
    if waveform.shape != (basis.cfg.mn,):
        raise ValueError(f"waveform shape {waveform.shape} does not match MN={basis.cfg.mn}")
    return basis.carriers.conj().T @ waveform


def build_effective_h(basis: Basis,
                      channel_apply: Callable[[np.ndarray], np.ndarray]) -> EffectiveChannel:
    """Column i of H is the projection of the channel response to carrier i."""
    mn = basis.cfg.mn
    responses = np.empty((mn, mn), dtype=complex)
    for i in range(mn):
        responses[:, i] = channel_apply(basis.carriers[:, i])
    return EffectiveChannel(h=basis.carriers.conj().T @ responses,
                            scheme=basis.scheme, cfg=basis.cfg)


def cross_ambiguity(y: np.ndarray, x: np.ndarray,
                    cfg: Optional[FrameConfig] = None) -> AmbiguitySurface:
    """Full-torus cross-ambiguity surface of y against reference x."""
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if y.shape != x.shape:
        raise ValueError("waveform lengths differ")
    mn = len(y)
    if cfg is None:
        cfg = FrameConfig(mn, 1, 1.0)
    values = np.empty((mn, mn), dtype=complex)
    l = np.arange(mn)
    for k in range(mn):
        # sum_n y[n] conj(x[n-k]) e^{-j2pi l n/MN} * e^{j2pi l k/MN}
        z = y * np.conj(np.roll(x, k))
        values[k, :] = np.fft.fft(z) * np.exp(2j * np.pi * l * k / mn)
    return AmbiguitySurface(cfg=cfg, values=values)


def twisted_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Discrete twisted convolution on the torus:

        out[k, l] = sum_{k', l'} a[k-k', l-l'] b[k', l'] e^{j*2pi*k'*(l-l')/MN}

    Iterates over the nonzero entries of a (cheap for sparse a, which is the
    intended use: channel taps twisted with a dense ambiguity surface).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("grids must be square and of equal shape")
    mn = a.shape[0]
    out = np.zeros_like(b)
    k = np.arange(mn)
    ka_all, la_all = np.nonzero(a)
    for ka, la in zip(ka_all, la_all):
        # substituting k' = k - ka, l' = l - la: phase e^{j2pi (k-ka) la / MN}
        shifted = np.roll(b, shift=(int(ka), int(la)), axis=(0, 1))
        phase = np.exp(2j * np.pi * (k - ka) * la / mn)
        out += a[ka, la] * shifted * phase[:, None]
    return out


def default_pilot_index(cfg: FrameConfig) -> int:
    """Center of the delay-Doppler grid: i = M*floor(N/2) + floor(M/2)."""
    return cfg.m * (cfg.n // 2) + cfg.m // 2


def default_estimation_window(cfg: FrameConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Full crystallization region: k in 0..M-1, signed Doppler bins."""
    return np.arange(cfg.m), signed_doppler_bins(cfg)


def estimate_pilot_channel(basis: Basis, pilot_index: int, y_pilot: np.ndarray,
                           window: Optional[Tuple[np.ndarray, np.ndarray]] = None
                           ) -> SpreadingFunction:
    """Cross-ambiguity channel estimate from a single pilot carrier.

    The estimate is A_{y, phi_pilot}[k, l] on the window and zero outside;
    feeding it back through the effective-channel construction yields the
    estimated symbol-domain matrix.
    """
    cfg = basis.cfg
    mn = cfg.mn
    if not 0 <= pilot_index < mn:
        raise ValueError(f"pilot index {pilot_index} outside 0..{mn - 1}")
    if window is None:
        window = default_estimation_window(cfg)
    k_range = np.asarray(window[0], dtype=int)
    l_range = np.asarray(window[1], dtype=int)
    dop = signed_doppler_bins(cfg)
    if k_range.min() < 0 or k_range.max() >= cfg.m:
        raise ValueError("delay window exceeds the crystallization region 0..M-1")
    if l_range.min() < dop.min() or l_range.max() > dop.max():
        raise ValueError("Doppler window exceeds the crystallization region")
    y_pilot = np.asarray(y_pilot, dtype=complex)
    if y_pilot.shape != (mn,):
        raise ValueError("pilot waveform length mismatch")
    pilot = basis.carriers[:, pilot_index]
    taps = np.zeros((mn, mn), dtype=complex)
    for k in k_range:
        z = y_pilot * np.conj(np.roll(pilot, k))
        spec = np.fft.fft(z)
        ls = l_range % mn
        taps[k, ls] = spec[ls] * np.exp(2j * np.pi * ls * k / mn)
    return SpreadingFunction(cfg, taps)


def mmse_detect(channel: EffectiveChannel, received: np.ndarray,
                noise_var: float) -> np.ndarray:
    """Joint linear MMSE symbol estimate s_hat = H^H (H H^H + noise_var I)^-1 r."""
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    h = channel.h
    r = np.asarray(received, dtype=complex)
    gram = h @ h.conj().T
    gram[np.diag_indices_from(gram)] += noise_var
    u = np.linalg.solve(gram, r)
    return h.conj().T @ u
