"""Doubly-selective channel synthesis and application.

Two channel representations are used throughout:

* ``SpreadingFunction`` -- the exact cyclic model.  A tap grid h[k, l] on the
  MN x MN delay-Doppler torus acts on a waveform as

      y[n] = sum_{k,l} h[k,l] * x[(n-k) mod MN] * exp(j*2pi*l*(n-k)/MN)

* ``PhysicalChannel`` -- a list of propagation paths with complex gain,
  fractional delay (seconds) and fractional Doppler (Hz).  A physical channel
  is reduced to the cyclic model by sampling each path through the
  Gaussian-sinc pulse along BOTH the delay and the Doppler axis:

      h[k, l] = sum_i g_i * q(k - B*tau_i) * q(l - T*nu_i)
                        * exp(j*2pi*nu_i*(k/B - tau_i))

  with q(v) = sinc(v)*exp(-alpha*v^2) periodized onto the torus.  Sampling
  the pulse on both axes keeps the discretized taps confined to the
  crystallization region (delays < M taps, |Doppler| < N/2 bins) up to the
  pulse tails; a delay-only pulse would leave percent-level Doppler sidelobe
  energy at every integer bin offset and destroy the flat per-carrier energy
  of the delay-Doppler schemes.  For paths on integer grid points the
  sinc zeros make the reduction exact, so the physical and discrete models
  coincide there for every alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .frame import FrameConfig, SeededRng, _as_generator

__all__ = [
    "SpreadingFunction",
    "PhysicalChannel",
    "Pulse",
    "VEHA_DELAYS_S",
    "VEHA_POWERS_DB",
    "gaussian_sinc_pulse",
    "apply_discrete_channel",
    "operator_matrix",
    "spreading_from_operator",
    "discretize_physical_channel",
    "apply_physical_channel",
    "sample_veh_a",
    "sample_on_grid_channel",
    "dense_on_grid_channel",
    "add_noise",
    "signed_doppler_bins",
    "crystallization_mask",
    "physical_channel_to_csv",
]


def signed_doppler_bins(cfg: FrameConfig) -> np.ndarray:
    """Signed Doppler window {-floor(N/2) .. ceil(N/2)-1}."""
    n = cfg.n
    return np.arange(-(n // 2), (n + 1) // 2)


def crystallization_mask(cfg: FrameConfig) -> np.ndarray:
    """Boolean (MN, MN) mask of the weak-crystallization region:
    delay k in {0..M-1}, Doppler l congruent to the signed window mod MN."""
    mn = cfg.mn
    k = np.arange(mn)[:, None]
    l_signed = ((np.arange(mn) + mn // 2) % mn) - mn // 2
    in_l = (l_signed >= -(cfg.n // 2)) & (l_signed <= (cfg.n + 1) // 2 - 1)
    return (k < cfg.m) & in_l[None, :]


@dataclass
class SpreadingFunction:
    """Sampled channel taps h[k, l] on the MN x MN torus (dense storage)."""

    cfg: FrameConfig
    taps: np.ndarray  # (MN, MN) complex

    @classmethod
    def from_taps(cls, cfg: FrameConfig,
                  taps: Iterable[Tuple[int, int, complex]]) -> "SpreadingFunction":
        """Build from (k, l, gain) triples; indices are reduced mod MN."""
        grid = np.zeros((cfg.mn, cfg.mn), dtype=complex)
        for k, l, g in taps:
            grid[int(k) % cfg.mn, int(l) % cfg.mn] += g
        return cls(cfg, grid)

    def support(self, threshold: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
        """Indices (k, l) of taps with magnitude above the threshold."""
        return np.nonzero(np.abs(self.taps) > threshold)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True)
class PhysicalChannel:
    """P propagation paths; gains are normalized so sum |g_i|^2 = 1."""

    gains: np.ndarray        # complex, shape (P,)
    delays_s: np.ndarray     # seconds, >= 0
    dopplers_hz: np.ndarray  # signed Hz

    @property
    def path_count(self) -> int:
        return len(self.gains)

    def paths(self):
        return zip(self.gains, self.delays_s, self.dopplers_hz)


@dataclass(frozen=True)
class Pulse:
    """Gaussian-sinc shaping profile p(t) = sinc(B*t) * exp(-alpha*(B*t)^2)."""

    alpha: float
    bandwidth: float

    def kernel(self, v) -> np.ndarray:
        """Dimensionless profile q(v) = sinc(v)*exp(-alpha*v^2), v in samples."""
        v = np.asarray(v, dtype=float)
        return np.sinc(v) * np.exp(-self.alpha * v * v)

    def __call__(self, t) -> np.ndarray:
        return self.kernel(self.bandwidth * np.asarray(t, dtype=float))


def gaussian_sinc_pulse(cfg: FrameConfig, alpha: float) -> Pulse:
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return Pulse(alpha=float(alpha), bandwidth=cfg.bandwidth)


# 3GPP Vehicular-A power-delay profile
VEHA_DELAYS_S = np.array([0.0, 0.31, 0.71, 1.09, 1.73, 2.51]) * 1e-6
VEHA_POWERS_DB = np.array([0.0, -1.0, -9.0, -10.0, -15.0, -20.0])


def sample_veh_a(cfg: FrameConfig, vmax_hz: float, rng) -> PhysicalChannel:
    """Draw a Vehicular-A realization.

    Delays and relative powers are the fixed profile above (powers normalized
    to unit total); per-path Doppler is vmax*cos(theta) with theta uniform on
    [-pi, pi), and per-path gain phases are uniform on [0, 2pi).
    """
    if vmax_hz < 0:
        raise ValueError("vmax_hz must be >= 0")
    gen = _as_generator(rng)
    powers = 10.0 ** (VEHA_POWERS_DB / 10.0)
    powers = powers / powers.sum()
    theta = gen.uniform(-np.pi, np.pi, size=len(powers))
    phases = gen.uniform(0.0, 2.0 * np.pi, size=len(powers))
    gains = np.sqrt(powers) * np.exp(1j * phases)
    dopplers = vmax_hz * np.cos(theta)
    return PhysicalChannel(gains=gains, delays_s=VEHA_DELAYS_S.copy(),
                           dopplers_hz=dopplers)


def sample_on_grid_channel(cfg: FrameConfig, rng, n_taps: int = 4) -> SpreadingFunction:
    """Random weak-crystallized channel with taps on integer grid points.

    Delays are drawn without replacement from Z_M (so at least two distinct
    delays whenever n_taps >= 2), Dopplers uniformly from the signed window,
    gains complex Gaussian normalized to unit total power.
    """
    if not 1 <= n_taps <= cfg.m:
        raise ValueError(f"n_taps must be in 1..{cfg.m}")
    gen = _as_generator(rng)
    ks = gen.choice(cfg.m, size=n_taps, replace=False)
    ls = gen.choice(signed_doppler_bins(cfg), size=n_taps, replace=True)
    g = gen.standard_normal(n_taps) + 1j * gen.standard_normal(n_taps)
    g = g / np.linalg.norm(g)
    return SpreadingFunction.from_taps(cfg, zip(ks, ls, g))


def dense_on_grid_channel(cfg: FrameConfig, rng) -> SpreadingFunction:
    """Channel with a random gain on EVERY grid point of the crystallization
    region.  Used as a probe: it exhibits every delay/Doppler tap-pair
    combination, so a selective basis cannot pass by accident."""
    gen = _as_generator(rng)
    grid = np.zeros((cfg.mn, cfg.mn), dtype=complex)
    ls = signed_doppler_bins(cfg) % cfg.mn
    g = gen.standard_normal((cfg.m, cfg.n)) + 1j * gen.standard_normal((cfg.m, cfg.n))
    g = g / np.linalg.norm(g)
    for ki in range(cfg.m):
        grid[ki, ls] = g[ki]
    return SpreadingFunction(cfg, grid)


def apply_discrete_channel(h: SpreadingFunction, x: np.ndarray) -> np.ndarray:
    """Noiseless cyclic channel output; linear in both h and x."""
    mn = h.cfg.mn
    x = np.asarray(x, dtype=complex)
    if x.shape != (mn,):
        raise ValueError(f"waveform length {x.shape} does not match MN={mn}")
    y = np.zeros(mn, dtype=complex)
    n = np.arange(mn)
    ks, ls = h.support(threshold=0.0)
    for k, l in zip(ks, ls):
        shifted = np.roll(x, k)
        y += h.taps[k, l] * shifted * np.exp(2j * np.pi * l * (n - k) / mn)
    return y


def operator_matrix(h: SpreadingFunction) -> np.ndarray:
    """Dense MN x MN matrix C with C @ x == apply_discrete_channel(h, x).

    C[n, (n-k) mod MN] = sum_l h[k, l] exp(j*2pi*l*(n-k)/MN); the inner sum
    over l is an inverse DFT of the k-th tap row, so the matrix assembles
    one cyclic diagonal per delay with nonzero taps.
    """
    mn = h.cfg.mn
    D = mn * np.fft.ifft(h.taps, axis=1)
    C = np.zeros((mn, mn), dtype=complex)
    n = np.arange(mn)
    rows = np.nonzero(np.any(h.taps != 0, axis=1))[0]
    for k in rows:
        idx = (n - k) % mn
        C[n, idx] += D[k, idx]
    return C


def spreading_from_operator(C: np.ndarray, cfg: FrameConfig) -> SpreadingFunction:
    """Exact delay-Doppler expansion of an arbitrary linear operator.

    Inverts operator_matrix: h[k, l] = (1/MN) sum_n C[n, (n-k)] e^{-j2pi l(n-k)/MN}.
    Every MN x MN matrix has exactly one such expansion.
    """
    mn = cfg.mn
    if C.shape != (mn, mn):
        raise ValueError(f"operator shape {C.shape} does not match MN={mn}")
    n = np.arange(mn)
    taps = np.empty((mn, mn), dtype=complex)
    for k in range(mn):
        diag = C[n, (n - k) % mn]
        spec = np.fft.fft(diag)  # sum_n diag[n] e^{-j2pi l n/MN}
        l = np.arange(mn)
        taps[k, :] = spec * np.exp(2j * np.pi * l * k / mn) / mn
    return SpreadingFunction(cfg, taps)


def _dirichlet(v: np.ndarray, period: int) -> np.ndarray:
    """Periodized sinc: sum_r sinc(v + r*period), exact closed form."""
    v = np.asarray(v, dtype=float)
    vm = v - period * np.round(v / period)
    tiny = np.abs(vm) < 1e-9
    vm_safe = np.where(tiny, 1.0, vm)
    if period % 2 == 0:
        out = np.sin(np.pi * vm_safe) / (period * np.tan(np.pi * vm_safe / period))
    else:
        out = np.sin(np.pi * vm_safe) / (period * np.sin(np.pi * vm_safe / period))
    return np.where(tiny, 1.0, out)


_FOLDS = 4  # periodization folds for alpha > 0; gaussian tails make more pointless


def _periodic_kernel(v: np.ndarray, pulse: Pulse, period: int) -> np.ndarray:
    if pulse.alpha == 0.0:
        return _dirichlet(v, period)
    out = np.zeros_like(np.asarray(v, dtype=float))
    for r in range(-_FOLDS, _FOLDS + 1):
        out += pulse.kernel(v + r * period)
    return out


def _tap_offsets(center: float, radius: int, mn: int) -> np.ndarray:
    c = int(round(center))
    if 2 * radius + 1 >= mn:
        return c - mn // 2 + np.arange(mn)  # one representative per residue
    return c + np.arange(-radius, radius + 1)


def _truncation_radius(alpha: float, mn: int) -> int:
    if alpha == 0.0:
        return mn  # Dirichlet kernel has no useful decay; cover the torus
    return min(mn, int(math.ceil(math.sqrt(math.log(1e16) / alpha))) + 2)


def discretize_physical_channel(phys: PhysicalChannel, pulse: Pulse,
                                cfg: FrameConfig) -> SpreadingFunction:
    """Sample the physical paths through the pulse onto the cyclic tap grid."""
    mn = cfg.mn
    b = cfg.bandwidth
    t_frame = cfg.duration
    radius = _truncation_radius(pulse.alpha, mn)
    grid = np.zeros((mn, mn), dtype=complex)
    for g, tau, nu in phys.paths():
        u = b * tau           # delay in taps
        beta = t_frame * nu   # Doppler in bins
        ks = _tap_offsets(u, radius, mn)
        ls = _tap_offsets(beta, radius, mn)
        kd = _periodic_kernel(ks - u, pulse, mn)
        ld = _periodic_kernel(ls - beta, pulse, mn)
        phase = np.exp(2j * np.pi * nu * (ks / b - tau))
        tap = g * (kd * phase)[:, None] * ld[None, :]
        rows = np.broadcast_to((ks % mn)[:, None], tap.shape)
        cols = np.broadcast_to((ls % mn)[None, :], tap.shape)
        np.add.at(grid, (rows, cols), tap)
    return SpreadingFunction(cfg, grid)


def apply_physical_channel(phys: PhysicalChannel, pulse: Pulse, x: np.ndarray,
                           cfg: FrameConfig) -> np.ndarray:
    """Noiseless output of the pulse-discretized physical channel."""
    return apply_discrete_channel(discretize_physical_channel(phys, pulse, cfg), x)


def add_noise(y: np.ndarray, snr_db: float, rng) -> Tuple[np.ndarray, float]:
    """Add circularly-symmetric complex Gaussian noise.

    The SNR is defined per received sample with unit mean transmit sample
    energy (unit-energy constellation through an orthonormal basis) and a
    unit-power channel, so sigma^2 = 10^(-snr_db/10).  Returns the noisy
    waveform together with sigma^2 for the detector.
    """
    y = np.asarray(y, dtype=complex)
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy(), 0.0
    sigma2 = 10.0 ** (-snr_db / 10.0)
    gen = _as_generator(rng)
    noise = gen.standard_normal(len(y)) + 1j * gen.standard_normal(len(y))
    return y + np.sqrt(sigma2 / 2.0) * noise, sigma2


def physical_channel_to_csv(phys: PhysicalChannel, path) -> None:
    """Export a realization as CSV rows (gain_re, gain_im, delay_s, doppler_hz)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("gain_re,gain_im,delay_s,doppler_hz\n")
        for g, tau, nu in phys.paths():
            fh.write(f"{g.real:.17g},{g.imag:.17g},{tau:.17g},{nu:.17g}\n")
