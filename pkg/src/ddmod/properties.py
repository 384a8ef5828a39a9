"""Executable verdicts: non-selectivity, predictability, crystallization
predicates and the cross-scheme equivalence report.

Non-selectivity is a per-channel statement about the effective matrix H
(equal received energy on every carrier); predictability is a per-basis
statement (every carrier's self-ambiguity agrees on the crystallization
window, so one pilot predicts the response of all carriers).  Both reduce to
the same carrier-uniformity condition on the basis: the shifted correlation
sums

    S_i(k1, k2, dl) = sum_n phi_i[(n-k2)] conj(phi_i[(n-k1)]) e^{j2pi dl n/MN}

must not depend on the carrier index i for delays k1, k2 in Z_M and Doppler
offsets |dl| < N.  check_carrier_uniformity evaluates that condition
directly; the test suite verifies all three checks agree scheme by scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .frame import FrameConfig
from .bases import AfdmParams, Basis, Scheme, generate_basis, change_of_basis
from .channel import (SpreadingFunction, crystallization_mask,
                      signed_doppler_bins)
from .transceiver import EffectiveChannel

__all__ = [
    "PropertyVerdict",
    "per_carrier_energy",
    "check_non_selective",
    "check_carrier_uniformity",
    "check_predictable",
    "strong_crystallization_afdm",
    "weak_crystallization_support",
    "out_of_window_energy_fraction",
    "equivalence_report",
    "verdicts_to_csv",
]


@dataclass(frozen=True)
class PropertyVerdict:
    """One named check: passed iff deviation <= tolerance (unless the note
    states the inverted sense, used for checks that must observe a failure)."""

    name: str
    passed: bool
    deviation: float
    tolerance: float
    witness: Optional[tuple] = None
    note: str = ""


def per_carrier_energy(channel: EffectiveChannel) -> np.ndarray:
    """Received energy per carrier: entry i = (H^H H)[i, i]."""
    return np.sum(np.abs(channel.h) ** 2, axis=0)


def check_non_selective(channel: EffectiveChannel, tol: float) -> PropertyVerdict:
    """Equal received energy across carriers, measured as spread/mean."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    energy = per_carrier_energy(channel)
    i_max = int(np.argmax(energy))
    i_min = int(np.argmin(energy))
    deviation = float((energy[i_max] - energy[i_min]) / energy.mean())
    return PropertyVerdict(
        name=f"{channel.scheme.value}/non_selective",
        passed=deviation <= tol,
        deviation=deviation,
        tolerance=tol,
        witness=(i_max, i_min),
    )


def _lemma_doppler_offsets(cfg: FrameConfig) -> np.ndarray:
    n = cfg.n
    return np.arange(-(n - 1), n)


def check_carrier_uniformity(basis: Basis, tol: float) -> PropertyVerdict:
    """Carrier-independence of the shifted correlation sums (see module
    docstring); the common condition behind non-selectivity and
    predictability."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    cfg = basis.cfg
    mn = cfg.mn
    phi = basis.carriers
    offsets = _lemma_doppler_offsets(cfg) % mn
    worst = 0.0
    witness = None
    for k1 in range(cfg.m):
        shifted1 = np.roll(phi, k1, axis=0)
        for k2 in range(cfg.m):
            shifted2 = np.roll(phi, k2, axis=0)
            prod = shifted2 * np.conj(shifted1)  # rows n, columns i
            # sum_n prod[n, i] e^{j2pi dl n / MN} = fft(prod)[(-dl) mod MN, i]
            spec = np.fft.fft(prod, axis=0)
            rows = (-offsets) % mn
            sums = spec[rows, :]  # (n_offsets, MN carriers)
            dev = np.abs(sums - sums[:, :1])
            j = np.unravel_index(int(np.argmax(dev)), dev.shape)
            if dev[j] > worst:
                worst = float(dev[j])
                witness = (int(j[1]), k1, k2, int(_lemma_doppler_offsets(cfg)[j[0]]))
    return PropertyVerdict(
        name=f"{basis.scheme.value}/carrier_uniformity",
        passed=worst <= tol,
        deviation=worst,
        tolerance=tol,
        witness=witness,
    )


def _self_ambiguity_window(basis: Basis,
                           window: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Stacked windowed self-ambiguities, shape (n_k, n_l, MN carriers)."""
    cfg = basis.cfg
    mn = cfg.mn
    phi = basis.carriers
    k_range = np.asarray(window[0], dtype=int)
    l_range = np.asarray(window[1], dtype=int) % mn
    out = np.empty((len(k_range), len(l_range), mn), dtype=complex)
    for a, k in enumerate(k_range):
        prod = phi * np.conj(np.roll(phi, k, axis=0))
        spec = np.fft.fft(prod, axis=0)
        phase = np.exp(2j * np.pi * l_range * k / mn)
        out[a] = spec[l_range, :] * phase[:, None]
    return out


def check_predictable(basis: Basis,
                      window: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                      tol: float = 1e-9) -> PropertyVerdict:
    """All carriers share the same self-ambiguity on the crystallization
    window, so any single pilot carrier yields the same channel estimate."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    cfg = basis.cfg
    if window is None:
        window = (np.arange(cfg.m), signed_doppler_bins(cfg))
    k_range = np.asarray(window[0], dtype=int)
    l_range = np.asarray(window[1], dtype=int)
    dop = signed_doppler_bins(cfg)
    if k_range.min() < 0 or k_range.max() >= cfg.m:
        raise ValueError("delay window exceeds the crystallization region")
    if l_range.min() < dop.min() or l_range.max() > dop.max():
        raise ValueError("Doppler window exceeds the crystallization region")
    surf = _self_ambiguity_window(basis, (k_range, l_range))
    dev = np.abs(surf - surf[:, :, :1])
    j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[j])
    witness = (int(j[2]), int(k_range[j[0]]), int(l_range[j[1]]))
    return PropertyVerdict(
        name=f"{basis.scheme.value}/predictable",
        passed=worst <= tol,
        deviation=worst,
        tolerance=tol,
        witness=witness,
    )


def strong_crystallization_afdm(delta: int, m: int, n: int) -> bool:
    """gcd(2*delta, M*N) == N; the chirp-rate condition under which the AFDM
    correlation sums collapse to the diagonal."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    return math.gcd(2 * int(delta), m * n) == n


def weak_crystallization_support(h: SpreadingFunction,
                                 energy_tol: Optional[float] = None) -> bool:
    """Support confined to delay k in Z_M and the signed Doppler window.

    With energy_tol=None every tap above 1e-12 in magnitude must lie inside
    the region (exact channels); with a float tolerance the check passes when
    the out-of-window energy fraction stays below it (pulse-shaped fractional
    channels have infinite exact support).
    """
    mask = crystallization_mask(h.cfg)
    if energy_tol is None:
        outside = np.abs(h.taps[~mask])
        return bool(np.all(outside <= 1e-12))
    return out_of_window_energy_fraction(h) < energy_tol


def out_of_window_energy_fraction(h: SpreadingFunction) -> float:
    mask = crystallization_mask(h.cfg)
    total = float(np.sum(np.abs(h.taps) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(h.taps[~mask]) ** 2) / total)


_EQUIV_SCHEMES = (Scheme.AFDM, Scheme.ODDM, Scheme.OTSM, Scheme.ZAK_OTFS)


def equivalence_report(cfg: FrameConfig, afdm: AfdmParams) -> List[PropertyVerdict]:
    """Cross-scheme equivalence verdicts:

    a) ODDM and Zak-OTFS carriers are the same waveforms, column by column.
    b) The OTSM <-> Zak-OTFS change of basis is unitary and block-structured:
       zero whenever the delay residues of the two carrier indices differ.
    c) Every carrier of AFDM/ODDM/OTSM/Zak-OTFS has |self-ambiguity| equal to
       a delta at the origin of the crystallization window.
    d) OFDM fails (c): some carrier's window ambiguity is far from a delta.
    """
    if cfg.n & (cfg.n - 1):
        raise ValueError("equivalence report needs N a power of two (OTSM)")
    mn = cfg.mn
    verdicts: List[PropertyVerdict] = []

    bases = {s: generate_basis(s, cfg, afdm) for s in
             (Scheme.OFDM, Scheme.ODDM, Scheme.OTSM, Scheme.ZAK_OTFS)}
    afdm_ok = strong_crystallization_afdm(int(afdm.delta_num), cfg.m, cfg.n) \
        if float(afdm.delta_num).is_integer() else False
    if afdm_ok:
        bases[Scheme.AFDM] = generate_basis(Scheme.AFDM, cfg, afdm)

    # (a) ODDM == Zak-OTFS
    dev = float(np.max(np.abs(bases[Scheme.ODDM].carriers
                              - bases[Scheme.ZAK_OTFS].carriers)))
    verdicts.append(PropertyVerdict("oddm_equals_zak", dev <= 1e-12, dev, 1e-12))

    # (b) OTSM <-> Zak map: unitary, zero off the delay-residue blocks
    u = change_of_basis(bases[Scheme.OTSM], bases[Scheme.ZAK_OTFS])
    unitary_dev = float(np.max(np.abs(u.conj().T @ u - np.eye(mn))))
    idx = np.arange(mn)
    off_block = (idx[:, None] % cfg.m) != (idx[None, :] % cfg.m)
    block_dev = float(np.max(np.abs(u[off_block]))) if off_block.any() else 0.0
    verdicts.append(PropertyVerdict("otsm_zak_map_unitary",
                                    unitary_dev <= 1e-10, unitary_dev, 1e-10))
    verdicts.append(PropertyVerdict("otsm_zak_map_residue_blocks",
                                    block_dev <= 1e-12, block_dev, 1e-12))

    # (c) window self-ambiguity is a delta for the four equivalent schemes
    window = (np.arange(cfg.m), signed_doppler_bins(cfg))
    origin = (0, int(np.nonzero(window[1] == 0)[0][0]))
    for scheme in _EQUIV_SCHEMES:
        name = f"{scheme.value}_window_ambiguity_delta"
        if scheme is Scheme.AFDM and not afdm_ok:
            verdicts.append(PropertyVerdict(
                name, False, float("nan"), 1e-10,
                note=f"not applicable: gcd(2*{afdm.delta_num}, {mn}) != {cfg.n}"))
            continue
        surf = np.abs(_self_ambiguity_window(bases[scheme], window))
        target = np.zeros_like(surf)
        target[origin[0], origin[1], :] = 1.0
        dev = float(np.max(np.abs(surf - target)))
        verdicts.append(PropertyVerdict(name, dev <= 1e-10, dev, 1e-10))

    # (d) OFDM must fail the delta property
    surf = np.abs(_self_ambiguity_window(bases[Scheme.OFDM], window))
    target = np.zeros_like(surf)
    target[origin[0], origin[1], :] = 1.0
    dev = float(np.max(np.abs(surf - target)))
    verdicts.append(PropertyVerdict(
        "ofdm_fails_window_ambiguity_delta", dev > 1e-3, dev, 1e-3,
        note="passes when the deviation exceeds the tolerance"))
    return verdicts


def verdicts_to_csv(verdicts: Sequence[PropertyVerdict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("name,pass,deviation,tolerance\n")
        for v in verdicts:
            fh.write(f"{v.name},{str(v.passed).lower()},{v.deviation:.12g},{v.tolerance:.12g}\n")


def verdicts_to_text(verdicts: Sequence[PropertyVerdict]) -> str:
    width = max(len(v.name) for v in verdicts) if verdicts else 4
    lines = []
    for v in verdicts:
        status = "pass" if v.passed else "FAIL"
        note = f"  ({v.note})" if v.note else ""
        lines.append(f"{v.name:<{width}}  {status}  deviation={v.deviation:.3g} "
                     f"tolerance={v.tolerance:.3g}{note}")
    return "\n".join(lines)
