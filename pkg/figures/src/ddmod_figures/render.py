"""Render per-carrier energy, BER and NMSE figures from simulation CSVs.

Consumes the flat result schema

    experiment,scheme,snr_db,metric,carrier_index,value,trials,seed

and emits one PNG per experiment found in the input directory.  BER and NMSE
curves use a log y-axis with one line per scheme; energy profiles are plotted
against the carrier index.  Zero BER points cannot live on a log axis, so
they are clipped to the Monte-Carlo resolution floor 1/(trials*bits) and
drawn as open floor markers.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_COLUMNS = ["experiment", "scheme", "snr_db", "metric",
                    "carrier_index", "value", "trials", "seed"]

# companion verdict files (props/equiv) use this schema and are not plottable
VERDICT_COLUMNS = ["name", "pass", "deviation", "tolerance"]

# canonical legend order; unknown schemes follow alphabetically
SCHEME_ORDER = ["ofdm", "afdm", "oddm", "otsm", "zak_otfs"]
SCHEME_LABELS = {"ofdm": "OFDM", "afdm": "AFDM", "oddm": "ODDM",
                 "otsm": "OTSM", "zak_otfs": "Zak-OTFS"}
SCHEME_COLORS = {"ofdm": "tab:red", "afdm": "tab:blue", "oddm": "tab:green",
                 "otsm": "tab:purple", "zak_otfs": "tab:orange"}

DEFAULT_BITS_PER_FRAME = 416  # 2 bits/symbol on the 208-symbol reference frame


@dataclass(frozen=True)
class FigureSpec:
    kind: str          # energy | ber | nmse
    experiment: str
    input_csv: Path
    output_image: Path
    log_y: bool


class SchemaError(ValueError):
    """CSV does not match the result schema."""


def _is_verdict_file(path: Path) -> bool:
    with path.open("r", encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
    return header.split(",") == VERDICT_COLUMNS


def parse_result_csv(path) -> List[dict]:
    """Read and validate one result CSV; returns row dicts with typed fields."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file, expected header "
                              f"{','.join(EXPECTED_COLUMNS)}") from None
        for col in EXPECTED_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path.name}: missing column '{col}'")
        for col in header:
            if col not in EXPECTED_COLUMNS:
                raise SchemaError(f"{path.name}: unexpected column '{col}'")
        idx = {col: header.index(col) for col in EXPECTED_COLUMNS}
        rows = []
        for raw in reader:
            if not raw or all(not cell for cell in raw):
                continue
            rows.append({
                "experiment": raw[idx["experiment"]],
                "scheme": raw[idx["scheme"]],
                "snr_db": float(raw[idx["snr_db"]]),
                "metric": raw[idx["metric"]],
                "carrier_index": (int(raw[idx["carrier_index"]])
                                  if raw[idx["carrier_index"]] else None),
                "value": float(raw[idx["value"]]),
                "trials": int(raw[idx["trials"]]),
                "seed": int(raw[idx["seed"]]),
            })
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    return rows


def _kind_of(rows: List[dict], path: Path) -> str:
    metrics = {r["metric"] for r in rows}
    if metrics == {"ENERGY"}:
        return "energy"
    if metrics == {"BER"}:
        return "ber"
    if metrics == {"NMSE"}:
        return "nmse"
    raise SchemaError(f"{path.name}: mixed or unknown metrics {sorted(metrics)}")


def _scheme_order(schemes) -> List[str]:
    known = [s for s in SCHEME_ORDER if s in schemes]
    extra = sorted(s for s in schemes if s not in SCHEME_ORDER)
    return known + extra


def ber_floor(trials: int, bits_per_frame: int) -> float:
    """Smallest BER resolvable by the Monte-Carlo run."""
    return 1.0 / (trials * bits_per_frame)


def curve_points(rows: List[dict], scheme: str, bits_per_frame: int):
    """(snr, value, clipped) arrays for one scheme, zero values clipped to the
    resolution floor so they survive the log axis."""
    mine = sorted((r for r in rows if r["scheme"] == scheme),
                  key=lambda r: r["snr_db"])
    snr = [r["snr_db"] for r in mine]
    vals, clipped = [], []
    for r in mine:
        if r["value"] <= 0.0:
            vals.append(ber_floor(r["trials"], bits_per_frame))
            clipped.append(True)
        else:
            vals.append(r["value"])
            clipped.append(False)
    return snr, vals, clipped


def _render_energy(rows, out_path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for scheme in _scheme_order({r["scheme"] for r in rows}):
        mine = sorted((r for r in rows if r["scheme"] == scheme),
                      key=lambda r: r["carrier_index"])
        ax.plot([r["carrier_index"] for r in mine], [r["value"] for r in mine],
                label=SCHEME_LABELS.get(scheme, scheme),
                color=SCHEME_COLORS.get(scheme), linewidth=1.2)
    ax.set_xlabel("carrier index")
    ax.set_ylabel("received energy per carrier")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best")
    _save(fig, out_path)


def _render_curves(rows, out_path: Path, ylabel: str, bits_per_frame: int,
                   with_error_bars: bool) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for scheme in _scheme_order({r["scheme"] for r in rows}):
        snr, vals, clipped = curve_points(rows, scheme, bits_per_frame)
        color = SCHEME_COLORS.get(scheme)
        label = SCHEME_LABELS.get(scheme, scheme)
        if with_error_bars:
            trials = [r["trials"] for r in sorted(
                (r for r in rows if r["scheme"] == scheme), key=lambda r: r["snr_db"])]
            err = [math.sqrt(v * (1 - v) / (t * bits_per_frame))
                   for v, t in zip(vals, trials)]
            ax.errorbar(snr, vals, yerr=err, label=label, color=color,
                        marker="o", markersize=3.5, capsize=2, linewidth=1.2)
        else:
            ax.plot(snr, vals, label=label, color=color, marker="o",
                    markersize=3.5, linewidth=1.2)
        floor_pts = [(s, v) for s, v, c in zip(snr, vals, clipped) if c]
        if floor_pts:
            ax.plot([p[0] for p in floor_pts], [p[1] for p in floor_pts],
                    linestyle="none", marker="v", markerfacecolor="none",
                    color=color)
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(loc="best")
    _save(fig, out_path)


def _save(fig, out_path: Path) -> None:
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata={"Software": "ddmod-figures"})
    plt.close(fig)


def render_figures(csv_dir, out_dir,
                   bits_per_frame: int = DEFAULT_BITS_PER_FRAME) -> List[Path]:
    """Render one image per experiment found in csv_dir; returns image paths."""
    csv_dir = Path(csv_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(csv_dir.glob("*.csv"))
    if not paths:
        raise FileNotFoundError(f"no CSV files in {csv_dir}")
    by_experiment: Dict[str, List[dict]] = {}
    sources: Dict[str, Path] = {}
    for path in paths:
        if _is_verdict_file(path):
            continue
        for row in parse_result_csv(path):
            by_experiment.setdefault(row["experiment"], []).append(row)
            sources.setdefault(row["experiment"], path)
    if not by_experiment:
        raise FileNotFoundError(f"no result CSVs in {csv_dir}")
    images = []
    for experiment in sorted(by_experiment):
        rows = by_experiment[experiment]
        kind = _kind_of(rows, sources[experiment])
        out_path = out_dir / f"{experiment}.png"
        if kind == "energy":
            _render_energy(rows, out_path)
        elif kind == "ber":
            _render_curves(rows, out_path, "bit error rate", bits_per_frame,
                           with_error_bars=True)
        else:
            _render_curves(rows, out_path, "channel estimation NMSE",
                           bits_per_frame, with_error_bars=False)
        images.append(out_path)
    return images
