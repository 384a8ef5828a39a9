"""Command-line front end.

    ddmod energy  [--config F] [--seed S] [--out DIR]
    ddmod ber     [--csi perfect|estimated] [--config F] [--seed S] [--trials N] [--out DIR]
    ddmod nmse    [--config F] [--seed S] [--trials N] [--out DIR]
    ddmod props   [--config F] [--seed S] [--out DIR]
    ddmod equiv   [--config F] [--out DIR]
    ddmod export-basis --scheme NAME [--config F] --dest FILE

Each experiment writes one CSV (schema: experiment,scheme,snr_db,metric,
carrier_index,value,trials,seed) into --out.  Identical config and seed give
byte-identical output.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .bases import Scheme, generate_basis, save_basis
from .experiments import (default_config, load_config_file, run_ber,
                          run_energy_profile, run_nmse, run_property_suite,
                          write_result_csv)
from .properties import equivalence_report, verdicts_to_csv, verdicts_to_text

_SCHEME_ORDER = ["ofdm", "afdm", "oddm", "otsm", "zak_otfs"]


def _add_common(p: argparse.ArgumentParser, trials: bool = False) -> None:
    p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    if trials:
        p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials per SNR point")


def _load_config(args) -> "ExperimentConfig":
    cfg = load_config_file(args.config) if args.config else default_config()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if getattr(args, "trials", None) is not None:
        cfg = replace(cfg, trials=args.trials)
    return cfg


def _write(rows, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    write_result_csv(rows, path)
    print(f"wrote {path} ({len(rows)} rows)")
    return path


def _cmd_energy(args) -> int:
    cfg = _load_config(args)
    _write(run_energy_profile(cfg), args.out, "energy.csv")
    return 0


def _cmd_ber(args) -> int:
    cfg = replace(_load_config(args), csi_mode=args.csi)
    rows = run_ber(cfg)
    _write(rows, args.out, f"ber_{args.csi}.csv")
    return 0


def _cmd_nmse(args) -> int:
    cfg = replace(_load_config(args), csi_mode="estimated")
    _write(run_nmse(cfg), args.out, "nmse.csv")
    return 0


def _cmd_props(args) -> int:
    cfg = _load_config(args)
    verdicts = run_property_suite(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "props.csv"
    verdicts_to_csv(verdicts, path)
    print(f"wrote {path} ({len(verdicts)} verdicts)")

    # summary table: one line per scheme
    by_name = {v.name: v for v in verdicts}
    print(f"{'scheme':<10} {'non-selective':<14} {'predictable':<12}")
    for s in _SCHEME_ORDER:
        ns = by_name.get(f"{s}/non_selective")
        pr = by_name.get(f"{s}/predictable")
        if ns is None or pr is None:
            continue
        print(f"{s:<10} {'yes' if ns.passed else 'no':<14} {'yes' if pr.passed else 'no':<12}")
    print()
    print(verdicts_to_text(verdicts))
    return 0


def _cmd_equiv(args) -> int:
    cfg = _load_config(args)
    verdicts = equivalence_report(cfg.frame, cfg.afdm)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "equiv.csv"
    verdicts_to_csv(verdicts, path)
    print(f"wrote {path} ({len(verdicts)} verdicts)")
    for v in verdicts:
        print(f"  {v.name}: {'pass' if v.passed else 'FAIL'} (dev={v.deviation:.3g})")
    return 0


def _cmd_export_basis(args) -> int:
    cfg = _load_config(args)
    scheme = Scheme.parse(args.scheme)
    basis = generate_basis(scheme, cfg.frame, cfg.afdm)
    args.dest.parent.mkdir(parents=True, exist_ok=True)
    save_basis(basis, args.dest)
    print(f"wrote {args.dest} ({scheme.value}, MN={cfg.frame.mn})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddmod",
                                     description="doubly-selective channel modulation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="per-carrier received energy profile")
    _add_common(p)
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser("ber", help="Monte-Carlo bit error rate")
    _add_common(p, trials=True)
    p.add_argument("--csi", choices=["perfect", "estimated"], default="perfect")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("nmse", help="channel-estimation NMSE")
    _add_common(p, trials=True)
    p.set_defaults(func=_cmd_nmse)

    p = sub.add_parser("props", help="non-selectivity/predictability property suite")
    _add_common(p)
    p.set_defaults(func=_cmd_props)

    p = sub.add_parser("equiv", help="cross-scheme equivalence report")
    _add_common(p)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("export-basis", help="write a basis as a binary matrix file")
    _add_common(p)
    p.add_argument("--scheme", required=True)
    p.add_argument("--dest", type=Path, required=True)
    p.set_defaults(func=_cmd_export_basis)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
