"""Command-line front end: pair-state, scan, simulate, tomography, ent-distance.

Every subcommand that writes files also writes a manifest naming the tool
version, the resolved parameters, and the produced outputs; each output
references that manifest.  Exit codes: 0 success, 2 invalid input, 1
runtime failure.
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import __version__
from .entanglement import entanglement_distance, entanglement_report
from .experiment import simulate_run
from .fermi_gas import DetectorProfile, PairQuery, kernel, pair_state
from .serialize import (
    build_manifest,
    counts_record_to_dict,
    load_config,
    load_counts,
    matrix_to_pairs,
    tomography_result_to_dict,
    write_counts_csv,
    write_events_csv,
    write_json,
)
from .spin_algebra import decompose, fidelity, maximally_mixed, singlet_state, trace_distance
from .tomography import end_to_end

SCAN_COLUMNS = ["x", "sigma", "g", "negativity", "concurrence", "chsh", "x_star"]


def _positive_kf(value):
    kf = float(value)
    if not math.isfinite(kf) or kf <= 0:
        raise argparse.ArgumentTypeError(f"k_f must be positive, got {value!r}")
    return kf


def _sigma_list(value):
    try:
        sigmas = [float(tok) for tok in value.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sigma list {value!r}")
    if not sigmas:
        raise argparse.ArgumentTypeError("sigma list is empty")
    return sigmas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermipairs",
        description="Spin-entangled fermion pairs from a degenerate Fermi gas: "
                    "pair states, entanglement measures, coincidence simulation, "
                    "and tomography.",
    )
    parser.add_argument("--version", action="version", version=f"fermipairs {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("pair-state", help="two-qubit state of a detected pair")
    p.add_argument("--x", type=float, required=True,
                   help="detector separation in units of 1/k_f")
    p.add_argument("--sigma", type=float, default=0.0,
                   help="Gaussian detector width in units of 1/k_f (0 = point-like)")
    p.add_argument("--kf", type=_positive_kf, default=None,
                   help="Fermi wavenumber in 1/m; adds separation in meters to the report")
    p.add_argument("--outdir", type=Path, default=None, help="write report files here")
    p.set_defaults(func=cmd_pair_state)

    p = sub.add_parser("scan", help="sweep separation and detector width")
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--x-step", type=float, default=0.1)
    p.add_argument("--sigma", type=_sigma_list, default=[0.0],
                   help="comma-separated detector widths")
    p.add_argument("--outdir", type=Path, default=None,
                   help="write scan.csv plus figures here (default: CSV to stdout)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="run the stored-neutron coincidence simulation")
    p.add_argument("--config", type=Path, required=True, help="JSON config file")
    p.add_argument("--outdir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--duration", type=float, default=None,
                   help="override the config duration (s)")
    p.add_argument("--events", action="store_true", help="also write the event list CSV")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tomography", help="reconstruct the pair state from counts")
    p.add_argument("--counts", type=Path, required=True,
                   help="counts record (.json or .csv)")
    p.add_argument("--target", choices=["singlet", "mixed", "pair"], default=None,
                   help="reference state for fidelity reporting")
    p.add_argument("--target-x", type=float, default=0.0,
                   help="pair separation for --target pair")
    p.add_argument("--target-sigma", type=float, default=0.0,
                   help="detector width for --target pair")
    p.add_argument("--outdir", type=Path, default=None)
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("ent-distance", help="separation at which entanglement vanishes")
    p.add_argument("--sigma", type=float, default=0.0,
                   help="Gaussian detector width in units of 1/k_f (0 = point-like)")
    p.add_argument("--kf", type=_positive_kf, default=None,
                   help="Fermi wavenumber in 1/m; adds the distance in meters")
    p.add_argument("--outdir", type=Path, default=None)
    p.set_defaults(func=cmd_ent_distance)
    return parser


def _manifest_name(subcommand: str) -> str:
    return f"{subcommand}.manifest.json"


def _write_manifest(outdir: Path, subcommand: str, argv, resolved: dict, outputs, seed=None):
    manifest = build_manifest(subcommand, __version__, argv, resolved, outputs)
    manifest["seed"] = seed
    write_json(outdir / _manifest_name(subcommand), manifest)


def cmd_pair_state(args, argv) -> int:
    profile = DetectorProfile(args.sigma)
    query = PairQuery(args.x, profile)
    rho = pair_state(query)
    report = entanglement_report(rho)
    doc = {
        "format": "fermipairs.pair-state/1",
        "x": args.x,
        "sigma": args.sigma,
        "g": kernel(args.x, profile),
        "matrix": matrix_to_pairs(rho),
        "coefficients": [[float(v) for v in row] for row in decompose(rho)],
        "negativity": report.negativity,
        "concurrence": report.concurrence,
        "chsh_max": report.chsh_max,
        "ppt_entangled": report.ppt_entangled,
    }
    if args.kf is not None:
        doc["kf_per_meter"] = args.kf
        doc["separation_meters"] = args.x / args.kf
    if args.outdir is None:
        print(json.dumps(doc, indent=2))
        return 0
    args.outdir.mkdir(parents=True, exist_ok=True)
    doc["manifest"] = _manifest_name("pair-state")
    write_json(args.outdir / "pair_state.json", doc)
    _write_manifest(args.outdir, "pair-state", argv,
                    {"x": args.x, "sigma": args.sigma, "kf": args.kf},
                    ["pair_state.json"])
    print(f"wrote pair_state.json to {args.outdir}")
    return 0


def _scan_rows(x_min, x_max, x_step, sigmas):
    if not math.isfinite(x_step) or x_step <= 0:
        raise ValueError(f"x-step must be positive, got {x_step!r}")
    if x_max < x_min:
        raise ValueError(f"empty range: x-max {x_max!r} < x-min {x_min!r}")
    n_points = int(math.floor((x_max - x_min) / x_step + 1e-9)) + 1
    rows = []
    for sigma in sigmas:
        profile = DetectorProfile(sigma)
        try:
            x_star = entanglement_distance(profile)
        except RuntimeError:
            x_star = float("nan")
        for k in range(n_points):
            x = x_min + k * x_step
            rho = pair_state(PairQuery(x, profile))
            report = entanglement_report(rho)
            rows.append({
                "x": x,
                "sigma": sigma,
                "g": kernel(x, profile),
                "negativity": report.negativity,
                "concurrence": report.concurrence,
                "chsh": report.chsh_max,
                "x_star": x_star,
            })
    return rows


def _write_scan_csv(fh, rows, manifest: str = ""):
    if manifest:
        fh.write(f"# manifest: {manifest}\n")
    writer = csv.writer(fh)
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow([repr(float(row[col])) for col in SCAN_COLUMNS])


def cmd_scan(args, argv) -> int:
    rows = _scan_rows(args.x_min, args.x_max, args.x_step, args.sigma)
    if args.outdir is None:
        _write_scan_csv(sys.stdout, rows)
        return 0
    args.outdir.mkdir(parents=True, exist_ok=True)
    manifest_name = _manifest_name("scan")
    with open(args.outdir / "scan.csv", "w", newline="") as fh:
        _write_scan_csv(fh, rows, manifest_name)
    outputs = ["scan.csv"]
    if not args.no_figures:
        from .plots import save_figure, scan_figure

        save_figure(scan_figure(rows), args.outdir / "scan.png",
                    metadata={"Source": manifest_name})
        outputs.append("scan.png")
    resolved = {"x_min": args.x_min, "x_max": args.x_max, "x_step": args.x_step,
                "sigma": args.sigma}
    _write_manifest(args.outdir, "scan", argv, resolved, outputs)
    print(f"wrote {', '.join(outputs)} to {args.outdir}")
    return 0


def cmd_simulate(args, argv) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.duration is not None:
        overrides["duration"] = args.duration
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides).validate()
    record, events = simulate_run(cfg)

    args.outdir.mkdir(parents=True, exist_ok=True)
    manifest_name = _manifest_name("simulate")
    write_json(args.outdir / "counts.json", counts_record_to_dict(record, manifest_name))
    write_counts_csv(args.outdir / "counts.csv", record, manifest_name)
    outputs = ["counts.json", "counts.csv"]
    if args.events:
        write_events_csv(args.outdir / "events.csv", events, manifest_name)
        outputs.append("events.csv")
    if not args.no_figures:
        from .plots import counts_figure, save_figure

        save_figure(counts_figure(record), args.outdir / "counts.png",
                    metadata={"Source": manifest_name})
        outputs.append("counts.png")
    _write_manifest(args.outdir, "simulate", argv, cfg.to_dict(), outputs, seed=cfg.seed)

    meta = record.metadata
    total = record.total_coincidences()
    frac = meta["accidental_pairs"] / meta["pair_events"] if meta["pair_events"] else 0.0
    print(
        f"coincidences={total} true={meta['true_pairs']} "
        f"accidental={meta['accidental_pairs']} accidental_fraction={frac:.3f} "
        f"emitted={meta['emitted']} duration={meta['realized_duration']:g}s"
    )
    return 0


def _target_state(args):
    if args.target == "singlet":
        return singlet_state()
    if args.target == "mixed":
        return maximally_mixed()
    return pair_state(PairQuery(args.target_x, DetectorProfile(args.target_sigma)))


def cmd_tomography(args, argv) -> int:
    record = load_counts(args.counts)
    result = end_to_end(record)
    manifest_name = _manifest_name("tomography") if args.outdir is not None else ""
    doc = tomography_result_to_dict(result, manifest_name)
    if args.target is not None:
        target = _target_state(args)
        doc["target"] = {
            "kind": args.target,
            "fidelity": fidelity(result.physical_state, target),
            "trace_distance": trace_distance(result.physical_state, target),
        }
        if args.target == "pair":
            doc["target"]["x"] = args.target_x
            doc["target"]["sigma"] = args.target_sigma
    if args.outdir is None:
        print(json.dumps(doc, indent=2))
        return 0
    args.outdir.mkdir(parents=True, exist_ok=True)
    write_json(args.outdir / "tomography.json", doc)
    outputs = ["tomography.json"]
    if not args.no_figures:
        from .plots import save_figure, state_figure

        save_figure(state_figure(result.physical_state, "reconstructed"),
                    args.outdir / "tomography.png",
                    metadata={"Source": manifest_name})
        outputs.append("tomography.png")
    _write_manifest(args.outdir, "tomography", argv,
                    {"counts": str(args.counts), "target": args.target}, outputs)
    print(f"wrote {', '.join(outputs)} to {args.outdir}")
    return 0


def cmd_ent_distance(args, argv) -> int:
    profile = DetectorProfile(args.sigma)
    x_star = entanglement_distance(profile)
    doc = {"format": "fermipairs.ent-distance/1", "sigma": args.sigma, "x_star": x_star}
    if args.kf is not None:
        doc["kf_per_meter"] = args.kf
        doc["distance_meters"] = x_star / args.kf
    if args.outdir is None:
        print(json.dumps(doc, indent=2))
        return 0
    args.outdir.mkdir(parents=True, exist_ok=True)
    doc["manifest"] = _manifest_name("ent-distance")
    write_json(args.outdir / "ent_distance.json", doc)
    _write_manifest(args.outdir, "ent-distance", argv,
                    {"sigma": args.sigma, "kf": args.kf}, ["ent_distance.json"])
    print(f"wrote ent_distance.json to {args.outdir}")
    return 0


def main(argv=None) -> int:
    effective = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(effective)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args, effective)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
