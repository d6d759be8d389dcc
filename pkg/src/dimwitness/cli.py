"""Command-line interface.

Subcommands: simulate, power, analyze, emit, ingest, spectrum. Every option
can also come from a flat JSON config file (--config); command-line flags
win over file values, which win over the built-in defaults. Each run writes
a run_manifest.json (config echo, seed, versions, wall clock) into the
output directory, which defaults to $DIMWITNESS_OUTPUT_DIR or the current
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__, figures, qasm
from .campaign import (
    POWER_SHOT_EXPONENTS,
    CampaignConfig,
    analyze_series_file,
    build_spectrum_evolution,
    power_study,
    run_simulation_campaign,
    spectrum_dump,
)
from .dynamics import write_series
from .errors import DimWitnessError
from .witness import rank_ceiling

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2

OUTPUT_DIR_ENV = "DIMWITNESS_OUTPUT_DIR"


def _default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, ".")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DimWitnessError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DimWitnessError(f"config file {path} must hold a flat JSON object")
    return data


def _merged(args: argparse.Namespace, key: str, default):
    """CLI > config file > default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    file_cfg = getattr(args, "_file_cfg", {})
    if key in file_cfg:
        return file_cfg[key]
    return default


def _parse_dims(value) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    return tuple(int(part) for part in str(value).split(",") if part.strip())


def _write_manifest(output_dir: Path, command: str, config: dict, started: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "versions": {
            "dimwitness": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_clock_seconds": time.perf_counter() - started,
    }
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "run_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _campaign_config(args: argparse.Namespace, mode: str) -> CampaignConfig:
    shots_list = _merged(args, "shots_exponents", None)
    if shots_list is not None:
        shots_list = tuple(2 ** int(x) for x in _parse_dims(shots_list))
    return CampaignConfig(
        dims=_parse_dims(_merged(args, "dims", "2")),
        trials=int(_merged(args, "trials", 2000 if mode == "simulate" else 100)),
        shots=int(_merged(args, "shots", 8192)),
        N=int(_merged(args, "N", 10)),
        z=float(_merged(args, "z", 3.29)),
        d_a=int(_merged(args, "d_a", 2)),
        seed=int(_merged(args, "seed", 0)),
        evolution=str(_merged(args, "evolution", "haar_unitary" if mode == "simulate" else "auto")),
        weight=float(_merged(args, "weight", 0.08)),
        mode=mode,
        shots_list=shots_list,
        workers=int(_merged(args, "workers", 1)),
        output_dir=str(_merged(args, "output_dir", _default_output_dir())),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _campaign_config(args, "simulate")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    histograms = {}
    for dim in config.dims:
        report = run_simulation_campaign(replace(config, dims=(dim,)))
        (out / f"report_d{dim}.json").write_text(report.to_json() + "\n")
        (out / f"histogram_d{dim}.csv").write_text(report.histogram_csv())
        histograms[f"d={dim} ({report.evolution})"] = report.histogram
        print(
            f"d={dim} [{report.evolution}]: {report.trials} trials, "
            f"rejection fraction at d_a={config.d_a}: {report.rejection_fraction:.4f}"
        )
    if not args.no_figures:
        figures.save_rank_histograms(
            histograms,
            out / "histograms.png",
            ceiling=config.d_a * config.d_a,
            title=f"validated ranks, {config.shots} shots, N={config.N}, z={config.z}",
        )
    _write_manifest(out, "simulate", config.to_dict(), started)
    return EXIT_OK


def _cmd_power(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _campaign_config(args, "power")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = power_study(config)
    summary = ["dim,shots,trials,rejection_fraction"]
    cell_hists = {}
    for cell in cells:
        (out / f"power_d{cell.dim}_n{cell.shots}.csv").write_text(cell.histogram_csv())
        (out / f"power_report_d{cell.dim}_n{cell.shots}.json").write_text(cell.to_json() + "\n")
        summary.append(f"{cell.dim},{cell.shots},{cell.trials},{cell.rejection_fraction!r}")
        cell_hists[(cell.dim, cell.shots)] = cell.histogram
        print(
            f"d={cell.dim}, shots={cell.shots}: rejection fraction "
            f"{cell.rejection_fraction:.4f}"
        )
    (out / "power_summary.csv").write_text("\n".join(summary) + "\n")
    if not args.no_figures:
        figures.save_power_grid(
            cell_hists, out / "power.png", ceiling=config.d_a * config.d_a
        )
    _write_manifest(out, "power", config.to_dict(), started)
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    out = Path(str(_merged(args, "output_dir", _default_output_dir())))
    n_delays = _merged(args, "N", None)
    shots = _merged(args, "shots", None)
    z = float(_merged(args, "z", 3.29))
    d_a = int(_merged(args, "d_a", 2))
    report = analyze_series_file(
        args.path,
        n_delays=None if n_delays is None else int(n_delays),
        shots=None if shots is None else int(shots),
        z=z,
        d_a=d_a,
    )
    out.mkdir(parents=True, exist_ok=True)
    report.save(out / "report.json")
    if not args.no_figures:
        figures.save_singular_values(
            report.singular_values,
            report.threshold,
            out / "singular_values.png",
            title=f"N={report.config.N}, shots={report.config.shots}, z={report.config.z}",
        )
    config_echo = {
        "path": str(args.path), "N": report.config.N, "shots": report.config.shots,
        "z": z, "d_a": d_a, "seed": None,
    }
    _write_manifest(out, "analyze", config_echo, started)
    p_text = "not computed (delay matrix clips d_a)" if report.p_value_bound is None \
        else f"{report.p_value_bound:.6g}"
    print(f"validated rank: {report.validated_rank} (threshold {report.threshold:.6g})")
    print(f"p-value bound for dimension {d_a}: {p_text}")
    if report.rejects_advertised_dimension:
        print(f"advertised dimension {d_a} REJECTED: evidence of leakage")
        return EXIT_REJECTED
    print(f"no evidence against advertised dimension {d_a}")
    return EXIT_OK


def _cmd_emit(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    out = Path(str(_merged(args, "output_dir", _default_output_dir())))
    qubits = int(_merged(args, "qubits", 1))
    n_delays = int(_merged(args, "N", 10 if qubits == 1 else 20))
    seed = int(_merged(args, "seed", 0))
    if qubits == 1:
        suite = qasm.emit_single_qubit_suite(seed, n_delays)
    elif qubits == 2:
        control = int(_merged(args, "control", 0))
        target = int(_merged(args, "target", 1))
        suite = qasm.emit_two_qubit_suite(seed, n_delays, control, target)
    else:
        raise DimWitnessError(f"qubits must be 1 or 2, got {qubits}")
    qasm.write_suite(suite, out)
    config_echo = {
        "qubits": qubits, "N": n_delays, "seed": seed,
        "control": suite.control, "target": suite.target,
    }
    _write_manifest(out, "emit", config_echo, started)
    print(f"wrote {len(suite.programs)} programs and manifest.json to {out}")
    return EXIT_OK


def _cmd_ingest(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    out = Path(str(_merged(args, "output_dir", _default_output_dir())))
    path = Path(args.path)
    if path.is_dir():
        records = qasm.load_counts_dir(path)
    else:
        records = qasm.load_counts(path)
    series = qasm.ingest_counts(records)
    out.mkdir(parents=True, exist_ok=True)
    target = out / str(_merged(args, "output", "series.csv"))
    write_series(series, target)
    _write_manifest(out, "ingest", {"path": str(path), "output": str(target), "seed": None}, started)
    print(f"ingested {len(records)} records ({series.shots} shots each) -> {target}")
    return EXIT_OK


def _cmd_spectrum(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    out = Path(str(_merged(args, "output_dir", _default_output_dir())))
    kind = str(_merged(args, "evolution", "haar_unitary"))
    dim = int(_merged(args, "dim", 2))
    weight = float(_merged(args, "weight", 0.08))
    seed = int(_merged(args, "seed", 0))
    s_min = float(_merged(args, "s_min", 1.0))
    s_max = float(_merged(args, "s_max", 2.0))
    points = int(_merged(args, "points", 101))
    rng = np.random.default_rng(seed)
    evolution = build_spectrum_evolution(kind, dim, weight, rng)
    powers = np.linspace(s_min, s_max, points)
    flow = spectrum_dump(evolution, powers)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["s,eigenvalue_index,real,imag"]
    for i, s in enumerate(powers):
        for j in range(flow.shape[1]):
            lines.append(f"{float(s)!r},{j},{float(flow[i, j].real)!r},{float(flow[i, j].imag)!r}")
    (out / "spectrum.csv").write_text("\n".join(lines) + "\n")
    if not args.no_figures:
        figures.save_spectrum_flow(
            powers, flow, out / "spectrum.png",
            title=f"{kind}, d={dim}, s in [{s_min:g}, {s_max:g}]",
        )
    config_echo = {
        "evolution": kind, "dim": dim, "weight": weight, "seed": seed,
        "s_min": s_min, "s_max": s_max, "points": points,
    }
    _write_manifest(out, "spectrum", config_echo, started)
    ceiling = rank_ceiling([dim], "general")
    print(f"dumped {flow.shape[1]} eigenvalue trajectories (rank ceiling {ceiling})")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file; CLI flags override it")
    parser.add_argument("--output-dir", dest="output_dir",
                        help=f"output directory (default ${OUTPUT_DIR_ENV} or '.')")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip matplotlib rendering, write data files only")
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimwitness",
        description="Dimension-witness leakage detection from measured time series",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run simulated finite-shot campaigns")
    _add_common(p)
    p.add_argument("--dims", help="comma-separated dimensions, e.g. 2,3")
    p.add_argument("--trials", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--z", type=float)
    p.add_argument("--d-a", type=int, dest="d_a")
    p.add_argument("--evolution", choices=["haar_unitary", "mixed_cptp", "two_qubit_step", "auto"])
    p.add_argument("--weight", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("power", help="rejection power versus shot count")
    _add_common(p)
    p.add_argument("--dims")
    p.add_argument("--trials", type=int)
    p.add_argument("--shots-exponents", dest="shots_exponents",
                   help="comma-separated base-2 exponents, e.g. 14,15,16,17,18,19")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--z", type=float)
    p.add_argument("--d-a", type=int, dest="d_a")
    p.add_argument("--evolution", choices=["haar_unitary", "mixed_cptp", "two_qubit_step", "auto"])
    p.add_argument("--weight", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("analyze", help="validate the rank of a recorded series")
    _add_common(p)
    p.add_argument("path", help="series CSV (with JSON sidecar), counts JSON, or counts dir")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--shots", type=int)
    p.add_argument("--z", type=float)
    p.add_argument("--d-a", type=int, dest="d_a")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("emit", help="emit an openQASM 2.0 circuit suite")
    _add_common(p)
    p.add_argument("--qubits", type=int, choices=[1, 2])
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--control", type=int)
    p.add_argument("--target", type=int)
    p.set_defaults(func=_cmd_emit)

    p = sub.add_parser("ingest", help="convert measured counts to a series CSV")
    _add_common(p)
    p.add_argument("path", help="counts JSON file or directory of counts_<t>.json")
    p.add_argument("--output", help="series file name (default series.csv)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("spectrum", help="dump eigenvalue trajectories of an evolution")
    _add_common(p)
    p.add_argument("--evolution",
                   choices=["identity", "haar_unitary", "mixed_cptp", "two_qubit_step"])
    p.add_argument("--dim", type=int)
    p.add_argument("--weight", type=float)
    p.add_argument("--s-min", type=float, dest="s_min")
    p.add_argument("--s-max", type=float, dest="s_max")
    p.add_argument("--points", type=int)
    p.set_defaults(func=_cmd_spectrum)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._file_cfg = _load_config_file(args.config)
        return args.func(args)
    except DimWitnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
