"""Command-line front end.

Subcommands: ``synth`` (write a synthetic dataset), ``run`` (full
multi-objective run plus both mono baselines), ``baselines`` (monos only),
``sweep`` (robustness over the slope reference), ``plotdata`` (emit columnar
data and a rendered figure from a bundle).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import plotting
from .bundle import (
    FORMAT_VERSION,
    TOOLKIT_VERSION,
    ArchiveEntry,
    RunManifest,
    SolutionBundle,
    SweepPoint,
    load_bundle,
    save_bundle,
)
from .dataio import load_csv, save_csv
from .errors import DataError, NumericalError
from .mixing import SynthConfig, synth_generate
from .signals import SignalMatrix, SirReport, match_and_score
from .spea2 import MONO_NERNST, MONO_SOBI, Spea2Config, dominates, run_mono, run_spea2

FIGURES = ("front", "sir-by-index", "sweep", "sources")


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise DataError(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    values = _parse_floats(text, flag)
    if len(values) != 2:
        raise DataError(f"{flag} expects exactly two values, got {text!r}")
    return values[0], values[1]


def _parse_lags(text: str) -> tuple[int, ...]:
    values = _parse_floats(text, "--lags")
    lags = tuple(int(v) for v in values)
    if any(v != int(v) for v in values) or any(v < 1 for v in lags):
        raise DataError(f"--lags expects positive integers, got {text!r}")
    return lags


def _selectivity_matrix(values: tuple[float, ...], n: int) -> tuple[tuple[float, ...], ...]:
    matrix = np.eye(n)
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    if len(values) == n * n:
        matrix = np.array(values).reshape(n, n)
    elif len(values) == len(off):
        for (i, j), v in zip(off, values):
            matrix[i, j] = v
    else:
        raise DataError(
            f"--selectivity expects {len(off)} off-diagonal or {n * n} full entries"
        )
    return tuple(tuple(float(v) for v in row) for row in matrix)


def _synth_config(args) -> SynthConfig:
    n = args.sources
    return SynthConfig(
        seed=args.seed,
        n_sources=n,
        n_samples=args.samples,
        slopes=_require_length(_parse_floats(args.slopes, "--slopes"), n, "--slopes"),
        selectivity=_selectivity_matrix(_parse_floats(args.selectivity, "--selectivity"), n),
        offsets=_require_length(_parse_floats(args.offsets, "--offsets"), n, "--offsets"),
        smoothing_window=args.smooth,
        activity_range=_parse_pair(args.range, "--range"),
        noise_std_mv=args.noise,
    )


def _require_length(values: tuple[float, ...], n: int, flag: str) -> tuple[float, ...]:
    if len(values) != n:
        raise DataError(f"{flag} expects {n} values, got {len(values)}")
    return values


def _spea2_config(args, reference: float | None = None) -> Spea2Config:
    lags = _parse_lags(args.lags)
    return Spea2Config(
        seed=args.seed,
        population_size=args.pop,
        archive_size=args.archive,
        crossover_share=args.alpha,
        generations=args.gens,
        slope_bounds=_parse_pair(args.bounds, "--bounds"),
        mutation_sigma=args.sigma,
        reference_mv=args.ref if reference is None else reference,
        max_lag=max(lags),
        sobi_lags=lags,
    )


def _load_dataset(args) -> tuple[SignalMatrix, SignalMatrix | None, dict]:
    """Returns (mixtures, truth-or-None, provenance)."""
    if getattr(args, "synthetic", False):
        config = _synth_config(args)
        truth, mixtures, _ = synth_generate(config)
        provenance = {"source": "synthetic", "synth": dataclasses.asdict(config)}
        return mixtures, truth, _jsonable(provenance)
    if not args.input:
        raise DataError("either --input or --synthetic is required")
    mixtures = load_csv(args.input)
    truth = load_csv(args.truth) if args.truth else None
    if truth is not None and truth.data.shape != mixtures.data.shape:
        raise DataError(
            f"truth shape {truth.data.shape} does not match mixtures {mixtures.data.shape}"
        )
    return mixtures, truth, {"source": "csv", "mixtures": args.input, "truth": args.truth}


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _manifest(args, command: str) -> RunManifest:
    return RunManifest(
        command=command,
        argv=tuple(args.raw_argv),
        inputs={
            "input": getattr(args, "input", None),
            "truth": getattr(args, "truth", None),
            "synthetic": bool(getattr(args, "synthetic", False)),
        },
        seed=args.seed,
        created_utc=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def _score_entries(candidates, truth) -> list[ArchiveEntry]:
    entries = []
    for candidate in candidates:
        report = match_and_score(candidate.retrieved, truth) if truth is not None else None
        entries.append(ArchiveEntry.from_candidate(candidate, report))
    return entries


def _format_db(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


def _print_table(bundle: SolutionBundle) -> None:
    print(f"non-dominated set: {len(bundle.archive)} entries (ascending j1)")
    header = f"{'idx':>4}  {'slopes (mV/decade)':<26} {'j1':>12} {'j2':>12} {'avg SIR dB':>12}"
    print(header)
    for index, entry in enumerate(bundle.archive):
        slopes = ", ".join(f"{v:.4f}" for v in entry.slopes)
        average = entry.sir.average_db if entry.sir is not None else None
        print(
            f"{index:>4}  {slopes:<26} {entry.slope_similarity:>12.6g} "
            f"{entry.off_diagonality:>12.6g} {_format_db(average):>12}"
        )
    if bundle.baselines:
        print("baselines:")
        for name, entry in sorted(bundle.baselines.items()):
            slopes = ", ".join(f"{v:.4f}" for v in entry.slopes)
            average = entry.sir.average_db if entry.sir is not None else None
            print(
                f"{name:>14}  {slopes:<26} {entry.slope_similarity:>12.6g} "
                f"{entry.off_diagonality:>12.6g} {_format_db(average):>12}"
            )
    if bundle.best_index is not None:
        best = bundle.archive[bundle.best_index]
        print(
            f"best non-dominated: index {bundle.best_index} "
            f"(avg SIR {_format_db(best.sir.average_db if best.sir else None)} dB)"
        )


def _best_index(bundle: SolutionBundle) -> int | None:
    scored = [
        (entry.sir.average_db, index)
        for index, entry in enumerate(bundle.archive)
        if entry.sir is not None
    ]
    if not scored:
        return None
    return max(scored, key=lambda pair: (pair[0], -pair[1]))[1]


def _check_archive_not_covered(bundle: SolutionBundle) -> None:
    """At least one archive member must survive both mono baselines."""
    if not bundle.baselines or not bundle.archive:
        return
    monos = [
        (entry.slope_similarity, entry.off_diagonality)
        for entry in bundle.baselines.values()
    ]
    for entry in bundle.archive:
        point = (entry.slope_similarity, entry.off_diagonality)
        if not any(dominates(mono, point) for mono in monos):
            return
    raise NumericalError("mono baselines dominate the entire archive")


def cmd_synth(args) -> int:
    config = _synth_config(args)
    truth, mixtures, model = synth_generate(config)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    mixtures_path = prefix.with_name(prefix.name + "_mixtures.csv")
    truth_path = prefix.with_name(prefix.name + "_truth.csv")
    model_path = prefix.with_name(prefix.name + "_model.json")
    save_csv(mixtures_path, mixtures)
    save_csv(truth_path, truth)
    model_path.write_text(
        json.dumps(
            {
                "offsets": list(model.offsets),
                "slopes": list(model.slopes),
                "selectivity": [list(row) for row in model.selectivity],
                "synth": _jsonable(dataclasses.asdict(config)),
            },
            indent=2,
            sort_keys=True,
        )
    )
    print(f"wrote {mixtures_path}, {truth_path}, {model_path}")
    return 0


def _run_bundle(args, command: str, with_archive: bool) -> SolutionBundle:
    mixtures, truth, provenance = _load_dataset(args)
    config = _spea2_config(args)
    archive_entries: list[ArchiveEntry] = []
    if with_archive:
        archive = run_spea2(mixtures, config)
        archive_entries = _score_entries(
            [member.candidate for member in archive.members], truth
        )
    baselines = {
        name: _score_entries([run_mono(mixtures, name, config)], truth)[0]
        for name in (MONO_NERNST, MONO_SOBI)
    }
    bundle = SolutionBundle(
        manifest=_manifest(args, command),
        config={"spea2": _jsonable(dataclasses.asdict(config)), "data": provenance},
        mixtures=mixtures,
        truth=truth,
        archive=archive_entries,
        baselines=baselines,
    )
    bundle.best_index = _best_index(bundle)
    if with_archive:
        _check_archive_not_covered(bundle)
    return bundle


def cmd_run(args) -> int:
    bundle = _run_bundle(args, "run", with_archive=True)
    save_bundle(bundle, args.out)
    _print_table(bundle)
    print(f"bundle written to {args.out}")
    return 0


def cmd_baselines(args) -> int:
    bundle = _run_bundle(args, "baselines", with_archive=False)
    save_bundle(bundle, args.out)
    _print_table(bundle)
    print(f"bundle written to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    mixtures, truth, provenance = _load_dataset(args)
    if truth is None:
        raise DataError("sweep reports SIR and therefore needs ground truth")
    base_config = _spea2_config(args)
    lo, hi = base_config.slope_bounds
    if not (lo <= args.ref_min <= args.ref_max <= hi):
        raise DataError(
            f"reference range [{args.ref_min}, {args.ref_max}] outside slope bounds"
        )
    if args.ref_step <= 0:
        raise DataError("--ref-step must be positive")

    references = []
    value = args.ref_min
    while value <= args.ref_max + 1e-9:
        references.append(round(value, 9))
        value += args.ref_step

    points: list[SweepPoint] = []
    best_run = None  # (sir, -ref, archive, config)
    for reference in references:
        config = dataclasses.replace(base_config, reference_mv=reference)
        archive = run_spea2(mixtures, config)
        reports = [
            match_and_score(member.candidate.retrieved, truth)
            for member in archive.members
        ]
        best = max(report.average_db for report in reports)
        points.append(SweepPoint(reference_mv=reference, best_average_sir_db=best))
        if best_run is None or (best, -reference) > (best_run[0], -best_run[1]):
            best_run = (best, reference, archive, config)

    _, best_reference, best_archive, best_config = best_run
    baselines = {
        name: _score_entries([run_mono(mixtures, name, best_config)], truth)[0]
        for name in (MONO_NERNST, MONO_SOBI)
    }
    bundle = SolutionBundle(
        manifest=_manifest(args, "sweep"),
        config={
            "spea2": _jsonable(dataclasses.asdict(best_config)),
            "data": provenance,
            "sweep": {
                "ref_min": args.ref_min,
                "ref_max": args.ref_max,
                "ref_step": args.ref_step,
                "bundled_reference": best_reference,
            },
        },
        mixtures=mixtures,
        truth=truth,
        archive=_score_entries([m.candidate for m in best_archive.members], truth),
        baselines=baselines,
        sweep=points,
    )
    bundle.best_index = _best_index(bundle)
    save_bundle(bundle, args.out)
    print(f"{'reference (mV)':>14} {'best avg SIR (dB)':>18}")
    for point in points:
        print(f"{point.reference_mv:>14.6g} {point.best_average_sir_db:>18.6g}")
    print(f"bundle written to {args.out} (archive from reference {best_reference:g})")
    return 0


def _aligned_rows(entry: ArchiveEntry) -> list[list[float]]:
    rows = [list(row) for row in entry.retrieved]
    if entry.sir is None:
        return rows
    return [
        [entry.sir.gains[i] * v for v in rows[entry.sir.permutation[i]]]
        for i in range(len(rows))
    ]


def _write_csv_rows(path: Path, header: list[str], rows: list[list]) -> None:
    import csv as _csv

    with path.open("w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_plotdata(args) -> int:
    bundle = load_bundle(args.bundle)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    figure_path = out.with_suffix(".png")

    if args.figure == "front":
        header = ["kind", "index", "j1", "j2", "average_sir_db", "is_best"]
        rows = []
        for index, entry in enumerate(bundle.archive):
            rows.append(
                [
                    "archive",
                    index,
                    repr(entry.slope_similarity),
                    repr(entry.off_diagonality),
                    "" if entry.sir is None else entry.sir.average_db,
                    1 if index == bundle.best_index else 0,
                ]
            )
        for name, entry in sorted(bundle.baselines.items()):
            rows.append(
                [
                    name,
                    "",
                    repr(entry.slope_similarity),
                    repr(entry.off_diagonality),
                    "" if entry.sir is None else entry.sir.average_db,
                    "",
                ]
            )
        _write_csv_rows(out, header, rows)
        plotting.render_front(bundle, figure_path)
    elif args.figure == "sir-by-index":
        if not bundle.archive or any(entry.sir is None for entry in bundle.archive):
            raise DataError("bundle has no SIR reports; rerun with ground truth")
        n = len(bundle.archive[0].sir.per_source_db)
        header = ["index", "j1", *[f"sir_{i + 1}_db" for i in range(n)], "average_sir_db"]
        rows = [
            [
                index,
                repr(entry.slope_similarity),
                *[v for v in entry.sir.per_source_db],
                entry.sir.average_db,
            ]
            for index, entry in enumerate(bundle.archive)
        ]
        _write_csv_rows(out, header, rows)
        plotting.render_sir_by_index(bundle, figure_path)
    elif args.figure == "sweep":
        if bundle.sweep is None:
            raise DataError("bundle has no sweep table; produce one with `pnlsep sweep`")
        header = ["reference_mv", "best_average_sir_db"]
        rows = [[repr(p.reference_mv), p.best_average_sir_db] for p in bundle.sweep]
        _write_csv_rows(out, header, rows)
        plotting.render_sweep(bundle, figure_path)
    elif args.figure == "sources":
        if not bundle.archive:
            raise DataError("bundle has an empty archive; nothing to plot")
        selected = bundle.best_index if bundle.best_index is not None else 0
        series: dict[str, list[list[float]]] = {}
        if bundle.truth is not None:
            series["truth"] = [list(row) for row in bundle.truth.data]
        series["best"] = _aligned_rows(bundle.archive[selected])
        for name, entry in sorted(bundle.baselines.items()):
            series[name] = _aligned_rows(entry)
        n = bundle.mixtures.n_channels
        header = ["t"]
        for name in series:
            header.extend(f"{name}_{i + 1}" for i in range(n))
        rows = []
        for t in range(bundle.mixtures.n_samples):
            row: list = [t]
            for rows_for_name in series.values():
                row.extend(repr(rows_for_name[i][t]) for i in range(n))
            rows.append(row)
        _write_csv_rows(out, header, rows)
        plotting.render_sources(bundle, series, figure_path)
    else:  # pragma: no cover - argparse restricts choices
        raise DataError(f"unknown figure {args.figure!r}")
    print(f"wrote {out} and {figure_path}")
    return 0


def _add_synth_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sources", type=int, default=2, help="source count")
    parser.add_argument("--samples", type=int, default=41, help="time samples")
    parser.add_argument("--slopes", default="55,62", help="true slopes, mV/decade")
    parser.add_argument(
        "--selectivity",
        default="0.3,0.4",
        help="off-diagonal selectivities row-major (or the full matrix)",
    )
    parser.add_argument("--offsets", default="0,0", help="electrode offsets, mV")
    parser.add_argument("--noise", type=float, default=0.0, help="noise std, mV")
    parser.add_argument("--range", default="1,10", help="activity range lo,hi")
    parser.add_argument("--smooth", type=int, default=5, help="smoothing window length")


def _add_evolution_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pop", type=int, default=100, help="population size")
    parser.add_argument("--archive", type=int, default=50, help="archive size")
    parser.add_argument("--gens", type=int, default=30, help="iteration count")
    parser.add_argument("--alpha", type=float, default=50.0, help="crossover share, percent")
    parser.add_argument("--ref", type=float, default=59.0, help="slope reference, mV")
    parser.add_argument("--lags", default="1,2,3", help="covariance lags")
    parser.add_argument("--bounds", default="10,120", help="slope bounds lo,hi")
    parser.add_argument("--sigma", type=float, default=3.0, help="mutation deviation, mV")


def _add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="mixtures CSV (rows are time samples)")
    parser.add_argument("--truth", help="ground-truth sources CSV")
    parser.add_argument(
        "--synthetic", action="store_true", help="generate the dataset instead of reading one"
    )
    _add_synth_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnlsep",
        description="Multi-objective blind source separation for electrode arrays",
    )
    parser.add_argument("--version", action="version", version=TOOLKIT_VERSION)
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="write a synthetic dataset")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output path prefix")
    _add_synth_flags(synth)
    synth.set_defaults(handler=cmd_synth)

    run = commands.add_parser("run", help="multi-objective run plus baselines")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="bundle path")
    _add_dataset_flags(run)
    _add_evolution_flags(run)
    run.set_defaults(handler=cmd_run)

    baselines = commands.add_parser("baselines", help="mono-objective baselines only")
    baselines.add_argument("--seed", type=int, default=0)
    baselines.add_argument("--out", required=True, help="bundle path")
    _add_dataset_flags(baselines)
    _add_evolution_flags(baselines)
    baselines.set_defaults(handler=cmd_baselines)

    sweep = commands.add_parser("sweep", help="robustness sweep over the slope reference")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True, help="bundle path")
    sweep.add_argument("--ref-min", type=float, default=40.0)
    sweep.add_argument("--ref-max", type=float, default=80.0)
    sweep.add_argument("--ref-step", type=float, default=5.0)
    _add_dataset_flags(sweep)
    _add_evolution_flags(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    plotdata = commands.add_parser("plotdata", help="emit plot data and a rendered figure")
    plotdata.add_argument("--bundle", required=True, help="bundle path")
    plotdata.add_argument("--figure", required=True, choices=FIGURES)
    plotdata.add_argument("--out", required=True, help="output CSV path")
    plotdata.set_defaults(handler=cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = argv
    manifest_out = getattr(args, "out", None)
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if manifest_out and args.command in ("run", "baselines", "sweep"):
            manifest = _manifest(args, args.command)
            manifest_path = Path(str(manifest_out) + ".manifest.json")
            manifest_path.write_text(json.dumps(manifest.to_document(), indent=2, sort_keys=True))
            print(f"manifest written to {manifest_path}", file=sys.stderr)
        return 4


def main_entry() -> None:  # pragma: no cover - thin console wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
