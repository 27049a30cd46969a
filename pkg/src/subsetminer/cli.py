"""Command-line entry point: ``subsetminer <command> ...``.

Every command that writes files also writes a manifest beside its output
(``<out>.manifest.json``, or ``manifest.json`` inside an output directory)
recording the resolved parameters and input digests.  ``--jobs`` only
changes how work is scheduled, never the bytes written, so it is left out
of the manifest.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from . import io as fio
from .catalog import read_catalog
from .clustering import ClusterConfig, calibrate_prepared, cluster, prepare
from .corpus import scan_corpus
from .estimator import ArityProfile, log10_int, reduction_factor, redundancy, space_size
from .evaluation import corpus_distributions, coverage_curve, measure_coverage
from .subsetcore import FamilyMeta, SubsetFamily, dedupe, filter_by_size, remove_proper_subsets
from .synth import DEFAULT_SIZE_P, SynthConfig, synth_units

SEED_ENV = "SUBSETMINER_SEED"
DEFAULT_SIZES = list(range(10, 101, 10))
DEFAULT_FRACTIONS = [round(0.1 * k, 1) for k in range(1, 11)]


class CliError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _emit(out: str, text: str, command: str, config: dict, inputs: dict, outputs=None) -> None:
    fio.write_text(out, text)
    if out != "-":
        path = fio.manifest_path(out)
        doc = fio.manifest(command, config, inputs, outputs or [Path(out).name])
        fio.write_text(path, fio.dumps_json(doc))


def _emit_dir(out: str, files: dict[str, str], command: str, config: dict, inputs: dict) -> None:
    if out == "-":
        raise CliError("this command writes several files; --out must be a directory")
    Path(out).mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fio.write_text(Path(out) / name, text)
    doc = fio.manifest(command, config, inputs, sorted(files))
    fio.write_text(Path(out) / "manifest.json", fio.dumps_json(doc))


def _inputs(*paths, extensions=(".py",)) -> dict[str, str]:
    return {str(p): fio.digest_input(p, extensions) for p in paths if p is not None}


# commands


def cmd_extract(args) -> None:
    catalog = read_catalog(args.catalog)
    exts = tuple(args.ext or [".py"])
    records, stats = scan_corpus(
        args.root, catalog, extensions=exts, nested_units=not args.no_nested, jobs=args.jobs
    )
    config = {
        "root": str(args.root),
        "catalog": args.catalog or "<default>",
        "catalog_language": catalog.language,
        "extensions": list(exts),
        "nested_units": not args.no_nested,
    }
    inputs = _inputs(args.root, args.catalog, extensions=exts)
    stats_path = args.stats
    if stats_path is None and args.out != "-":
        stats_path = args.out + ".stats.json"
    outputs = [Path(args.out).name]
    if stats_path:
        fio.write_text(stats_path, fio.dumps_json({"format_version": 1, **stats.to_dict()}))
        outputs.append(Path(stats_path).name)
    _emit(args.out, fio.dumps_units(records), "extract", config, inputs, outputs)
    print(
        f"extract: {stats.files} files, {stats.units} units, {len(records)} records, "
        f"{stats.dropped_empty} empty, {stats.parse_failures} failures",
        file=sys.stderr,
    )


def cmd_prep(args) -> None:
    data = fio.read_units_or_family(args.input)
    fam = data if isinstance(data, SubsetFamily) else SubsetFamily(
        [r.instructions for r in data], FamilyMeta(source=Path(args.input).name)
    )
    fam = dedupe(fam)
    if args.size is not None:
        fam = filter_by_size(fam, args.size)
    fam = remove_proper_subsets(fam)
    config = {"size": args.size}
    _emit(args.out, fam.dumps(), "prep", config, _inputs(args.input))


def _cluster_config(args, size: int) -> ClusterConfig:
    return ClusterConfig(
        target_size=size,
        headroom=args.headroom,
        num_ids=args.num_ids,
        seed=args.seed,
        amplify_factor=args.amplify,
        increment=args.increment,
    )


def cmd_cluster(args) -> None:
    data = fio.read_units_or_family(args.input)
    config = _cluster_config(args, args.size)
    result = cluster(data, config, source=Path(args.input).name)
    _emit(args.out, result.ids.dumps(), "cluster", config.resolved(), _inputs(args.input))
    print(
        f"cluster: requested {result.num_requested}, created {result.num_created} "
        f"(extra {result.extra_created})",
        file=sys.stderr,
    )


def _calibrate_row(job):
    data, config = job
    trace: dict = {}
    fam = prepare(data, config, trace)
    n = calibrate_prepared(fam, config.cap, config.increment)
    return (config.target_size, config.effective_headroom, config.increment, trace["after_filter"], n)


def _pool_map(fn, jobs_list, jobs: int):
    if jobs > 1 and len(jobs_list) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, jobs_list))
    return [fn(j) for j in jobs_list]


def cmd_calibrate(args) -> None:
    data = fio.read_units_or_family(args.input)
    jobs = [(data, _cluster_config(args, m)) for m in args.sizes]
    rows = _pool_map(_calibrate_row, jobs, args.jobs)
    text = fio.csv_text(["size", "headroom", "increment", "admitted", "num_ids"], rows)
    config = {
        "sizes": args.sizes,
        "headroom": args.headroom,
        "amplify_factor": args.amplify,
        "increment": args.increment,
        "seed": args.seed,
    }
    _emit(args.out, text, "calibrate", config, _inputs(args.input))


def cmd_coverage(args) -> None:
    fam = fio.read_family(args.family)
    units = fio.read_units(args.units)
    size = args.size if args.size is not None else fam.meta.size_limit
    if size is None:
        raise CliError("family has no size_limit in its metadata; pass --size")
    report = measure_coverage(fam, units, size)
    summary = {"format_version": 1, "size_limit": size, **report.summary()}
    config = {"size": size}
    inputs = _inputs(args.family, args.units)
    if args.out == "-":
        fio.write_text("-", fio.dumps_json(summary))
        return
    members = fam.subsets
    rows = [
        (rank, idx, count, len(members[idx]), " ".join(members[idx]))
        for rank, (idx, count) in enumerate(report.ranked_subsets(), 1)
    ]
    files = {
        "coverage.json": fio.dumps_json(summary),
        "per_subset.csv": fio.csv_text(
            ["rank", "subset_index", "units_covered", "subset_size", "instructions"], rows
        ),
    }
    _emit_dir(args.out, files, "coverage", config, inputs)


def cmd_curve(args) -> None:
    units = fio.read_units(args.input)
    template = ClusterConfig(
        target_size=args.sizes[0],
        headroom=args.headroom,
        num_ids=args.num_ids,
        seed=args.cluster_seed,
        amplify_factor=args.amplify,
        increment=args.increment,
    )
    seeds = args.seeds if args.seeds else [args.seed]
    rows = []
    for s in seeds:
        rows.extend(coverage_curve(units, args.sizes, args.fractions, template, s, jobs=args.jobs))
    header = ["size", "fraction", "seed", "train_units", "num_ids", "coverage_eligible", "coverage_all"]
    text = fio.csv_text(
        header,
        [
            (r.size, f"{r.fraction:g}", r.seed, r.train_units, r.num_ids,
             r.coverage_eligible, r.coverage_all)
            for r in rows
        ],
    )
    config = {
        "sizes": args.sizes,
        "fractions": args.fractions,
        "split_seeds": seeds,
        "cluster": template.resolved() | {"target_size": None, "headroom": args.headroom},
    }
    _emit(args.out, text, "curve", config, _inputs(args.input))


def cmd_stats(args) -> None:
    units = fio.read_units(args.input)
    rep = corpus_distributions(units)
    files = {
        "size_histogram.csv": fio.csv_text(
            ["size", "units", "cumulative_percent"], rep.size_histogram
        ),
        "instruction_frequency.csv": fio.csv_text(
            ["rank", "instruction", "units"],
            [(k, name, c) for k, (name, c) in enumerate(rep.instruction_frequency, 1)],
        ),
        "pair_frequency.csv": fio.csv_text(
            ["rank", "first", "second", "units"],
            [(k, a, b, c) for k, ((a, b), c) in enumerate(rep.pair_frequency, 1)],
        ),
    }
    total = sum(c for _, c, _ in rep.size_histogram)
    small = sum(c for s, c, _ in rep.size_histogram if s <= args.size)
    files["summary.json"] = fio.dumps_json(
        {
            "format_version": 1,
            "units": total,
            "distinct_instructions": len(rep.instruction_frequency),
            "distinct_pairs": len(rep.pair_frequency),
            "size_limit": args.size,
            "percent_at_or_below_limit": round(100.0 * small / total, 6) if total else 0.0,
        }
    )
    _emit_dir(args.out, files, "stats", {"size": args.size}, _inputs(args.input))


def cmd_estimate(args) -> None:
    if args.catalog:
        full = ArityProfile.from_catalog(read_catalog(args.catalog), inputs=args.inputs)
    else:
        if args.unary is None and args.binary is None:
            raise CliError("give --unary/--binary or --catalog")
        full = ArityProfile(args.unary or 0, args.binary or 0, args.inputs)
    subset = None
    if args.subset_unary is not None or args.subset_binary is not None:
        subset = ArityProfile(args.subset_unary or 0, args.subset_binary or 0, args.inputs)
    if args.overlap is not None and subset is None:
        raise CliError("--overlap needs a subset profile (--subset-unary/--subset-binary)")

    header = ["level", "new_values", "cumulative", "log10_cumulative"]
    if subset is not None:
        header += ["subset_cumulative", "log10_reduction"]
    if args.overlap is not None:
        header += ["redundancy"]
    est = space_size(full, args.depth)
    red = redundancy(args.overlap, subset, args.depth) if args.overlap is not None else None
    rows = []
    for k, (new, cum) in enumerate(zip(est.per_level, est.cumulative_by_level()), 1):
        row = [k, new, cum, f"{log10_int(cum):.6f}" if cum > 0 else ""]
        if subset is not None:
            row.append(space_size(subset, k).cumulative)
            try:
                row.append(f"{reduction_factor(full, subset, args.num_subsets, k).log10:.6f}")
            except (ZeroDivisionError, ValueError):
                row.append("")
        if red is not None:
            row.append(f"{float(red[k - 1]):.6g}")
        rows.append(row)
    config = {
        "full": {"unary": full.unary_count, "binary": full.binary_count, "inputs": full.inputs},
        "catalog": args.catalog,
        "depth": args.depth,
        "subset": None if subset is None else {
            "unary": subset.unary_count, "binary": subset.binary_count
        },
        "num_subsets": args.num_subsets,
        "overlap": args.overlap,
    }
    _emit(args.out, fio.csv_text(header, rows), "estimate", config, _inputs(args.catalog))


def cmd_synth(args) -> None:
    cfg = SynthConfig(
        units=args.units,
        vocabulary=args.vocabulary,
        exponent=args.exponent,
        size_p=args.size_p,
        max_size=args.max_size,
        units_per_file=args.units_per_file,
        seed=args.seed,
    )
    records = synth_units(cfg)
    _emit(args.out, fio.dumps_units(records), "synth", asdict(cfg), {})


# parser


def _add_cluster_flags(p: argparse.ArgumentParser, with_size: bool = True) -> None:
    if with_size:
        p.add_argument("--size", type=int, required=True, help="target derived-subset size M")
    p.add_argument(
        "--headroom", type=int, default=None,
        help="extra members allowed above M (default: ceil(0.2*M))",
    )
    p.add_argument("--num-ids", type=int, default=0, help="requested subsets; 0 calibrates (default: 0)")
    p.add_argument("--amplify", type=float, default=0.5, help="amplification factor (default: 0.5)")
    p.add_argument("--increment", type=int, default=10, help="calibration step (default: 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subsetminer",
        description="Mine, cluster and evaluate instruction co-occurrence subsets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
        return p

    p = add("extract", cmd_extract, "extract unit records from a directory or .zip of sources")
    p.add_argument("root", help="corpus directory or .zip archive")
    p.add_argument("--catalog", help="catalog JSON (default: bundled Python catalog)")
    p.add_argument("--ext", action="append", help="file extension to scan (repeatable; default .py)")
    p.add_argument("--no-nested", action="store_true", help="keep nested defs inside their function")
    p.add_argument("--out", required=True, help="units JSONL path or -")
    p.add_argument("--stats", help="stats JSON path (default: <out>.stats.json)")

    p = add("prep", cmd_prep, "dedupe and remove proper subsets from a units file")
    p.add_argument("input", help="units JSONL or family JSON")
    p.add_argument("--size", type=int, default=None, help="drop subsets larger than this first")
    p.add_argument("--out", required=True, help="family JSON path or -")

    p = add("cluster", cmd_cluster, "cluster units into derived subsets")
    p.add_argument("input", help="units JSONL or family JSON")
    _add_cluster_flags(p)
    p.add_argument("--seed", type=int, default=None, help=f"amplification seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--out", required=True, help="family JSON path or -")

    p = add("calibrate", cmd_calibrate, "find the subset count each size needs")
    p.add_argument("input", help="units JSONL or family JSON")
    p.add_argument("--sizes", type=_int_list, default=DEFAULT_SIZES, help="comma-separated sizes (default: 10..100 step 10)")
    _add_cluster_flags(p, with_size=False)
    p.add_argument("--seed", type=int, default=None, help=f"amplification seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--out", required=True, help="CSV path or -")

    p = add("coverage", cmd_coverage, "measure how many units a family covers")
    p.add_argument("family", help="family JSON")
    p.add_argument("units", help="units JSONL")
    p.add_argument("--size", type=int, default=None, help="eligibility limit (default: family size_limit)")
    p.add_argument("--out", required=True, help="output directory, or - for the JSON summary only")

    p = add("curve", cmd_curve, "unseen-code coverage over sizes and training fractions")
    p.add_argument("input", help="units JSONL")
    p.add_argument("--sizes", type=_int_list, default=DEFAULT_SIZES, help="comma-separated sizes (default: 10..100 step 10)")
    p.add_argument("--fractions", type=_float_list, default=DEFAULT_FRACTIONS, help="comma-separated train fractions (default: 0.1..1.0)")
    _add_cluster_flags(p, with_size=False)
    p.add_argument("--seed", type=int, default=None, help=f"split seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--seeds", type=_int_list, default=None, help="several split seeds; overrides --seed")
    p.add_argument("--cluster-seed", type=int, default=0, help="amplification seed (default: 0)")
    p.add_argument("--out", required=True, help="CSV path or -")

    p = add("stats", cmd_stats, "size histogram and instruction / pair frequencies")
    p.add_argument("input", help="units JSONL")
    p.add_argument("--size", type=int, default=10, help="limit for the summary share (default: 10)")
    p.add_argument("--out", required=True, help="output directory")

    p = add("estimate", cmd_estimate, "search-space size, reduction and overlap redundancy per level")
    p.add_argument("--unary", type=int, default=None)
    p.add_argument("--binary", type=int, default=None)
    p.add_argument("--catalog", help="derive unary/binary counts from a catalog")
    p.add_argument("--inputs", type=int, default=1, help="level-zero values (default: 1)")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--subset-unary", type=int, default=None)
    p.add_argument("--subset-binary", type=int, default=None)
    p.add_argument("--num-subsets", type=int, default=1, help="subset count for the reduction (default: 1)")
    p.add_argument("--overlap", type=int, default=None, help="shared instructions for redundancy")
    p.add_argument("--out", default="-", help="CSV path or - (default: -)")

    p = add("synth", cmd_synth, "generate a synthetic units corpus")
    p.add_argument("--units", type=int, default=1000)
    p.add_argument("--vocabulary", type=int, default=200)
    p.add_argument("--exponent", type=float, default=1.0, help="Zipf exponent (default: 1.0)")
    p.add_argument("--size-p", type=float, default=DEFAULT_SIZE_P, help="geometric size parameter (default: 90%% of units <= 10)")
    p.add_argument("--max-size", type=int, default=80)
    p.add_argument("--units-per-file", type=int, default=10)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--out", required=True, help="units JSONL path or -")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = _default_seed()
        if args.jobs < 1:
            raise CliError("--jobs must be >= 1")
        args.func(args)
    except (CliError, ValueError, OSError, KeyError, ZeroDivisionError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"subsetminer: error: {args.command}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
