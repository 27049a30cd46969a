"""Run every subcommand into a directory; shared by CLI and determinism tests."""

from __future__ import annotations

from pathlib import Path

from subsetminer.cli import main

FIXTURES = Path(__file__).parent / "fixtures" / "small"


def run_all(out: Path, jobs: int) -> None:
    j = ["--jobs", str(jobs)]
    steps = [
        ["synth", "--units", "400", "--seed", "5", "--out", f"{out}/units.jsonl"],
        ["extract", str(FIXTURES), "--out", f"{out}/extracted.jsonl"],
        ["prep", f"{out}/units.jsonl", "--size", "10", "--out", f"{out}/prep.json"],
        ["cluster", f"{out}/units.jsonl", "--size", "10", "--seed", "3", "--out", f"{out}/ids.json"],
        ["calibrate", f"{out}/units.jsonl", "--sizes", "10,20", "--out", f"{out}/calibrate.csv"],
        ["coverage", f"{out}/ids.json", f"{out}/units.jsonl", "--out", f"{out}/coverage"],
        [
            "curve", f"{out}/units.jsonl", "--sizes", "10", "--fractions", "0.5,1.0",
            "--seeds", "1,2", "--increment", "50", "--out", f"{out}/curve.csv",
        ],
        ["stats", f"{out}/units.jsonl", "--out", f"{out}/stats"],
        [
            "estimate", "--unary", "1", "--binary", "1", "--depth", "3", "--subset-unary", "0",
            "--subset-binary", "1", "--num-subsets", "2", "--overlap", "1", "--out", f"{out}/estimate.csv",
        ],
    ]
    for argv in steps:
        code = main(argv + j)
        if code != 0:
            raise AssertionError(f"{argv[0]} exited {code}")


def snapshot(out: Path) -> dict[str, bytes]:
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
