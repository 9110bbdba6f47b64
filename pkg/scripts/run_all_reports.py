"""Write one JSON report per subcommand into a directory and summarize the exit codes."""
import argparse
import json
import sys
from pathlib import Path

from symspin.cli import main

RUNS = {
    "osp": ["osp", "--n", "2", "--trunc", "10"],
    "curvature": ["curvature", "--n", "2"],
    "flat": ["flat", "--n", "2"],
    "hodge": ["hodge"],
    "classify": ["classify", "--n", "2"],
}


def run(outdir: Path, only=None) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name, argv in RUNS.items():
        if only and name not in only:
            continue
        path = outdir / f"{name}.json"
        code = main(argv + ["--out", str(path)])
        rep = json.loads(path.read_text())
        gating = [c["name"] for c in rep["checks"] if c["gating"] and not c["passed"]]
        recorded = [c["name"] for c in rep["checks"] if not c["gating"] and not c["passed"]]
        print(f"{name:10s} exit {code}  failing gating checks: {len(gating)}  recorded discrepancies: {len(recorded)}")
        for c in gating + recorded:
            print(f"    {c}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("outdir", nargs="?", default="reports")
    p.add_argument("--only", nargs="*", choices=sorted(RUNS))
    args = p.parse_args()
    sys.exit(run(Path(args.outdir), args.only))
