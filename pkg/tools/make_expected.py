#!/usr/bin/env python3
"""Regenerate src/modtwist/data/expected/*.json: search output for each shipped fixture.

Each file is re-checked with verify before it is written.

    python3 tools/make_expected.py [--workers W] [LABEL ...]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from modtwist.pipeline import records_to_json, search, shipped_fixtures, verify  # noqa: E402


def slug(label: str) -> str:
    return label.lower().replace("(", "_").replace(")", "").replace("-", "_")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("labels", nargs="*")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    out = ROOT / "src" / "modtwist" / "data" / "expected"
    out.mkdir(parents=True, exist_ok=True)
    fixtures = shipped_fixtures()
    for label in args.labels or list(fixtures):
        t0 = time.perf_counter()
        records = search(fixtures[label], workers=args.workers)
        rep = verify(records, fixtures)
        if not rep.ok:
            print(rep.text())
            raise SystemExit(f"{label}: records fail verification")
        (out / f"{slug(label)}.json").write_text(records_to_json(records))
        print(f"{label}: {len(records)} records, {time.perf_counter() - t0:.1f}s", flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
