"""Regenerate the frozen brute-force oracle data for the 3Q3 acceptance test.

Runs the dense-grid + Newton oracle over 1000 seeded standard-normal quadric
triples and stores every root it finds.  Takes a while (the grid has 401^3
points per system); the result is committed as tests/data/re3q3_oracle.json.gz
so the acceptance suite can replay it quickly.  A sample of systems is
re-derived live by the test to keep the frozen data honest.

Usage: python tests/gen_oracle_data.py [n_systems]
"""

from __future__ import annotations

import gzip
import json
import multiprocessing
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from oracles import brute_force_3q3_roots  # noqa: E402

N_SYSTEMS = 1000
DATA_PATH = Path(__file__).parent / "data" / "re3q3_oracle.json.gz"


def system_for_seed(seed: int) -> np.ndarray:
    """The seeded random coefficient matrix; the acceptance test reproduces
    it from the seed alone."""
    return np.random.default_rng(seed).normal(size=(3, 10))


def _one(seed: int) -> dict:
    roots = brute_force_3q3_roots(system_for_seed(seed))
    return {"seed": seed, "roots": [[float(v) for v in r] for r in roots]}


def main(n_systems: int = N_SYSTEMS) -> None:
    seeds = list(range(n_systems))
    with multiprocessing.Pool() as pool:
        records = []
        for i, rec in enumerate(pool.imap(_one, seeds, chunksize=4)):
            records.append(rec)
            if (i + 1) % 25 == 0:
                print(f"{i + 1}/{n_systems}", flush=True)
    DATA_PATH.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "description": "brute-force grid+Newton oracle roots for seeded "
                       "standard-normal 3Q3 systems",
        "grid_bound": 10.0,
        "grid_step": 0.05,
        "systems": records,
    }
    with gzip.open(DATA_PATH, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh)
    total = sum(len(r["roots"]) for r in records)
    print(f"wrote {DATA_PATH} ({n_systems} systems, {total} roots)")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else N_SYSTEMS)
