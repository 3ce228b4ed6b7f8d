"""Timing comparison between the exact lane and the numpy kernels.

Three workloads, each run both ways on the same seeded inputs:

* packet coefficients: per-tile exact pairings against the grouped
  butterfly of batch_inner_products and the full table build of
  walsh_tables; outputs are compared for exact equality.
* partial-sum fields: the exact truncation field flattened to floats
  against render_partial_sum_field.
* per-cell variation: a python DP loop over columns against the
  vectorised batch_variation.

Times are best-of-N wall clock.  The kernels are expected to win by a
wide margin on anything but tiny grids; the point of the table is to
show the exact lane stays usable at test sizes, not to race it.
"""

from __future__ import annotations

import argparse
import random
import time
from typing import Callable

import numpy as np

from walshtf.experiments.random_gen import (
    dyadic_function,
    quartile_collection,
    tree_coefficients,
)
from walshtf.kernels import (
    batch_variation,
    render_partial_sum_field,
    walsh_tables,
)
from walshtf.operators import partial_sum_field
from walshtf.variation import variation_norm
from walshtf.wavepacket import batch_inner_products, inner_product


def _best_of(repeat: int, fn: Callable[[], object]) -> tuple[float, object]:
    best = float("inf")
    out: object = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _row(label: str, seconds: float, baseline: float, note: str = "") -> None:
    speed = "" if baseline == seconds else f"{baseline / seconds:7.1f}x"
    print(f"  {label:<22} {seconds:9.4f} s {speed:>9} {note}")


def bench_coefficients(args: argparse.Namespace, f, collection) -> None:
    tiles = [q.tile(slot) for q in collection for slot in (1, 2, 3, 4)]
    print(f"packet coefficients ({len(tiles)} tiles)")

    t_single, singles = _best_of(
        args.repeat, lambda: {t: inner_product(f, t) for t in tiles}
    )
    t_group, grouped = _best_of(
        args.repeat, lambda: batch_inner_products(f, tiles)
    )

    def tables_lane():
        tables = walsh_tables(f)
        return {t: tables.coefficient(t) for t in tiles}

    t_tables, from_tables = _best_of(args.repeat, tables_lane)

    assert singles == grouped == from_tables
    _row("per-tile exact", t_single, t_single)
    _row("grouped exact", t_group, t_single)
    _row("butterfly tables", t_tables, t_single, "agreement: exact")


def bench_fields(args: argparse.Namespace, collection, weights) -> tuple[np.ndarray, float]:
    print("partial-sum field")
    exact_terms = list(weights.items())
    float_terms = [(q, float(c)) for q, c in exact_terms]

    t_exact, exact_field = _best_of(
        args.repeat,
        lambda: partial_sum_field(
            exact_terms, 3, args.grid_j, args.grid_m
        ).to_array(),
    )
    t_kernel, rendered = _best_of(
        args.repeat,
        lambda: render_partial_sum_field(
            float_terms, 3, args.grid_j, args.grid_m
        ),
    )
    gap = float(np.max(np.abs(exact_field - rendered)))
    _row("exact rows", t_exact, t_exact)
    _row("rendered", t_kernel, t_exact, f"max gap {gap:.2e}")
    return rendered, gap


def bench_variation(args: argparse.Namespace, field: np.ndarray) -> float:
    print(f"per-cell variation (r = {args.r}, {field.shape[1]} cells)")

    def loop_lane():
        return np.array(
            [
                variation_norm(field[:, c], args.r, method="float").value
                for c in range(field.shape[1])
            ]
        )

    t_loop, looped = _best_of(args.repeat, loop_lane)
    t_batch, batched = _best_of(
        args.repeat, lambda: batch_variation(field, args.r)
    )
    gap = float(np.max(np.abs(looped - batched)))
    _row("python DP loop", t_loop, t_loop)
    _row("batched kernel", t_batch, t_loop, f"max gap {gap:.2e}")
    return gap


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid-j", type=int, default=4)
    parser.add_argument("--grid-m", type=int, default=6)
    parser.add_argument("--quartiles", type=int, default=150)
    parser.add_argument("--r", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=2026)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    f = dyadic_function(rng, args.grid_j, args.grid_m)
    collection = quartile_collection(
        rng, args.quartiles, args.grid_j, args.grid_m
    )
    weights = tree_coefficients(rng, collection)

    print(
        f"grid ({args.grid_j}, {args.grid_m}), "
        f"{args.quartiles} quartiles, seed {args.seed}, "
        f"best of {args.repeat}"
    )
    bench_coefficients(args, f, collection)
    rendered, field_gap = bench_fields(args, collection, weights)
    var_gap = bench_variation(args, rendered)
    worst = max(field_gap, var_gap)
    print(f"float lanes agree with the exact lane within {worst:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
