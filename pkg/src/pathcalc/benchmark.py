"""Timing comparison of the compiled kernels against the pure-Python path.

Run as ``python -m pathcalc.benchmark``.  Both variants are always importable
from :mod:`pathcalc._kernels` (the ``*_py`` names are the references), so the
comparison works regardless of the ``PATHCALC_NO_NUMBA`` setting; when numba
is disabled the two columns coincide.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels as K
from .simulate import SimSpec, simulate


def _time(fn, *args, repeat: int = 3) -> float:
    fn(*args)  # warm-up (JIT compilation for the numba variants)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run(steps: int = 2 ** 14, seed: int = 0) -> list[tuple[str, float, float]]:
    path = simulate(SimSpec(kind="brownian", steps=steps, seed=seed, mode="step"))
    times = path.times
    values = np.ascontiguousarray(path.values[:, 0])
    scale = 2.0 ** 8

    tau, _, cnt = K.partition_step_py(times, values, scale)
    grid = np.unique(np.concatenate([times, tau[:cnt]]))
    vgrid = np.ascontiguousarray(np.interp(grid, times, values))
    pos = np.ascontiguousarray(np.searchsorted(grid, tau[:cnt]).astype(np.int64))

    rng = np.random.default_rng(seed)
    seqs = [rng.normal(size=int(rng.integers(1, 200))) for _ in range(2000)]
    flat = np.concatenate(seqs)
    offsets = np.concatenate([[0], np.cumsum([len(s) for s in seqs])]).astype(np.int64)

    cases = [
        ("partition_step", K.partition_step, K.partition_step_py,
         (times, values, scale)),
        ("partition_linear_count", K.partition_linear_count,
         K.partition_linear_count_py, (times, values, scale)),
        ("qv_on_grid", K.qv_on_grid, K.qv_on_grid_py, (vgrid, vgrid, pos)),
        ("crossings_total_up", K.crossings_total_up, K.crossings_total_up_py,
         (values, 2.0 ** -8)),
        ("bdg_batch", K.bdg_batch, K.bdg_batch_py, (flat, offsets)),
        ("doob_positions", K.doob_positions, K.doob_positions_py,
         (values, -16, 16, 0.125, 0.01, len(values))),
    ]
    rows = []
    for name, fast, ref, args in cases:
        rows.append((name, _time(fast, *args), _time(ref, *args)))
    return rows


def main():
    print(f"numba enabled: {K.NUMBA_ENABLED}")
    rows = run()
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'compiled':>12}  {'pure python':>12}  {'speedup':>8}")
    for name, fast, ref in rows:
        speed = ref / fast if fast > 0 else float("inf")
        print(f"{name.ljust(width)}  {fast * 1e3:>10.3f}ms  {ref * 1e3:>10.3f}ms  {speed:>7.1f}x")


if __name__ == "__main__":
    main()
