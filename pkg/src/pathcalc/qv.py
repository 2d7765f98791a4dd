"""Discrete quadratic variation along dyadic-crossing partitions.

``Q^n_t`` is the sum of squared increments between consecutive partition
times clamped at ``t`` (including the partial increment from the last
partition time to ``t``).  Cross terms use products of coordinate
increments along the multi-dimensional partition and agree exactly with the
polarization combination of 1-d quadratic sums along the same times.

Limits are realized as the last computed generation together with a Cauchy
diagnostic ``z_sup[n] = sup_t |Q^n_t - Q^{n-1}_t|``; non-convergence is
reported data, never an error.  Convention: ``Q^0 := 0`` so ``Z^1 = Q^1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ContractError
from .partitions import SENTINEL, LebesguePartition, lebesgue_partition_1d, lebesgue_partition_nd
from .paths import MODE_STEP, Path, PsiSpec

Q0_CONVENTION = "Q^0 := 0, so Z^1 = Q^1"


def _partition_for(path: Path, n: int) -> LebesguePartition:
    if path.dim == 1:
        return lebesgue_partition_1d(path, n)
    return lebesgue_partition_nd(path, n)


def _positions(grid: np.ndarray, times: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(grid, times)
    return np.ascontiguousarray(pos.astype(np.int64))


def discrete_qv(path: Path, partition: LebesguePartition, t: float) -> float:
    """``Q^n_t`` of a 1-d path along realized partition times."""
    if path.dim != 1:
        raise ContractError("discrete_qv needs a 1-d path; use discrete_cross_qv")
    if not 0.0 <= t <= path.horizon:
        raise ContractError("t outside [0, horizon]")
    if partition.times[-1] > path.horizon:
        raise ContractError("partition does not belong to this path")
    clamped = np.append(np.minimum(partition.times, t), t)
    vals = path.eval(clamped)[:, 0]
    return float(np.sum(np.diff(vals) ** 2))


def discrete_cross_qv(path: Path, n: int, i: int, j: int, t: float,
                      partition: LebesguePartition | None = None) -> float:
    """``Q^{i,j,n}_t`` along the d-dimensional partition (1-based i, j)."""
    if not (1 <= i <= path.dim and 1 <= j <= path.dim):
        raise ContractError("coordinate index out of range")
    part = partition if partition is not None else _partition_for(path, n)
    clamped = np.append(np.minimum(part.times, t), t)
    vals = path.eval(clamped)
    di = np.diff(vals[:, i - 1])
    dj = np.diff(vals[:, j - 1])
    return float(np.sum(di * dj))


@dataclass
class QVReport:
    """Per-generation quadratic variation paths and convergence diagnostics."""

    dim: int
    n_max: int
    tol: float
    generations: list[int]
    z_sup: np.ndarray                      # z_sup[k] for generation k+1
    qv_terminal: np.ndarray                # (n_max, d, d) terminal matrix per generation
    limit_times: np.ndarray                # partition times of the last generation
    limit_values: np.ndarray               # (len(limit_times), d, d)
    terminal: np.ndarray                   # (d, d) final-generation terminal matrix
    cauchy_tol_met: bool
    converged_at: int | None
    convention: str = Q0_CONVENTION
    qv_paths: dict = field(default_factory=dict)  # generation -> (times, (len, d, d))

    @property
    def frobenius_terminal(self) -> float:
        """``|[S]_T|``: Frobenius norm of the terminal matrix estimate."""
        return float(np.sqrt(np.sum(self.terminal ** 2)))

    def limit_at(self, t: float, side: str = "right") -> np.ndarray:
        """Limit-estimate matrix at time t (step semantics on the stored grid)."""
        idx = int(np.searchsorted(self.limit_times, t, side=side)) - 1
        return self.limit_values[max(idx, 0)]


def qv_limit(path: Path, n_max: int, tol: float = 1e-8,
             keep_generations: bool = True) -> QVReport:
    """Compute ``Q^{i,j,n}`` for n = 1..n_max on the common evaluation grid.

    The grid is the union of event times and every generation's partition
    times, which makes the sup-norms ``z_sup`` exact for step paths (and for
    linear paths too: ``Z^n`` is affine between consecutive grid points).
    """
    if tol <= 0:
        raise ContractError("tol must be > 0")
    d = path.dim
    partitions = {n: _partition_for(path, n) for n in range(1, n_max + 1)}
    grid = np.unique(np.concatenate([path.times]
                                    + [partitions[n].times for n in partitions]))
    vals = path.eval(grid)

    pairs = [(a, b) for a in range(d) for b in range(a, d)]
    prev = {pair: np.zeros(len(grid)) for pair in pairs}
    z_sup = np.empty(n_max)
    qv_terminal = np.empty((n_max, d, d))
    qv_paths: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    last_curves = None

    for n in range(1, n_max + 1):
        pos = _positions(grid, partitions[n].times)
        cur = {}
        worst = 0.0
        for (a, b) in pairs:
            va = np.ascontiguousarray(vals[:, a])
            vb = np.ascontiguousarray(vals[:, b])
            q = K.qv_on_grid(va, vb, pos)
            cur[(a, b)] = q
            worst = max(worst, float(np.max(np.abs(q - prev[(a, b)]))))
        z_sup[n - 1] = worst
        for (a, b) in pairs:
            qv_terminal[n - 1, a, b] = qv_terminal[n - 1, b, a] = cur[(a, b)][-1]
        if keep_generations or n == n_max:
            ppos = _positions(grid, partitions[n].times)
            qp = np.empty((len(ppos), d, d))
            for (a, b) in pairs:
                qp[:, a, b] = qp[:, b, a] = cur[(a, b)][ppos]
            qv_paths[n] = (partitions[n].times, qp)
        prev = cur
        last_curves = cur

    limit_times = partitions[n_max].times
    lpos = _positions(grid, limit_times)
    limit_values = np.empty((len(limit_times), d, d))
    for (a, b) in pairs:
        limit_values[:, a, b] = limit_values[:, b, a] = last_curves[(a, b)][lpos]

    converged_at = None
    for n in range(2, n_max + 1):
        if z_sup[n - 1] < tol:
            converged_at = n
            break

    return QVReport(
        dim=d, n_max=n_max, tol=tol,
        generations=list(range(1, n_max + 1)),
        z_sup=z_sup, qv_terminal=qv_terminal,
        limit_times=limit_times, limit_values=limit_values,
        terminal=qv_terminal[n_max - 1].copy(),
        cauchy_tol_met=bool(z_sup[n_max - 1] < tol),
        converged_at=converged_at,
        qv_paths=qv_paths if keep_generations else {n_max: qv_paths.get(n_max)},
    )


# ---------------------------------------------------------------------------
# Z / K processes and the sigma stopping time (1-d convergence machinery)
# ---------------------------------------------------------------------------

def _z_data(path: Path, n: int, extra_times=()):
    """Grid, Z values on grid, and the generation-n partition positions."""
    if path.dim != 1:
        raise ContractError("Z/K processes are defined for 1-d paths")
    pn = lebesgue_partition_1d(path, n)
    pieces = [path.times, pn.times, np.asarray(extra_times, dtype=np.float64)]
    if n >= 2:
        pn1 = lebesgue_partition_1d(path, n - 1)
        pieces.append(pn1.times)
    grid = np.unique(np.concatenate(pieces))
    v = np.ascontiguousarray(path.eval(grid)[:, 0])
    qn = K.qv_on_grid(v, v, _positions(grid, pn.times))
    if n >= 2:
        qn1 = K.qv_on_grid(v, v, _positions(grid, pn1.times))
    else:
        qn1 = np.zeros_like(qn)
    return grid, qn - qn1, pn


def z_process(path: Path, n: int, t: float) -> float:
    """``Z^n_t = Q^n_t - Q^{n-1}_t`` (with ``Q^0 := 0``)."""
    grid, z, _ = _z_data(path, n, extra_times=[t])
    return float(z[np.searchsorted(grid, t)])


def k_constant(n: int, K_bound: int, psi: PsiSpec) -> float:
    """``n^4 2^{-2n} + 2^{-n+5} (K + psi(K))^2``."""
    return float(n) ** 4 * 2.0 ** (-2 * n) \
        + 2.0 ** (-n + 5) * (K_bound + float(psi(float(K_bound)))) ** 2


def k_process(path: Path, n: int, K_bound: int, psi: PsiSpec, t: float) -> float:
    """Compensated square of Z^n at time t.

    ``n^4 2^{-2n} + 2^{-n+5}(K+psi(K))^2 + (Z^n_t)^2 - sum_k (dZ along pi_n)^2``.
    """
    if K_bound < 1:
        raise ContractError("K must be a positive integer")
    grid, z, pn = _z_data(path, n, extra_times=[t])
    sumsq = K.qv_on_grid(z, z, _positions(grid, pn.times))
    it = int(np.searchsorted(grid, t))
    return k_constant(n, K_bound, psi) + float(z[it]) ** 2 - float(sumsq[it])


def sigma_n_K(path: Path, n: int, K_bound: int) -> float:
    """First partition time where the Z-increment budget or level K is breached.

    Returns the earlier of the first generation-n partition time with
    accumulated squared Z-increments above ``n^4 2^{-2n}`` and the first one
    with ``Z^n > K``; ``inf`` if neither occurs.
    """
    if K_bound < 1:
        raise ContractError("K must be a positive integer")
    grid, z, pn = _z_data(path, n)
    z_at_tau = z[_positions(grid, pn.times)]
    if len(pn.times) < 2:
        return SENTINEL
    acc = np.cumsum(np.diff(z_at_tau) ** 2)
    threshold = float(n) ** 4 * 2.0 ** (-2 * n)
    hit_acc = np.flatnonzero(acc > threshold)
    hit_z = np.flatnonzero(z_at_tau[1:] > K_bound)
    t_acc = pn.times[hit_acc[0] + 1] if hit_acc.size else SENTINEL
    t_z = pn.times[hit_z[0] + 1] if hit_z.size else SENTINEL
    return float(min(t_acc, t_z))


# ---------------------------------------------------------------------------
# Jump identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpIdentityReport:
    ok: bool
    max_discrepancy: float
    tolerance: float


def jump_identity_check(path: Path, report: QVReport, tolerance: float = 1e-9) -> JumpIdentityReport:
    """Verify ``jump of [S] at t = (jump of S at t) (outer product)`` at events.

    Exact for step paths once the final generation isolates every jump; for
    linear paths both sides vanish identically.
    """
    if path.mode != MODE_STEP:
        return JumpIdentityReport(ok=True, max_discrepancy=0.0, tolerance=tolerance)
    grid = np.unique(np.concatenate([path.times, report.limit_times]))
    vals = path.eval(grid)
    pos = _positions(grid, report.limit_times)
    d = path.dim
    worst = 0.0
    curves = {}
    for a in range(d):
        for b in range(a, d):
            va = np.ascontiguousarray(vals[:, a])
            vb = np.ascontiguousarray(vals[:, b])
            curves[(a, b)] = K.qv_on_grid(va, vb, pos)
    event_idx = np.searchsorted(grid, path.times[1:])
    dv = np.diff(path.values, axis=0)
    for e, g in enumerate(event_idx):
        for (a, b), q in curves.items():
            lhs = q[g] - q[g - 1]
            rhs = dv[e, a] * dv[e, b]
            worst = max(worst, abs(lhs - rhs))
    return JumpIdentityReport(ok=worst <= tolerance, max_discrepancy=worst, tolerance=tolerance)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def write_qv_report(report: QVReport, json_file, csv_file=None):
    """JSON diagnostics plus optional CSV of the limit matrix path."""
    obj = {
        "dim": report.dim,
        "n_max": report.n_max,
        "tol": report.tol,
        "convention": report.convention,
        "cauchy_tol_met": report.cauchy_tol_met,
        "converged_at": report.converged_at,
        "terminal": report.terminal.tolist(),
        "frobenius_terminal": report.frobenius_terminal,
        "generations": [
            {"n": n, "z_sup": float(report.z_sup[n - 1])}
            for n in report.generations
        ],
    }
    with open(json_file, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if csv_file is not None:
        d = report.dim
        header = "t," + ",".join(f"qv_{a + 1}{b + 1}" for a in range(d) for b in range(d))
        with open(csv_file, "w") as fh:
            fh.write(header + "\n")
            for k in range(len(report.limit_times)):
                row = [repr(float(report.limit_times[k]))]
                row += [repr(float(report.limit_values[k, a, b]))
                        for a in range(d) for b in range(d)]
                fh.write(",".join(row) + "\n")
