"""Sparse solvers for coset systems: orthogonal matching pursuit and exhaustive L0 search.

Both solvers work on column groups so that the real-form degenerate systems
(two real columns per unknown) are handled by the same code as the complex
ones. ``residual_tol`` is a bound on the squared residual norm.
"""

from __future__ import annotations

import warnings
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from .coset import CosetSystem

MAX_EXHAUSTIVE = 3
_RANK_RTOL = 1e-10


class RankDeficiencyWarning(RuntimeWarning):
    pass


def _residual_power(a: np.ndarray, y: np.ndarray, x: np.ndarray) -> float:
    r = y - a @ x
    return float(np.vdot(r, r).real)


def _full_rank(sub: np.ndarray) -> bool:
    sv = np.linalg.svd(sub, compute_uv=False)
    return sv.size > 0 and sv[-1] > _RANK_RTOL * sv[0]


def solve_omp(
    s: CosetSystem, max_support: int, residual_tol: float = 0.0
) -> np.ndarray:
    """Greedy sparse fit of ``s.y`` by the columns of ``s.a``.

    Each iteration adds the unknown whose column span captures the most
    residual energy, then refits all selected unknowns by least squares.
    Stops when the squared residual drops to ``residual_tol`` or
    ``max_support`` unknowns are active. A candidate that makes the selected
    submatrix rank deficient is dropped with a :class:`RankDeficiencyWarning`.
    """
    if max_support > s.n_rows:
        raise ValueError("max_support exceeds the number of measurements")
    a, y = s.a, s.y
    coef = np.zeros(a.shape[1], dtype=a.dtype)
    y_pow = float(np.vdot(y, y).real)
    if y_pow == 0.0 or y_pow <= residual_tol:
        return coef

    cols = s.group_columns()
    bases = [np.linalg.qr(a[:, c])[0] for c in cols]
    chosen: List[int] = []
    banned = set()
    r = y
    x_s = np.zeros(0, dtype=a.dtype)
    while len(chosen) < max_support:
        best, best_score = -1, 0.0
        for g, q in enumerate(bases):
            if g in banned or g in chosen:
                continue
            proj = q.conj().T @ r
            score = float(np.vdot(proj, proj).real)
            if score > best_score:
                best, best_score = g, score
        if best < 0 or best_score <= 1e-30 * y_pow:
            break
        trial = chosen + [best]
        idx = np.concatenate([cols[g] for g in trial])
        sub = a[:, idx]
        if not _full_rank(sub):
            warnings.warn(
                f"dropping unknown {best} at offset {s.f_offset:g} Hz: rank deficient",
                RankDeficiencyWarning,
                stacklevel=2,
            )
            banned.add(best)
            continue
        x_s = np.linalg.lstsq(sub, y, rcond=None)[0]
        chosen = trial
        r = y - sub @ x_s
        if float(np.vdot(r, r).real) <= residual_tol:
            break
    if chosen:
        idx = np.concatenate([cols[g] for g in chosen])
        coef[idx] = x_s
    return coef


def _batched_fit(
    a: np.ndarray, y: np.ndarray, col_sets: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares fits for a batch of equally sized column sets.

    Returns coefficients, squared residuals and a full-rank mask.
    """
    sub = np.moveaxis(a[:, col_sets], 1, 0)  # (batch, rows, width)
    u, sv, vh = np.linalg.svd(sub, full_matrices=False)
    ok = sv[:, -1] > _RANK_RTOL * sv[:, 0]
    uy = np.einsum("bri,r->bi", u.conj(), y)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(sv > 0, uy / sv, 0.0)
    x = np.einsum("bij,bi->bj", vh.conj(), w)
    fit = np.einsum("brw,bw->br", sub, x)
    res = np.sum(np.abs(y[None, :] - fit) ** 2, axis=1)
    return x, res, ok


def _size_table(
    s: CosetSystem, size: int
) -> List[Tuple[Tuple[int, ...], float, np.ndarray]]:
    """Full-rank supports of exactly ``size`` unknowns with their LS residuals."""
    y = s.y
    if size == 0:
        return [((), float(np.vdot(y, y).real), np.zeros(0, dtype=s.a.dtype))]
    cols = s.group_columns()
    by_width = {}
    for sup in combinations(range(s.n_unknowns), size):
        idx = np.concatenate([cols[g] for g in sup])
        by_width.setdefault(idx.size, []).append((sup, idx))
    rows = []
    for entries in by_width.values():
        col_sets = np.array([idx for _, idx in entries])
        x, res, ok = _batched_fit(s.a, y, col_sets)
        for (sup, _), xi, ri, oki in zip(entries, x, res, ok):
            if oki:
                rows.append((sup, float(ri), xi))
    rows.sort(key=lambda t: t[0])
    return rows


def exhaustive_table(
    s: CosetSystem, s_max: int
) -> List[Tuple[Tuple[int, ...], float, np.ndarray]]:
    """Every full-rank support of size <= ``s_max`` with its LS residual."""
    table = []
    for size in range(0, s_max + 1):
        table.extend(_size_table(s, size))
    return table


def _pick(rows, tie: float):
    """Smallest residual, then smallest support, then lexicographic order."""
    floor = min(t[1] for t in rows)
    near = [t for t in rows if t[1] <= floor + tie]
    size = min(len(t[0]) for t in near)
    same = [t for t in near if len(t[0]) == size]
    floor = min(t[1] for t in same)
    return min((t for t in same if t[1] <= floor + tie), key=lambda t: t[0])


def solve_exhaustive_l0(
    s: CosetSystem, s_max: int, residual_tol: float = 0.0
) -> np.ndarray:
    """Sparsest least-squares fit by enumerating all supports of size <= ``s_max``.

    Sizes are visited in increasing order; the first size whose best squared
    residual is within ``residual_tol`` wins, with its smallest-residual
    support. When no size meets the bound the global least residual is
    returned, ties (to 1e-9 of ``|y|**2``) going to the smaller support and
    then to the lexicographically first one.
    """
    if s_max > MAX_EXHAUSTIVE:
        raise ValueError("exhaustive search bound exceeded")
    s_max = min(s_max, s.n_rows)
    y_pow = float(np.vdot(s.y, s.y).real)
    tie = 1e-9 * y_pow + 1e-300
    seen = []
    choice = None
    for size in range(0, s_max + 1):
        rows = _size_table(s, size)
        if not rows:
            continue
        seen.extend(rows)
        if min(t[1] for t in rows) <= residual_tol:
            choice = _pick(rows, tie)
            break
    if choice is None:
        choice = _pick(seen, tie)
    sup, _, x = choice
    coef = np.zeros(s.a.shape[1], dtype=s.a.dtype)
    if sup:
        cols = s.group_columns()
        coef[np.concatenate([cols[g] for g in sup])] = x
    return coef


def support_of(s: CosetSystem, coef: np.ndarray) -> Tuple[int, ...]:
    """Indices of unknowns with a nonzero coefficient."""
    active = np.zeros(s.n_unknowns, dtype=bool)
    np.logical_or.at(active, s.groups, np.asarray(coef) != 0)
    return tuple(int(i) for i in np.flatnonzero(active))


def residual_power(s: CosetSystem, coef: np.ndarray) -> float:
    return _residual_power(s.a, s.y, coef)


def best_residual_at_size(s: CosetSystem, size: int) -> float:
    """Smallest squared residual over all supports of exactly ``size`` unknowns."""
    rows = _size_table(s, size)
    if not rows:
        raise ValueError(f"no full-rank support of size {size}")
    return min(r for _, r, _ in rows)
