"""Whole-span reconstruction by solving every coset offset independently."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..signals import REFERENCE_IMPEDANCE, SpectrumGrid
from .coset import CosetSystem, MatrixSpec, build_coset_system, build_degenerate_system
from .solvers import residual_power, solve_exhaustive_l0, solve_omp, support_of

SOLVERS = ("omp", "exhaustive")


@dataclass(frozen=True)
class ReconstructedSpectrum:
    """One-sided estimate on ``[0, span)``; bin ``i`` sits at ``i * resolution``.

    Amplitudes follow the two-sided convention of :class:`SpectrumGrid`, so a
    bin's power is ``|X|**2 / 50`` exactly as for the input spectrum.
    """

    values: np.ndarray
    resolution: float
    threshold: float
    unresolved: Tuple[float, ...] = ()
    impedance: float = REFERENCE_IMPEDANCE

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def span(self) -> float:
        return self.values.size * self.resolution

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.values.size) * self.resolution

    @property
    def support(self) -> np.ndarray:
        return self.freqs[self.values != 0]

    @property
    def estimate(self) -> Dict[float, complex]:
        idx = np.flatnonzero(self.values)
        return {float(i * self.resolution): complex(self.values[i]) for i in idx}

    def bin_power_dbm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(np.abs(self.values) ** 2 / self.impedance / 1e-3)

    def with_threshold(self, t: float) -> "ReconstructedSpectrum":
        keep = self.bin_power_dbm() >= t
        return ReconstructedSpectrum(
            np.where(keep, self.values, 0), self.resolution, t, self.unresolved, self.impedance
        )


@dataclass
class BinDiagnostics:
    f_offset: float
    rows: int
    support: Tuple[float, ...]
    residual: float
    measurement_power: float
    degenerate: bool = False
    warnings: List[str] = field(default_factory=list)


def one_sided(x: SpectrumGrid, span: float) -> np.ndarray:
    """Bins ``[0, span)`` of a two-sided spectrum, DC first."""
    n = int(round(span / x.resolution))
    start = x.index(0.0)
    out = np.zeros(n, dtype=complex)
    stop = min(n, x.values.size - start)
    out[:stop] = x.values[start : start + stop]
    return out


def offsets(m: MatrixSpec, resolution: float) -> Tuple[np.ndarray, Tuple[float, float]]:
    """Non-degenerate offsets in ``(0, spacing/2)`` and the two degenerate ones."""
    half = int(round(m.spacing / 2 / resolution))
    return np.arange(1, half) * resolution, (0.0, half * resolution)


def solve_system(
    s: CosetSystem, solver: str, max_support: int, residual_tol: float
) -> np.ndarray:
    k = min(max_support, s.n_rows)
    if solver == "omp":
        return solve_omp(s, k, residual_tol)
    if solver == "exhaustive":
        return solve_exhaustive_l0(s, k, residual_tol)
    raise ValueError(f"unknown solver {solver!r}")


def reconstruct_full(
    measured: SpectrumGrid,
    m: MatrixSpec,
    solver: str = "omp",
    t: float = -88.0,
    noise_power: float = 0.0,
    max_support: int = 4,
    safety_factor: float = 2.0,
    resolve_degenerate: Tuple[bool, bool] = (True, True),
) -> Tuple[ReconstructedSpectrum, List[BinDiagnostics]]:
    """Solve every coset offset, place the estimates, then apply the threshold.

    ``noise_power`` is the expected ``|Y|**2`` noise per measured bin
    (after equalisation); each system stops once its squared residual is
    below ``noise_power * rows * safety_factor``. ``resolve_degenerate``
    selects whether the ``f = 0`` and ``f = spacing/2`` offsets are solved
    (real-form systems) or reported as unresolved.
    """
    r = measured.resolution
    n_out = int(round(m.span / r))
    values = np.zeros(n_out, dtype=complex)
    diags: List[BinDiagnostics] = []
    unresolved: List[float] = []

    regular, degenerate = offsets(m, r)
    jobs = [(f, False) for f in regular]
    for f, on in zip(degenerate, resolve_degenerate):
        if on:
            jobs.append((f, True))
        else:
            unresolved.extend(_coset_members(f, m, n_out, r))

    for f, is_deg in jobs:
        s = (build_degenerate_system if is_deg else build_coset_system)(m, f, measured)
        tol = noise_power * s.n_rows * safety_factor
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            coef = solve_system(s, solver, max_support, tol)
        x = s.to_complex(coef)
        idx = np.rint(s.unknown_freqs / r).astype(int)
        values[idx] = x
        sup = support_of(s, coef)
        diags.append(
            BinDiagnostics(
                f_offset=float(f),
                rows=s.n_rows,
                support=tuple(float(s.unknown_freqs[i]) for i in sup),
                residual=residual_power(s, coef),
                measurement_power=float(np.vdot(s.y, s.y).real),
                degenerate=is_deg,
                warnings=[str(w.message) for w in caught],
            )
        )

    raw = ReconstructedSpectrum(values, r, -math.inf, tuple(sorted(unresolved)))
    return raw.with_threshold(t), diags


def _coset_members(f: float, m: MatrixSpec, n_out: int, r: float) -> List[float]:
    freqs = set()
    j = 0
    while True:
        lo = j * m.spacing - f
        hi = j * m.spacing + f
        if lo >= m.span - r / 2:
            break
        for v in {lo, hi}:
            if 0 < v < m.span - r / 2:
                freqs.add(float(v))
        j += 1
    return sorted(freqs)
