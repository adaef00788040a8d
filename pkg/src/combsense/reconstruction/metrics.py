"""Quality metrics for a reconstructed spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..signals import REFERENCE_IMPEDANCE, SpectrumGrid
from .coset import MatrixSpec
from .spectrum import ReconstructedSpectrum, one_sided

Interval = Tuple[float, float]


@dataclass(frozen=True)
class DetectedBand:
    center: float
    width: float
    peak_dbm: float
    lo: float
    hi: float

    def contains(self, f: float) -> bool:
        return self.lo <= f <= self.hi


@dataclass(frozen=True)
class Metrics:
    e_r: float
    e_r_downconverted: float
    sfdr: float
    sfdr_all_spurs: float
    detected_bands: Tuple[DetectedBand, ...]
    spurious_count: int


def _as_one_sided(x, span: float) -> np.ndarray:
    if isinstance(x, ReconstructedSpectrum):
        return np.asarray(x.values)
    if isinstance(x, SpectrumGrid):
        return one_sided(x, span)
    return np.asarray(x, dtype=complex)


def relative_error(
    x_true: Union[SpectrumGrid, ReconstructedSpectrum],
    x_hat: ReconstructedSpectrum,
) -> float:
    """``||X - X_hat|| / ||X||`` over the one-sided grid (0, span); DC excluded."""
    if x_true.resolution != x_hat.resolution:
        if not math.isclose(x_true.resolution, x_hat.resolution, rel_tol=1e-12):
            raise ValueError("spectra are on different grids")
    truth = _as_one_sided(x_true, x_hat.span)[1:]
    est = np.asarray(x_hat.values)[1:]
    norm = np.linalg.norm(truth)
    if norm == 0:
        raise ValueError("zero-norm reference spectrum")
    return float(np.linalg.norm(truth - est) / norm)


def band_intervals(bands) -> List[Interval]:
    """Occupied intervals of BandSpec-like objects (anything with ``edges``)."""
    return [tuple(b.edges) if hasattr(b, "edges") else tuple(b) for b in bands]


def _in_any(freqs: np.ndarray, intervals: Sequence[Interval]) -> np.ndarray:
    mask = np.zeros(freqs.shape, dtype=bool)
    for lo, hi in intervals:
        mask |= (freqs >= lo) & (freqs <= hi)
    return mask


def coset_offset(freqs: np.ndarray, spacing: float, resolution: float) -> np.ndarray:
    """Offset index in ``[0, spacing/2]`` (in bins) of each frequency."""
    period = int(round(spacing / resolution))
    idx = np.rint(np.asarray(freqs) / resolution).astype(np.int64) % period
    return np.minimum(idx, period - idx)


def detected_bands(x_hat: ReconstructedSpectrum, gap_bins: int = 2) -> List[DetectedBand]:
    """Merge supported bins into bands, bridging gaps of up to ``gap_bins`` bins.

    Band centres are power-weighted centroids.
    """
    idx = np.flatnonzero(x_hat.values)
    if idx.size == 0:
        return []
    r = x_hat.resolution
    power = np.abs(x_hat.values) ** 2
    pdbm = x_hat.bin_power_dbm()
    groups = np.split(idx, np.flatnonzero(np.diff(idx) > gap_bins + 1) + 1)
    out = []
    for g in groups:
        w = power[g]
        center = float(np.sum(g * w) / np.sum(w)) * r
        out.append(
            DetectedBand(
                center=center,
                width=float((g[-1] - g[0] + 1) * r),
                peak_dbm=float(pdbm[g].max()),
                lo=float(g[0] * r),
                hi=float(g[-1] * r),
            )
        )
    return out


def spurious_bins(x_hat: ReconstructedSpectrum, intervals: Sequence[Interval]) -> np.ndarray:
    """Supported frequencies outside every true band."""
    sup = x_hat.support
    return sup[~_in_any(sup, intervals)]


def sfdr_report(
    x_hat: ReconstructedSpectrum,
    x_true: SpectrumGrid,
    intervals: Sequence[Interval],
    spacing: float = 1e9,
    exclude_reconstruction_spurs: bool = True,
) -> float:
    """Strongest true-band bin minus the strongest reconstructed spur, in dB.

    With ``exclude_reconstruction_spurs`` a spur is ignored when it sits on a
    coset offset that also carries true-band energy: such components are
    leakage from the fit of that band rather than independent spurious
    signals. Returns ``inf`` when no spur remains.
    """
    if x_hat.support.size == 0:
        raise ValueError("empty support")
    truth = one_sided(x_true, x_hat.span)
    freqs = x_hat.freqs
    in_band = _in_any(freqs, intervals)
    if not in_band.any():
        raise ValueError("no true band inside the grid")
    with np.errstate(divide="ignore"):
        truth_dbm = 10 * np.log10(np.abs(truth) ** 2 / REFERENCE_IMPEDANCE / 1e-3)
    peak = float(truth_dbm[in_band].max())

    spurs = spurious_bins(x_hat, intervals)
    if exclude_reconstruction_spurs and spurs.size:
        band_offsets = set(
            coset_offset(freqs[in_band & (np.abs(truth) > 0)], spacing, x_hat.resolution)
        )
        spur_off = coset_offset(spurs, spacing, x_hat.resolution)
        spurs = spurs[[o not in band_offsets for o in spur_off]]
    if spurs.size == 0:
        return math.inf
    pdbm = x_hat.bin_power_dbm()
    idx = np.rint(spurs / x_hat.resolution).astype(int)
    return peak - float(pdbm[idx].max())


def predict_measurement(
    x_hat: ReconstructedSpectrum, m: MatrixSpec, measured: SpectrumGrid
) -> np.ndarray:
    """Forward model of the estimate on the measured grid (equalised units)."""
    r = x_hat.resolution
    n = x_hat.values.size
    two = np.zeros(2 * n - 1, dtype=complex)  # bins -(n-1) .. (n-1)
    two[n - 1 :] = x_hat.values
    two[: n - 1] = np.conj(x_hat.values[1:][::-1])
    nu_idx = np.rint(measured.freqs / r).astype(np.int64)
    period = int(round(m.spacing / r))
    out = np.zeros(nu_idx.size, dtype=complex)
    for k, s_k in zip(m.comb.k, m.comb.weights):
        if s_k == 0:
            continue
        src = nu_idx - k * period + (n - 1)
        ok = (src >= 0) & (src < two.size)
        out[ok] += s_k * two[src[ok]]
    return m.scale * out


def downconverted_error(
    x_hat: ReconstructedSpectrum, m: MatrixSpec, measured: SpectrumGrid
) -> float:
    """Relative mismatch between the measured and re-predicted down-converted spectrum."""
    f = measured.freqs
    band = np.abs(f) < m.lpf_cutoff - 1e-6 * measured.resolution
    y = np.asarray(measured.values)
    if m.equalizer is not None:
        y = y / m.equalizer(f)
    pred = predict_measurement(x_hat, m, measured)
    norm = np.linalg.norm(y[band])
    if norm == 0:
        raise ValueError("zero measured spectrum")
    return float(np.linalg.norm(y[band] - pred[band]) / norm)


def evaluate(
    x_hat: ReconstructedSpectrum,
    x_true: SpectrumGrid,
    intervals: Sequence[Interval],
    m: MatrixSpec,
    measured: SpectrumGrid,
) -> Metrics:
    """All scalar metrics; undefined values are NaN."""
    try:
        e_r = relative_error(x_true, x_hat)
    except ValueError:
        e_r = math.nan
    try:
        e_dc = downconverted_error(x_hat, m, measured)
    except ValueError:
        e_dc = math.nan
    if x_hat.support.size and intervals:
        sfdr = sfdr_report(x_hat, x_true, intervals, m.spacing, True)
        sfdr_all = sfdr_report(x_hat, x_true, intervals, m.spacing, False)
    else:
        sfdr = sfdr_all = math.nan
    return Metrics(
        e_r=e_r,
        e_r_downconverted=e_dc,
        sfdr=sfdr,
        sfdr_all_spurs=sfdr_all,
        detected_bands=tuple(detected_bands(x_hat)),
        spurious_count=int(spurious_bins(x_hat, intervals).size),
    )
