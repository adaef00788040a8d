"""CSV and plain-text report writers.

Floats are written with 17 significant digits so that reading a file back
reproduces the in-memory values exactly.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from .frontend import CombLines
from .signals import SpectrumGrid

PathLike = Union[str, Path]


def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _dbm(power_w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power_w / 1e-3)


def write_table(path: PathLike, header: Sequence[str], columns: Sequence[Iterable]) -> Path:
    """Write equally long columns; floats use :func:`fmt_float`."""
    path = Path(path)
    cols = [list(c) for c in columns]
    n = {len(c) for c in cols}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([v if isinstance(v, (int, np.integer, str)) else fmt_float(v) for v in row])
    return path


def read_table(path: PathLike) -> Dict[str, np.ndarray]:
    """Read a table written by :func:`write_table` into float columns."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.zeros((0, len(header)))
    return {h: data[:, i] for i, h in enumerate(header)}


def write_spectrum(
    path: PathLike,
    freqs: np.ndarray,
    values: np.ndarray,
    impedance: float,
) -> Path:
    """Spectrum as ``frequency_hz, re, im, power_dbm``."""
    values = np.asarray(values, dtype=complex)
    power = np.abs(values) ** 2 / impedance
    return write_table(
        path,
        ["frequency_hz", "re", "im", "power_dbm"],
        [np.asarray(freqs, dtype=float), values.real, values.imag, _dbm(power)],
    )


def write_grid(path: PathLike, s: SpectrumGrid) -> Path:
    return write_spectrum(path, s.freqs, s.values, s.impedance)


def read_spectrum(path: PathLike):
    """Returns ``(freqs, complex values)`` from a spectrum CSV."""
    t = read_table(path)
    return t["frequency_hz"], t["re"] + 1j * t["im"]


def write_comb(path: PathLike, comb: CombLines, carrier: float) -> Path:
    """Comb lines as ``k, frequency_thz, magnitude_db, phase_rad, power_dbm``.

    ``magnitude_db`` is relative to the strongest line.
    """
    w = np.asarray(comb.weights)
    power = np.abs(w) ** 2
    ref = power.max() if power.any() else 1.0
    with np.errstate(divide="ignore"):
        rel = 10.0 * np.log10(power / ref)
    freq_thz = (carrier + comb.k * comb.spacing) / 1e12
    return write_table(
        path,
        ["k", "frequency_thz", "magnitude_db", "phase_rad", "power_dbm"],
        [[int(k) for k in comb.k], freq_thz, rel, np.angle(w), _dbm(power)],
    )


def write_report(path: PathLike, lines: List[str]) -> Path:
    path = Path(path)
    path.write_text("".join(line + "\n" for line in lines))
    return path
