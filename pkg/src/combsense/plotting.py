"""Static figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .frontend import CombLines  # noqa: E402
from .reconstruction import ReconstructedSpectrum  # noqa: E402
from .reconstruction.detection import SweepResult  # noqa: E402
from .signals import SpectrumGrid  # noqa: E402

# fixed metadata keeps PNG output byte-stable between runs
_META = {"Software": None}


def _dbm(values: np.ndarray, impedance: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.abs(values) ** 2 / impedance / 1e-3)


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def plot_comb(comb: CombLines, path, window_db: float = 5.0) -> Path:
    power = np.abs(comb.weights) ** 2
    keep = power > 0
    with np.errstate(divide="ignore"):
        rel = 10.0 * np.log10(power / power.max())
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.vlines(comb.k[keep], -80, rel[keep], color="tab:blue", lw=1.5)
    ax.axhline(-window_db, color="tab:red", ls="--", lw=1, label=f"-{window_db:g} dB")
    ax.set_ylim(-80, 3)
    ax.set_xlabel("line index k")
    ax.set_ylabel("relative power (dB)")
    ax.set_title(f"comb lines, {comb.flat_count(window_db)} within {window_db:g} dB")
    ax.legend(loc="lower right")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_spectra(
    x_true: SpectrumGrid,
    measured: SpectrumGrid,
    estimate: ReconstructedSpectrum,
    path,
    threshold: Optional[float] = None,
) -> Path:
    """Input, down-converted and reconstructed spectra plus the error."""
    n = estimate.values.size
    start = x_true.index(0.0)
    truth = np.asarray(x_true.values[start : start + n])
    f_ghz = estimate.freqs / 1e9
    floor = -140.0

    fig, axes = plt.subplots(4, 1, figsize=(8, 9))
    axes[0].plot(f_ghz, np.maximum(_dbm(truth, x_true.impedance), floor), lw=0.6)
    axes[0].set_title("input spectrum")
    axes[1].plot(measured.freqs / 1e9, np.maximum(measured.bin_power_dbm(), floor), lw=0.6, color="tab:green")
    axes[1].set_title("down-converted spectrum")
    axes[1].set_xlabel("frequency (GHz)")
    est_dbm = estimate.bin_power_dbm()
    sup = estimate.values != 0
    axes[2].vlines(f_ghz[sup], floor, est_dbm[sup], lw=0.6, color="tab:orange")
    axes[2].set_title("reconstructed spectrum")
    err = _dbm(truth - estimate.values, estimate.impedance)
    axes[3].plot(f_ghz, np.maximum(err, floor), lw=0.6, color="tab:red")
    axes[3].set_title("reconstruction error")
    for ax in (axes[0], axes[2], axes[3]):
        ax.set_xlim(0, estimate.span / 1e9)
        ax.set_xlabel("frequency (GHz)")
    for ax in axes:
        ax.set_ylabel("power (dBm)")
        ax.set_ylim(floor, 20)
    if threshold is not None:
        axes[2].axhline(threshold, color="k", ls="--", lw=0.8)
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_sweep(result: SweepResult, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(result.snr, result.rate, "o-")
    ax.axhline(result.required_rate, color="tab:red", ls="--", lw=1)
    if np.isfinite(result.limit):
        ax.axvline(result.limit, color="tab:gray", ls=":", lw=1)
    ax.set_xlabel("probe SNR (dB)")
    ax.set_ylabel("detection rate")
    ax.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    return _save(fig, Path(path))
