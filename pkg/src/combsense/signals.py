"""Sampled waveforms, spectra and the transforms between them.

Conventions used throughout the package:

* Spectra are two-sided and stored in ascending-frequency order, bin ``m``
  sitting at ``center + (m - n // 2) * resolution``.
* The forward transform is scaled by ``1/n`` so a unit complex tone on a grid
  frequency produces a single bin of magnitude 1, and
  ``sum(|X|**2) == mean(|x|**2)``.
* Electrical quantities are volts into a 50 ohm reference; optical envelopes
  are normalised so ``|E|**2`` is power in watts (reference impedance 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

REFERENCE_IMPEDANCE = 50.0
DBM_FLOOR = -400.0

OPTICAL = "optical_envelope"
BASEBAND = "electrical_baseband"
_DOMAINS = (OPTICAL, BASEBAND)


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watts_to_dbm(watts: float) -> float:
    """Convert power to dBm; zero power maps to ``-inf``."""
    if watts <= 0.0:
        return -math.inf
    return 10.0 * math.log10(watts / 1e-3)


def format_dbm(dbm: float) -> str:
    if not math.isfinite(dbm) or dbm < DBM_FLOOR:
        return f"below {DBM_FLOOR:g} dBm"
    return f"{dbm:.2f} dBm"


def on_grid(freq: float, resolution: float, rel_tol: float = 1e-9) -> bool:
    """True when ``freq`` is an integer multiple of ``resolution``."""
    ratio = freq / resolution
    return abs(ratio - round(ratio)) <= rel_tol * max(1.0, abs(ratio))


def grid_index(freq: float, resolution: float) -> int:
    return int(round(freq / resolution))


@dataclass(frozen=True)
class SimulationGrid:
    """Uniform complex-envelope time grid shared by every stage of the chain."""

    sim_rate: float = 160e9
    n_samples: int = 128_000

    def __post_init__(self):
        if not self.sim_rate > 0:
            raise ValueError("sim_rate must be positive")
        if int(self.n_samples) != self.n_samples or self.n_samples <= 0:
            raise ValueError("n_samples must be a positive integer")
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @property
    def resolution(self) -> float:
        return self.sim_rate / self.n_samples

    @property
    def capture_time(self) -> float:
        return self.n_samples / self.sim_rate

    def time(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sim_rate

    def bins(self, freq: float, what: str = "frequency") -> int:
        """Grid index of ``freq``; raises if it is not on the analysis grid."""
        if not on_grid(freq, self.resolution):
            raise ValueError(f"{what} not on analysis grid")
        return grid_index(freq, self.resolution)

    def check_aligned(self, freq: float, what: str = "frequency") -> None:
        self.bins(freq, what)

    def tone_phase(self, freq: float, phase: float = 0.0) -> np.ndarray:
        """Phase ``2*pi*freq*t + phase`` computed in exact integer arithmetic.

        Keeps records bit-exactly periodic over the capture window for
        on-grid frequencies.
        """
        m = self.bins(freq)
        idx = (np.arange(self.n_samples, dtype=np.int64) * m) % self.n_samples
        return 2.0 * np.pi * idx / self.n_samples + phase


@dataclass(frozen=True)
class RealWaveform:
    samples: np.ndarray
    rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if np.iscomplexobj(arr):
            raise TypeError("RealWaveform samples must be real")
        arr = _frozen(arr, np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite sample")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    def __add__(self, other: "RealWaveform") -> "RealWaveform":
        if other.rate != self.rate or len(other) != len(self):
            raise ValueError("waveform rate/length mismatch")
        return RealWaveform(self.samples + other.samples, self.rate)

    def mean_square(self) -> float:
        return float(np.mean(self.samples**2))

    def power_dbm(self, impedance: float = REFERENCE_IMPEDANCE) -> float:
        return watts_to_dbm(self.mean_square() / impedance)


@dataclass(frozen=True)
class ComplexEnvelope:
    samples: np.ndarray
    rate: float
    domain: str = BASEBAND

    def __post_init__(self):
        arr = _frozen(self.samples, np.complex128)
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite sample")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.domain not in _DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples, domain: Optional[str] = None) -> "ComplexEnvelope":
        return ComplexEnvelope(samples, self.rate, domain or self.domain)


Waveform = Union[RealWaveform, ComplexEnvelope]


@dataclass(frozen=True)
class SpectrumGrid:
    """Complex two-sided spectrum on a uniform grid."""

    values: np.ndarray
    resolution: float
    center: float = 0.0
    two_sided: bool = True
    domain: str = BASEBAND
    impedance: float = REFERENCE_IMPEDANCE
    rate: Optional[float] = None  # sample rate of the source record, if known

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, np.complex128))
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    def __len__(self):
        return self.values.size

    @property
    def freqs(self) -> np.ndarray:
        n = self.values.size
        offset = n // 2 if self.two_sided else 0
        return self.center + (np.arange(n) - offset) * self.resolution

    def index(self, freq: float) -> int:
        n = self.values.size
        offset = n // 2 if self.two_sided else 0
        m = grid_index(freq - self.center, self.resolution) + offset
        if not 0 <= m < n:
            raise IndexError(f"frequency {freq:g} Hz outside spectrum")
        return m

    def at(self, freq) -> np.ndarray:
        freq = np.atleast_1d(np.asarray(freq, dtype=float))
        return self.values[[self.index(f) for f in freq]]

    def bin_power(self) -> np.ndarray:
        """Per-bin power in watts."""
        return np.abs(self.values) ** 2 / self.impedance

    def bin_power_dbm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.bin_power() / 1e-3)

    def mean_square(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


def dft_forward(w: Waveform, window: Optional[str] = None) -> SpectrumGrid:
    """Two-sided unit-tone-normalised DFT of a waveform.

    ``window="hann"`` applies a Hann taper normalised to unit coherent gain;
    Parseval no longer holds exactly in that case.
    """
    x = np.asarray(w.samples)
    n = x.size
    if n == 0:
        raise ValueError("empty waveform")
    if window is None:
        spec = np.fft.fft(x) / n
    elif window == "hann":
        taper = np.hanning(n + 1)[:-1]
        spec = np.fft.fft(x * taper) / taper.sum()
    else:
        raise ValueError(f"unknown window {window!r}")
    if isinstance(w, ComplexEnvelope):
        domain = w.domain
    else:
        domain = BASEBAND
    impedance = 1.0 if domain == OPTICAL else REFERENCE_IMPEDANCE
    return SpectrumGrid(
        np.fft.fftshift(spec), w.rate / n, 0.0, True, domain, impedance, float(w.rate)
    )


def dft_inverse(s: SpectrumGrid) -> ComplexEnvelope:
    if not s.two_sided:
        raise ValueError("inverse transform needs a two-sided spectrum")
    n = s.values.size
    if n == 0:
        raise ValueError("empty spectrum")
    samples = np.fft.ifft(np.fft.ifftshift(s.values)) * n
    if s.center:
        t = np.arange(n) / (n * s.resolution)
        samples = samples * np.exp(2j * np.pi * s.center * t)
    rate = s.rate if s.rate is not None else n * s.resolution
    return ComplexEnvelope(samples, rate, s.domain)


FrequencyResponse = Callable[[np.ndarray], np.ndarray]


def apply_freq_response(e: Waveform, h: FrequencyResponse) -> ComplexEnvelope:
    """Filter ``e`` by the frequency response ``h`` evaluated on [-rate/2, rate/2)."""
    x = np.asarray(e.samples)
    n = x.size
    f = np.fft.fftfreq(n, d=1.0 / e.rate)
    gain = np.broadcast_to(np.asarray(h(f), dtype=np.complex128), f.shape)
    y = np.fft.ifft(np.fft.fft(x) * gain)
    domain = e.domain if isinstance(e, ComplexEnvelope) else BASEBAND
    return ComplexEnvelope(y, e.rate, domain)


def brick_wall(cutoff: float) -> FrequencyResponse:
    """Ideal rectangular low-pass passing ``|f| < cutoff``."""

    def h(f):
        return (np.abs(f) < cutoff).astype(float)

    return h


def single_pole(bandwidth: float) -> FrequencyResponse:
    """First-order low-pass with its -3 dB point at ``bandwidth``."""

    def h(f):
        return 1.0 / (1.0 + 1j * np.asarray(f) / bandwidth)

    return h


BandArg = Union[None, int, Tuple[float, float], Sequence[int]]


def power_dbm(s: SpectrumGrid, band: BandArg = None) -> float:
    """Integrated power of a spectrum in dBm.

    ``band`` may be ``None`` (whole spectrum), a bin index, a sequence of bin
    indices, or an inclusive ``(f_lo, f_hi)`` frequency pair.
    """
    p = s.bin_power()
    if band is None:
        sel = p
    elif isinstance(band, (int, np.integer)):
        sel = p[[int(band)]]
    elif isinstance(band, tuple) and len(band) == 2 and all(
        isinstance(b, float) for b in band
    ):
        lo, hi = band
        f = s.freqs
        eps = 1e-6 * s.resolution
        sel = p[(f >= lo - eps) & (f <= hi + eps)]
    else:
        sel = p[np.asarray(band, dtype=int)]
    if sel.size == 0:
        raise ValueError("empty band")
    return watts_to_dbm(float(np.sum(sel)))
