"""Optical front end: electro-optic comb, optical sampling, homodyne I/Q receiver, ADC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .signals import (
    OPTICAL,
    BASEBAND,
    ComplexEnvelope,
    RealWaveform,
    SimulationGrid,
    SpectrumGrid,
    apply_freq_response,
    brick_wall,
    dbm_to_watts,
    dft_forward,
    on_grid,
    single_pole,
)

CLAMP_DB = 200.0


@dataclass(frozen=True)
class LaserSpec:
    power: float = 16.0  # dBm
    frequency: float = 193.1e12
    linewidth: float = 100e3

    def __post_init__(self):
        if not math.isfinite(self.power):
            raise ValueError("laser power must be finite")
        if not self.frequency > 0:
            raise ValueError("laser frequency must be positive")
        if self.linewidth < 0:
            raise ValueError("linewidth must be non-negative")

    @property
    def power_watts(self) -> float:
        return dbm_to_watts(self.power)


@dataclass(frozen=True)
class PmSpec:
    beta0: float = 7.25 * math.pi
    drive_freq: float = 1e9

    def __post_init__(self):
        if not self.drive_freq > 0:
            raise ValueError("drive_freq must be positive")


@dataclass(frozen=True)
class MzmSpec:
    """Intensity modulator.

    The field transfer is ``sqrt(IL) * (a*exp(i*theta) + b*exp(-i*theta))``
    with ``theta = beta1*drive + bias``, ``a + b = 1`` and
    ``(a - b)**2 = 10**(-ER/10)``; an infinite extinction ratio reduces it to
    ``cos(theta)``.
    """

    beta1: float = 0.3 * math.pi
    vpi: float = 4.0
    bias: float = math.pi / 4
    insertion_loss: float = 5.0
    extinction_ratio: float = 30.0
    drive_phase: float = 0.1

    def __post_init__(self):
        if not self.vpi > 0:
            raise ValueError("vpi must be positive")
        if not self.extinction_ratio > 0:
            raise ValueError("extinction_ratio must be positive")
        if not 0 <= self.bias < math.pi:
            raise ValueError("bias must lie in [0, pi)")

    @property
    def arm_weights(self) -> Tuple[float, float]:
        if math.isinf(self.extinction_ratio):
            return 0.5, 0.5
        diff = 10.0 ** (-self.extinction_ratio / 20.0)
        return (1.0 + diff) / 2.0, (1.0 - diff) / 2.0

    @property
    def field_loss(self) -> float:
        return 10.0 ** (-self.insertion_loss / 20.0)

    @property
    def drive_amplitude(self) -> float:
        """RF drive amplitude in volts that realises ``beta1``."""
        return self.beta1 * self.vpi / math.pi

    def transfer(self, theta: np.ndarray) -> np.ndarray:
        a, b = self.arm_weights
        return self.field_loss * (a * np.exp(1j * theta) + b * np.exp(-1j * theta))


@dataclass(frozen=True)
class CombLines:
    """Complex comb-line weights ``S_k`` for ``k`` in ``[k_min, k_max]``."""

    k: np.ndarray
    weights: np.ndarray
    spacing: float

    def __post_init__(self):
        k = np.array(self.k, dtype=np.int64, copy=True)
        w = np.array(self.weights, dtype=np.complex128, copy=True)
        if k.shape != w.shape:
            raise ValueError("k and weights must have the same shape")
        if k.size and np.any(np.diff(k) != 1):
            raise ValueError("k must be a contiguous ascending range")
        k.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "weights", w)

    def __getitem__(self, k) -> np.ndarray:
        """``S_k`` for scalar or array ``k``; zero outside the stored range."""
        k = np.asarray(k, dtype=np.int64)
        out = np.zeros(k.shape, dtype=np.complex128)
        if self.k.size:
            idx = k - self.k[0]
            ok = (idx >= 0) & (idx < self.k.size)
            out[ok] = self.weights[idx[ok]]
        return out if out.ndim else out[()]

    def restrict(self, k_max: int) -> "CombLines":
        ks = np.arange(-k_max, k_max + 1)
        return CombLines(ks, self[ks], self.spacing)

    @property
    def support(self) -> np.ndarray:
        return self.k[self.weights != 0]

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.weights) ** 2))

    def relative_db(self) -> np.ndarray:
        mag = np.abs(self.weights)
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(mag / mag.max())

    def flat_count(self, window_db: float = 5.0, k_range: Optional[int] = None) -> int:
        """Lines within ``window_db`` of the strongest line over ``|k| <= k_range``."""
        ks = self.k if k_range is None else np.arange(-k_range, k_range + 1)
        mag = np.abs(self[ks])
        if not mag.any():
            return 0
        with np.errstate(divide="ignore"):
            rel = 20.0 * np.log10(mag / mag.max())
        return int(np.sum(rel >= -window_db))


@dataclass(frozen=True)
class ReceiverSpec:
    pd_bandwidth: float = 2.5e9
    lpf_cutoff: float = 2e9
    adc_rate: float = 4e9
    adc_bits: Optional[int] = 12  # None for an ideal ADC
    lo_amplitude: Optional[float] = None  # derived from the laser when None
    signal_amplitude_scale: float = 1.0
    differential_delay: float = 0.0
    phase_noise_seed: int = 0

    def __post_init__(self):
        if self.adc_bits == "ideal":
            object.__setattr__(self, "adc_bits", None)
        if self.adc_bits is not None and int(self.adc_bits) < 1:
            raise ValueError("adc_bits must be positive or 'ideal'")
        if self.lpf_cutoff > self.adc_rate / 2:
            raise ValueError("lpf_cutoff must not exceed adc_rate/2")
        if self.pd_bandwidth < self.lpf_cutoff:
            raise ValueError("pd_bandwidth must be at least lpf_cutoff")
        if self.differential_delay < 0:
            raise ValueError("differential_delay must be non-negative")


def _require_optical(e: ComplexEnvelope) -> None:
    if e.domain != OPTICAL:
        raise ValueError("expected an optical envelope")


def _grid_of(e: ComplexEnvelope) -> SimulationGrid:
    return SimulationGrid(e.rate, len(e))


def cw_field(laser: LaserSpec, g: SimulationGrid, split: float = 0.5) -> ComplexEnvelope:
    """Constant CW envelope carrying ``split`` of the laser power."""
    amp = math.sqrt(laser.power_watts * split)
    return ComplexEnvelope(np.full(g.n_samples, amp, dtype=complex), g.sim_rate, OPTICAL)


def lo_amplitude(laser: LaserSpec, split: float = 0.5) -> float:
    return math.sqrt(laser.power_watts * (1.0 - split))


def modulate_phase(e: ComplexEnvelope, pm: PmSpec) -> ComplexEnvelope:
    _require_optical(e)
    if pm.beta0 == 0:
        return e
    g = _grid_of(e)
    phase = pm.beta0 * np.cos(g.tone_phase(pm.drive_freq))
    return e.with_samples(e.samples * np.exp(1j * phase))


def rf_drive(g: SimulationGrid, freq: float, phase: float = 0.0) -> np.ndarray:
    """Unit-amplitude RF tone ``cos(2*pi*freq*t + phase)`` on the grid."""
    return np.cos(g.tone_phase(freq, phase))


Drive = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def modulate_intensity(e: ComplexEnvelope, mz: MzmSpec, drive: Drive) -> ComplexEnvelope:
    _require_optical(e)
    if callable(drive):
        drive = drive(np.arange(len(e)) / e.rate)
    drive = np.asarray(drive, dtype=float)
    if drive.shape != e.samples.shape:
        raise ValueError("drive length mismatch")
    return e.with_samples(e.samples * mz.transfer(mz.beta1 * drive + mz.bias))


def extract_comb_lines(p: ComplexEnvelope, spacing: float) -> CombLines:
    """Discrete Fourier coefficients of one comb period.

    Lines more than 200 dB below the strongest are set to exactly zero.
    """
    period = p.rate / spacing
    n_period = int(round(period))
    if abs(period - n_period) > 1e-9 * period or len(p) % n_period:
        raise ValueError("capture does not cover an integer number of comb periods")
    coeffs = np.fft.fft(p.samples[:n_period]) / n_period
    coeffs = np.fft.fftshift(coeffs)
    k = np.arange(n_period) - n_period // 2
    mag = np.abs(coeffs)
    if mag.max() > 0:
        coeffs[mag < mag.max() * 10.0 ** (-CLAMP_DB / 20.0)] = 0.0
    return CombLines(k, coeffs, spacing)


def generate_ofc(
    laser: LaserSpec,
    pm: PmSpec,
    mz: MzmSpec,
    g: SimulationGrid,
    split: float = 0.5,
) -> Tuple[ComplexEnvelope, CombLines]:
    """Cascaded phase and intensity modulation of the laser by one RF tone."""
    if not on_grid(pm.drive_freq, g.resolution):
        raise ValueError("comb spacing not on analysis grid")
    cw = cw_field(laser, g, split)
    phased = modulate_phase(cw, pm)
    p = modulate_intensity(phased, mz, rf_drive(g, pm.drive_freq, mz.drive_phase))
    return p, extract_comb_lines(p, pm.drive_freq)


SAMPLING_MODES = ("literal", "physical")


def optical_sample(
    p: ComplexEnvelope,
    x: RealWaveform,
    mode: str = "literal",
    modulator: Optional[MzmSpec] = None,
) -> ComplexEnvelope:
    """Impose the microwave signal on the comb.

    ``literal`` is the ideal product ``p(t) * x(t)``. ``physical`` drives an
    intensity modulator with ``x / vpi`` instead, which adds a carrier term
    at the comb lines and is only linear for small drive.
    """
    if p.rate != x.rate or len(p) != len(x):
        raise ValueError("comb and signal rate/length mismatch")
    _require_optical(p)
    if mode == "literal":
        return p.with_samples(p.samples * x.samples)
    if mode == "physical":
        mz = modulator or MzmSpec(beta1=math.pi, drive_phase=0.0)
        return modulate_intensity(p, mz, x.samples / mz.vpi)
    raise ValueError(f"unknown sampling mode {mode!r}")


def sampling_gain(mode: str = "literal", modulator: Optional[MzmSpec] = None) -> complex:
    """Small-signal factor between ``p*x`` and the sampled field."""
    if mode == "literal":
        return 1.0 + 0j
    mz = modulator or MzmSpec(beta1=math.pi, drive_phase=0.0)
    a, b = mz.arm_weights
    slope = -math.sin(mz.bias) + 1j * (a - b) * math.cos(mz.bias)
    return mz.field_loss * mz.beta1 / mz.vpi * slope


def receiver_scale(r: ReceiverSpec, laser: LaserSpec, split: float = 0.5) -> float:
    """Homodyne conversion factor ``2 * A_LO * A_S``."""
    a_lo = r.lo_amplitude if r.lo_amplitude is not None else lo_amplitude(laser, split)
    return 2.0 * a_lo * r.signal_amplitude_scale


def phase_noise(
    g: SimulationGrid, linewidth: float, delay: float, seed: int = 0
) -> np.ndarray:
    """Differential laser phase ``phi(t) - phi(t - delay)`` for a Wiener process."""
    n = g.n_samples
    lag = int(round(delay * g.sim_rate))
    if linewidth <= 0 or lag == 0:
        return np.zeros(n)
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal(n + lag) * math.sqrt(2 * math.pi * linewidth / g.sim_rate)
    phi = np.cumsum(steps)
    return phi[lag:] - phi[:-lag]


def homodyne_receive(
    y: ComplexEnvelope,
    r: ReceiverSpec,
    laser: Optional[LaserSpec] = None,
    split: float = 0.5,
) -> ComplexEnvelope:
    """I/Q homodyne against the same-laser LO, then the photodiode response."""
    _require_optical(y)
    laser = laser or LaserSpec()
    v = receiver_scale(r, laser, split) * y.samples
    if r.differential_delay > 0:
        dphi = phase_noise(
            _grid_of(y), laser.linewidth, r.differential_delay, r.phase_noise_seed
        )
        v = v * np.exp(1j * dphi)
    out = ComplexEnvelope(v, y.rate, BASEBAND)
    return apply_freq_response(out, single_pole(r.pd_bandwidth))


def decimation_factor(r: ReceiverSpec, g: SimulationGrid) -> int:
    ratio = g.sim_rate / r.adc_rate
    d = int(round(ratio))
    if d < 1 or abs(ratio - d) > 1e-9 * ratio or g.n_samples % d:
        raise ValueError("simulation rate is not an integer multiple of the ADC rate")
    return d


def quantize(samples: np.ndarray, bits: int) -> Tuple[np.ndarray, float]:
    """Mid-tread uniform quantiser on I and Q, full scale = max component magnitude."""
    full_scale = float(max(np.max(np.abs(samples.real)), np.max(np.abs(samples.imag))))
    if full_scale == 0.0:
        return samples.copy(), 0.0
    top = 2 ** (bits - 1) - 1
    step = full_scale / top
    i = np.clip(np.round(samples.real / step), -top, top)
    q = np.clip(np.round(samples.imag / step), -top, top)
    return step * (i + 1j * q), step


def digitize(
    v: ComplexEnvelope, r: ReceiverSpec, g: SimulationGrid
) -> Tuple[ComplexEnvelope, float]:
    """Brick-wall LPF, decimation and quantisation; returns samples and LSB size."""
    d = decimation_factor(r, g)
    filtered = apply_freq_response(v, brick_wall(r.lpf_cutoff))
    samples = filtered.samples[::d]
    step = 0.0
    if r.adc_bits is not None:
        samples, step = quantize(samples, int(r.adc_bits))
    return ComplexEnvelope(samples, r.adc_rate, BASEBAND), step


def acquire(v: ComplexEnvelope, r: ReceiverSpec, g: SimulationGrid) -> SpectrumGrid:
    captured, _ = digitize(v, r, g)
    return dft_forward(captured)


def quantization_noise_power(step: float, n_adc: int) -> float:
    """Expected per-bin ``|Y|**2`` contributed by I and Q rounding."""
    return (step**2 / 6.0) / n_adc
