"""Multiband microwave test signal: bipolar NRZ bands on RF carriers plus white noise."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .signals import (
    REFERENCE_IMPEDANCE,
    RealWaveform,
    SimulationGrid,
    dbm_to_watts,
    on_grid,
)

log = logging.getLogger(__name__)

SHAPINGS = ("mainlobe", "rect")
SNR_REFERENCES = ("span", "bin")


@dataclass(frozen=True)
class BandSpec:
    carrier: float
    bandwidth: float
    relative_power: float = 0.0
    bit_seed: int = 0

    def __post_init__(self):
        if not self.carrier > 0:
            raise ValueError("carrier must be positive")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def edges(self) -> Tuple[float, float]:
        """Main-lobe extent, carrier +/- bit rate."""
        return self.carrier - self.bandwidth, self.carrier + self.bandwidth


@dataclass(frozen=True)
class MultibandSpec:
    """Scenario for the signal under test.

    ``noise_psd`` is the one-sided PSD in dBm/Hz; ``-inf`` disables noise, in
    which case ``signal_power_dbm`` must fix the absolute level. With
    ``snr_reference="span"`` the SNR is total signal over total noise across
    the span; ``"bin"`` references the noise in one analysis bin instead,
    which is the natural measure for a single-tone probe.
    """

    bands: Tuple[BandSpec, ...] = ()
    noise_psd: float = -146.0
    span: float = 20e9
    target_snr: float = 61.0
    noise_seed: int = 0
    shaping: str = "mainlobe"
    signal_power_dbm: Optional[float] = None
    snr_reference: str = "span"

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.span > 0:
            raise ValueError("span must be positive")
        if not math.isfinite(self.target_snr):
            raise ValueError("target_snr must be finite")
        if self.shaping not in SHAPINGS:
            raise ValueError(f"unknown shaping {self.shaping!r}")
        if self.snr_reference not in SNR_REFERENCES:
            raise ValueError(f"unknown snr_reference {self.snr_reference!r}")
        for b in self.bands:
            lo, hi = b.edges
            if not (0 < b.carrier < self.span) or lo <= 0 or hi >= self.span:
                raise ValueError(
                    f"band at {b.carrier:g} Hz extends outside (0, {self.span:g}) Hz"
                )
        if not self.noise_enabled and self.signal_power_dbm is None and self.bands:
            raise ValueError("signal power undefined without noise; set signal_power_dbm")

    @property
    def noise_enabled(self) -> bool:
        return math.isfinite(self.noise_psd)

    def noise_power(self, resolution: float) -> float:
        """Nominal noise power (W) in the SNR reference bandwidth."""
        if not self.noise_enabled:
            return 0.0
        bw = self.span if self.snr_reference == "span" else resolution
        return dbm_to_watts(self.noise_psd) * bw

    def signal_power(self, resolution: float) -> float:
        """Total band power in watts implied by this description."""
        if self.signal_power_dbm is not None:
            return dbm_to_watts(self.signal_power_dbm)
        return self.noise_power(resolution) * 10.0 ** (self.target_snr / 10.0)


@dataclass(frozen=True)
class MultibandSignal:
    """Generated signal with its known decomposition."""

    spec: MultibandSpec
    bands: Tuple[RealWaveform, ...]
    noise: RealWaveform
    total: RealWaveform
    resolution: float = field(default=0.0)

    @property
    def signal(self) -> RealWaveform:
        return RealWaveform(self.total.samples - self.noise.samples, self.total.rate)


def _span_mask(g: SimulationGrid, span: float) -> np.ndarray:
    f = np.fft.fftfreq(g.n_samples, d=1.0 / g.sim_rate)
    return np.abs(f) < span - 1e-6 * g.resolution


def gen_nrz_band(
    b: BandSpec,
    g: SimulationGrid,
    shaping: str = "mainlobe",
    span: Optional[float] = None,
) -> RealWaveform:
    """Bipolar NRZ bit stream at bit rate ``b.bandwidth`` on a cosine carrier.

    ``shaping="mainlobe"`` keeps only the main spectral lobe,
    ``carrier +/- bandwidth``; ``"rect"`` keeps the raw rectangular pulses,
    optionally truncated to ``|f| < span``.
    """
    if not on_grid(b.carrier, g.resolution):
        raise ValueError("carrier not on analysis grid")
    if not on_grid(b.bandwidth, g.resolution):
        raise ValueError("bandwidth not on analysis grid")
    if shaping not in SHAPINGS:
        raise ValueError(f"unknown shaping {shaping!r}")
    n = g.n_samples
    n_bits = int(round(b.bandwidth / g.resolution))
    rng = np.random.default_rng(b.bit_seed)
    bits = rng.choice(np.array([-1.0, 1.0]), size=n_bits)
    symbol = (np.arange(n, dtype=np.int64) * n_bits) // n
    x = bits[symbol] * np.cos(g.tone_phase(b.carrier))

    if shaping == "mainlobe":
        f = np.fft.fftfreq(n, d=1.0 / g.sim_rate)
        tol = 1e-6 * g.resolution
        keep = np.abs(np.abs(f) - b.carrier) < b.bandwidth - tol
        x = np.fft.irfft(np.fft.rfft(x) * keep[: n // 2 + 1], n)
    elif span is not None:
        keep = _span_mask(g, span)
        x = np.fft.irfft(np.fft.rfft(x) * keep[: n // 2 + 1], n)
    return RealWaveform(x, g.sim_rate)


def gen_noise(m: MultibandSpec, g: SimulationGrid) -> RealWaveform:
    """White Gaussian noise of one-sided PSD ``m.noise_psd`` over (0, span).

    Drawn directly as independent complex-Gaussian positive-frequency bins;
    the conjugate-symmetric inverse makes the waveform exactly real.
    """
    n = g.n_samples
    if not m.noise_enabled:
        return RealWaveform(np.zeros(n), g.sim_rate)
    n0 = dbm_to_watts(m.noise_psd)
    var = n0 * g.resolution * REFERENCE_IMPEDANCE / 2.0
    half = np.zeros(n // 2 + 1, dtype=np.complex128)
    top = int(math.ceil(m.span / g.resolution - 1e-9))
    top = min(top, n // 2)
    rng = np.random.default_rng(m.noise_seed)
    draws = rng.standard_normal((top - 1, 2))
    half[1:top] = np.sqrt(var / 2.0) * (draws[:, 0] + 1j * draws[:, 1])
    x = np.fft.irfft(half * n, n)
    return RealWaveform(x, g.sim_rate)


def _check_overlaps(bands) -> None:
    spans = sorted(b.edges for b in bands)
    for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
        if lo2 < hi1:
            msg = f"bands overlap: [{lo1:g}, {hi1:g}] and [{lo2:g}, {hi2:g}] Hz"
            log.warning(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)


def synthesize(m: MultibandSpec, g: SimulationGrid) -> MultibandSignal:
    """Generate the scenario keeping bands and noise separate."""
    _check_overlaps(m.bands)
    noise = gen_noise(m, g)
    waves = []
    if m.bands:
        total_w = m.signal_power(g.resolution)
        weights = np.array([10.0 ** (b.relative_power / 10.0) for b in m.bands])
        weights = weights / weights.sum()
        for b, w in zip(m.bands, weights):
            raw = gen_nrz_band(b, g, m.shaping, m.span)
            ms = raw.mean_square()
            target_ms = total_w * w * REFERENCE_IMPEDANCE
            waves.append(RealWaveform(raw.samples * math.sqrt(target_ms / ms), g.sim_rate))
    total = noise.samples.copy()
    for w in waves:
        total = total + w.samples
    return MultibandSignal(
        m, tuple(waves), noise, RealWaveform(total, g.sim_rate), g.resolution
    )


def gen_multiband(m: MultibandSpec, g: SimulationGrid) -> RealWaveform:
    return synthesize(m, g).total


def _band_mask(freqs: np.ndarray, m: MultibandSpec) -> np.ndarray:
    mask = np.zeros(freqs.shape, dtype=bool)
    for b in m.bands:
        lo, hi = b.edges
        mask |= (np.abs(freqs) >= lo) & (np.abs(freqs) <= hi)
    return mask


def measure_snr(
    w: Union[MultibandSignal, RealWaveform], m: MultibandSpec
) -> float:
    """SNR in dB under the configured reference bandwidth.

    Uses the known decomposition for a :class:`MultibandSignal`; for a bare
    waveform the noise PSD is estimated from out-of-band bins inside the span
    and subtracted from the in-band power.
    """
    if not m.bands:
        raise ValueError("measure_snr needs at least one band")
    if isinstance(w, MultibandSignal):
        p_sig = w.signal.mean_square()
        p_noise_span = w.noise.mean_square()
        resolution = w.resolution
    else:
        x = w.samples
        n = x.size
        resolution = w.rate / n
        spec = np.fft.fft(x) / n
        f = np.fft.fftfreq(n, d=1.0 / w.rate)
        power = np.abs(spec) ** 2
        in_span = (np.abs(f) > 0) & (np.abs(f) < m.span)
        inband = _band_mask(f, m) & in_span
        outband = in_span & ~inband
        per_bin = float(np.mean(power[outband])) if outband.any() else 0.0
        p_noise_span = per_bin * int(in_span.sum())
        p_sig = max(float(power[inband].sum()) - per_bin * int(inband.sum()), 0.0)
    if m.snr_reference == "bin":
        # one-sided analysis bins strictly inside (0, span)
        positive_bins = int(math.ceil(m.span / resolution - 1e-9)) - 1
        p_noise = p_noise_span / positive_bins
    else:
        p_noise = p_noise_span
    if p_noise <= 0.0:
        return math.inf
    if p_sig <= 0.0:
        return -math.inf
    return 10.0 * math.log10(p_sig / p_noise)
