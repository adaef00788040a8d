"""End-to-end scenario chain: stimulus, comb sampling, receiver, reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import ScenarioConfig
from .frontend import (
    CombLines,
    decimation_factor,
    digitize,
    generate_ofc,
    homodyne_receive,
    optical_sample,
    quantization_noise_power,
    receiver_scale,
    sampling_gain,
)
from .reconstruction import (
    BinDiagnostics,
    MatrixSpec,
    Metrics,
    ReconstructedSpectrum,
    build_coset_system,
    detection_limit_sweep,
    evaluate,
    reconstruct_full,
    residual_power,
    solve_exhaustive_l0,
    solve_omp,
    support_of,
    band_intervals,
    best_residual_at_size,
)
from .reconstruction.detection import SweepResult
from .signals import (
    REFERENCE_IMPEDANCE,
    ComplexEnvelope,
    SpectrumGrid,
    dbm_to_watts,
    dft_forward,
    single_pole,
)
from .stimulus import BandSpec, MultibandSignal, synthesize


@dataclass(frozen=True)
class Acquisition:
    """Everything produced between the stimulus and the solver."""

    signal: MultibandSignal
    input_spectrum: SpectrumGrid
    measured: SpectrumGrid
    matrix: MatrixSpec
    noise_power: float
    lsb: float


@dataclass(frozen=True)
class SimulationResult:
    acquisition: Acquisition
    estimate: ReconstructedSpectrum
    diagnostics: Tuple[BinDiagnostics, ...]
    metrics: Metrics


def build_comb(cfg: ScenarioConfig) -> Tuple[ComplexEnvelope, CombLines]:
    return generate_ofc(cfg.laser, cfg.pm, cfg.mzm, cfg.grid, cfg.split_ratio)


def matrix_spec(cfg: ScenarioConfig, comb: CombLines) -> MatrixSpec:
    """Measurement model matching the configured front end."""
    scale = receiver_scale(cfg.receiver, cfg.laser, cfg.split_ratio) * sampling_gain(cfg.sampling)
    return MatrixSpec(
        comb=comb.restrict(cfg.k_use),
        lpf_cutoff=cfg.receiver.lpf_cutoff,
        span=cfg.stimulus.span,
        scale=scale,
        equalizer=single_pole(cfg.receiver.pd_bandwidth),
    )


def expected_row_noise(
    cfg: ScenarioConfig, m: MatrixSpec, measured: SpectrumGrid, lsb: float
) -> float:
    """Mean ``|Y|**2`` noise per equalised measured bin.

    Input noise folds in through every comb line whose shifted copy of the
    span reaches the bin; ADC rounding adds white noise before equalisation.
    """
    f = measured.freqs
    rows = np.abs(f) < m.lpf_cutoff - 1e-6 * measured.resolution
    nu = f[rows]
    h2 = np.abs(m.equalizer(nu)) ** 2 if m.equalizer is not None else np.ones(nu.size)
    s = cfg.stimulus
    total = quantization_noise_power(lsb, int(measured.values.size)) / h2
    if s.noise_enabled:
        sigma2 = dbm_to_watts(s.noise_psd) * measured.resolution * REFERENCE_IMPEDANCE / 2.0
        folded = np.zeros(nu.size)
        for k, w in zip(m.comb.k, m.comb.weights):
            src = np.abs(nu - k * m.spacing)
            folded += np.where((src > 0) & (src < s.span), abs(w) ** 2, 0.0)
        total = total + abs(m.scale) ** 2 * sigma2 * folded
    return float(np.mean(total))


def acquire_scenario(
    cfg: ScenarioConfig,
    comb: Optional[Tuple[ComplexEnvelope, CombLines]] = None,
    stimulus=None,
) -> Acquisition:
    """Run the analogue chain and ADC for the configured (or given) stimulus."""
    p, lines = comb if comb is not None else build_comb(cfg)
    sig = synthesize(stimulus or cfg.stimulus, cfg.grid)
    y = optical_sample(p, sig.total, cfg.sampling)
    v = homodyne_receive(y, cfg.receiver, cfg.laser, cfg.split_ratio)
    captured, lsb = digitize(v, cfg.receiver, cfg.grid)
    measured = dft_forward(captured)
    m = matrix_spec(cfg, lines)
    return Acquisition(
        signal=sig,
        input_spectrum=dft_forward(sig.total),
        measured=measured,
        matrix=m,
        noise_power=expected_row_noise(cfg, m, measured, lsb),
        lsb=lsb,
    )


def reconstruct(cfg: ScenarioConfig, acq: Acquisition):
    return reconstruct_full(
        acq.measured,
        acq.matrix,
        solver=cfg.solver,
        t=cfg.threshold,
        noise_power=acq.noise_power,
        max_support=cfg.max_support,
        safety_factor=cfg.safety_factor,
        resolve_degenerate=(cfg.resolve_degenerate and cfg.sampling == "literal", cfg.resolve_degenerate),
    )


def simulate(
    cfg: ScenarioConfig, comb: Optional[Tuple[ComplexEnvelope, CombLines]] = None, stimulus=None
) -> SimulationResult:
    acq = acquire_scenario(cfg, comb, stimulus)
    est, diags = reconstruct(cfg, acq)
    bands = (stimulus or cfg.stimulus).bands
    metrics = evaluate(est, acq.input_spectrum, band_intervals(bands), acq.matrix, acq.measured)
    return SimulationResult(acq, est, tuple(diags), metrics)


# single-tone detection probe -------------------------------------------------


def probe_stimulus(cfg: ScenarioConfig, snr_db: float, seed: int):
    """Unmodulated tone at the probe frequency with the sweep's SNR reference."""
    r = cfg.grid.resolution
    tone = BandSpec(carrier=cfg.sweep.probe_freq, bandwidth=r, bit_seed=seed)
    return replace(
        cfg.stimulus,
        bands=(tone,),
        target_snr=float(snr_db),
        noise_seed=seed,
        signal_power_dbm=None,
        snr_reference=cfg.sweep.snr_reference,
    )


def probe_detected(cfg: ScenarioConfig, result: SimulationResult) -> bool:
    """Detected when the probe's own bin survives in the reconstructed support."""
    est = result.estimate
    return bool(est.values[int(round(cfg.sweep.probe_freq / est.resolution))] != 0)


def detection_sweep(
    cfg: ScenarioConfig, comb=None, snr_list: Optional[Sequence[float]] = None
) -> SweepResult:
    comb = comb if comb is not None else build_comb(cfg)
    seeds = [cfg.sweep.seed + i for i in range(cfg.sweep.seeds)]

    def probe(snr, seed):
        res = simulate(cfg, comb, probe_stimulus(cfg, snr, seed))
        return probe_detected(cfg, res)

    return detection_limit_sweep(
        probe,
        snr_list if snr_list is not None else cfg.sweep.snr_list,
        seeds=seeds,
        required_rate=cfg.sweep.required_rate,
    )


# solver oracle ---------------------------------------------------------------


@dataclass(frozen=True)
class OracleTrial:
    f_offset: float
    true_support: Tuple[int, ...]
    omp_support: Tuple[int, ...]
    exhaustive_support: Tuple[int, ...]
    omp_residual: float
    exhaustive_residual: float
    exhaustive_residual_at_omp_size: float


@dataclass(frozen=True)
class OracleReport:
    trials: Tuple[OracleTrial, ...]

    @property
    def match_rate(self) -> float:
        return float(np.mean([t.omp_support == t.exhaustive_support for t in self.trials]))

    @property
    def dominance_rate(self) -> float:
        """Share of trials where exhaustive search leaves no more residual than OMP.

        Compared at OMP's support size: under a residual bound the exhaustive
        solver may stop at a sparser support with a larger (but admissible)
        residual, which is not a failure of the search.
        """
        ok = [
            t.exhaustive_residual_at_omp_size <= t.omp_residual * (1 + 1e-9) + 1e-300
            for t in self.trials
        ]
        return float(np.mean(ok))

    @property
    def residual_gap(self) -> float:
        """Mean of ``omp_residual - exhaustive_residual`` relative to the measurement."""
        return float(np.mean([t.omp_residual - t.exhaustive_residual for t in self.trials]))


def oracle_trials(
    cfg: ScenarioConfig,
    comb: Optional[CombLines] = None,
    n_trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> OracleReport:
    """Random sparse coset problems solved by both OMP and exhaustive search.

    Each trial draws an offset, a support of 1..``max_sparsity`` unknowns with
    unit-power complex Gaussian amplitudes, and white complex noise at
    ``oracle.snr_db`` below the mean measurement power. Both solvers use the
    same noise-derived residual bound.
    """
    o = cfg.oracle
    n_trials = o.trials if n_trials is None else n_trials
    rng = np.random.default_rng(o.seed if seed is None else seed)
    lines = comb if comb is not None else build_comb(cfg)[1]
    m = MatrixSpec(
        comb=lines.restrict(cfg.k_use),
        lpf_cutoff=cfg.receiver.lpf_cutoff,
        span=cfg.stimulus.span,
    )
    r = cfg.grid.resolution
    half = int(round(m.spacing / 2 / r))
    out = []
    n_adc = int(round(cfg.grid.n_samples / decimation_factor(cfg.receiver, cfg.grid)))
    dummy = SpectrumGrid(np.zeros(n_adc, dtype=complex), r)
    for _ in range(n_trials):
        f = int(rng.integers(1, half)) * r
        base = build_coset_system(m, f, dummy)
        k = int(rng.integers(1, o.max_sparsity + 1)) if o.max_sparsity else 0
        sup = tuple(sorted(int(i) for i in rng.choice(base.n_unknowns, size=k, replace=False)))
        x = np.zeros(base.n_unknowns, dtype=complex)
        x[list(sup)] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / math.sqrt(2)
        clean = base.a @ x
        p_row = float(np.mean(np.abs(clean) ** 2))
        sigma2 = p_row * 10.0 ** (-o.snr_db / 10.0)
        noise = (rng.standard_normal(clean.size) + 1j * rng.standard_normal(clean.size)) * math.sqrt(sigma2 / 2)
        s = replace(base, y=clean + noise)
        tol = sigma2 * s.n_rows * cfg.safety_factor
        c_omp = solve_omp(s, o.max_sparsity, tol)
        c_ex = solve_exhaustive_l0(s, o.max_sparsity, tol)
        out.append(
            OracleTrial(
                f_offset=float(f),
                true_support=sup,
                omp_support=support_of(s, c_omp),
                exhaustive_support=support_of(s, c_ex),
                omp_residual=residual_power(s, c_omp),
                exhaustive_residual=residual_power(s, c_ex),
                exhaustive_residual_at_omp_size=best_residual_at_size(s, len(support_of(s, c_omp))),
            )
        )
    return OracleReport(tuple(out))
