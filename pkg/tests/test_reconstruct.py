import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combsense import pipeline
from combsense.config import parse_config
from combsense.frontend import CombLines
from combsense.reconstruction import (
    MatrixSpec,
    ReconstructedSpectrum,
    predict_measurement,
    reconstruct_full,
    relative_error,
)
from combsense.signals import SpectrumGrid

R = 1.25e6
N_ADC = 3200


def identity_comb():
    ks = np.arange(-21, 22)
    return CombLines(ks, (ks == 0).astype(complex), 1e9)


def measured_from(x, m):
    base = SpectrumGrid(np.zeros(N_ADC, complex), R)
    y = predict_measurement(ReconstructedSpectrum(x, R, -math.inf), m, base)
    y[np.abs(base.freqs) >= m.lpf_cutoff] = 0
    return SpectrumGrid(y, R)


def truth_grid(x):
    n = x.size
    v = np.zeros(2 * n, complex)
    v[n:] = x
    v[1:n] = np.conj(x[1:][::-1])
    return SpectrumGrid(v, R)


def test_zero_measurement_empty_support(ref_comb):
    m = MatrixSpec(ref_comb[1].restrict(21))
    est, diags = reconstruct_full(SpectrumGrid(np.zeros(N_ADC, complex), R), m)
    assert est.support.size == 0
    assert len(diags) == 401
    assert est.values.size == 16000


def test_selection_matrix_limit():
    # a single comb line reduces the chain to plain down-conversion
    m = MatrixSpec(identity_comb())
    x = np.zeros(16000, complex)
    rng = np.random.default_rng(3)
    idx = rng.choice(np.arange(1, 1599), size=12, replace=False)
    x[idx] = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    est, _ = reconstruct_full(measured_from(x, m), m, t=-200.0)
    assert relative_error(truth_grid(x), est) < 1e-6


def test_sparse_truth_recovered_by_ref_comb(ref_comb):
    m = MatrixSpec(ref_comb[1].restrict(21))
    x = np.zeros(16000, complex)
    rng = np.random.default_rng(8)
    idx = rng.choice(np.arange(1, 16000), size=25, replace=False)
    x[idx] = 0.1 * (rng.standard_normal(25) + 1j * rng.standard_normal(25))
    est, _ = reconstruct_full(measured_from(x, m), m, solver="exhaustive", t=-200.0, max_support=2)
    assert relative_error(truth_grid(x), est) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(-120, -40), st.floats(0, 40))
def test_threshold_monotone(ref_result, t, dt):
    raw = replace(ref_result.estimate, threshold=-math.inf)
    low = set(raw.with_threshold(t).support)
    high = set(raw.with_threshold(t + dt).support)
    assert high <= low


def test_unresolved_when_degenerate_skipped(ref_comb):
    m = MatrixSpec(ref_comb[1].restrict(21))
    est, diags = reconstruct_full(
        SpectrumGrid(np.zeros(N_ADC, complex), R), m, resolve_degenerate=(False, False)
    )
    assert len(diags) == 399
    assert 0.5e9 in est.unresolved and 1e9 in est.unresolved and 19.5e9 in est.unresolved
    assert len(est.unresolved) == 19 + 20


def test_noise_free_single_tone():
    cfg = parse_config(
        "stimulus.noise_psd_dbm_hz = off\n"
        "stimulus.signal_power_dbm = 0\n"
        "band.t.carrier = 12.34 GHz\n"
        "band.t.bandwidth = 1.25 MHz\n"
    )
    res = pipeline.simulate(cfg)
    assert res.metrics.e_r < 1e-3
    strongest = max(res.metrics.detected_bands, key=lambda b: b.peak_dbm)
    assert round(strongest.center / R) == round(12.34e9 / R)
    # with an ideal ADC there are no quantisation harmonics left above the floor
    ideal = pipeline.simulate(cfg.with_quantization(False))
    assert ideal.metrics.e_r < 1e-12
    assert [round(b.center / R) for b in ideal.metrics.detected_bands] == [round(12.34e9 / R)]


def test_scenario_diagnostics(ref_result):
    d = ref_result.diagnostics
    assert sum(x.degenerate for x in d) == 2
    assert all(x.rows == 8 for x in d if not x.degenerate)
    assert all(len(x.support) <= 3 for x in d)
