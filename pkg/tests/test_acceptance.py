"""Acceptance criteria for the reference scenario.

Each test prints one PASS/FAIL line and asserts at the stated tolerance.
"""

import math
import time
from dataclasses import replace

import numpy as np
from conftest import ACCEPTANCE_LINES
from combsense import pipeline
from combsense.cli import main
from combsense.config import REFERENCE_CONFIG
from combsense.frontend import digitize, generate_ofc, homodyne_receive, optical_sample
from combsense.reconstruction import build_coset_system, build_degenerate_system
from combsense.reconstruction.spectrum import offsets, one_sided
from combsense.signals import RealWaveform, dft_forward


def record(n, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_comb_flatness(ref_cfg):
    c = ref_cfg
    t0 = time.perf_counter()
    _, comb = generate_ofc(c.laser, c.pm, c.mzm, c.grid, c.split_ratio)
    n = comb.flat_count(5.0, 23)
    dt = time.perf_counter() - t0
    record(1, n >= 45 and dt < 5.0, f"comb lines within 5 dB over k in [-23, 23] = {n} (need >= 45), runtime {dt:.2f} s (need < 5 s)")


def test_02_scenario(ref_cfg, ref_comb):
    t0 = time.perf_counter()
    res = pipeline.simulate(ref_cfg)
    dt = time.perf_counter() - t0
    r = ref_cfg.grid.resolution
    found = []
    for b in ref_cfg.stimulus.bands:
        near = [d.center for d in res.metrics.detected_bands if abs(d.center - b.carrier) <= r]
        found.append(near[0] if near else math.nan)
    ok_bands = all(not math.isnan(f) for f in found)
    e_r = res.metrics.e_r
    centers = ", ".join("missing" if math.isnan(f) else f"{f / 1e9:.6f} GHz" for f in found)
    record(
        2,
        ok_bands and e_r <= 0.02 and dt < 60.0,
        f"band centres {centers} (need within 1 bin), E_r = {e_r:.4g} (need <= 0.02), runtime {dt:.1f} s (need < 60 s)",
    )


def test_03_compression_ratio(ref_cfg):
    ratio = ref_cfg.compression_ratio
    record(3, ratio == 10.0, f"compression ratio = {ratio:g} (need exactly 10)")


def test_04_coset_shape(ref_cfg, ref_comb):
    m = pipeline.matrix_spec(ref_cfg, ref_comb[1])
    r = ref_cfg.grid.resolution
    dummy = pipeline.acquire_scenario(ref_cfg, ref_comb).measured
    regular, _ = offsets(m, r)
    shapes = {build_coset_system(m, f, dummy).a.shape for f in regular}
    record(4, shapes == {(8, 40)}, f"shapes over {regular.size} non-degenerate offsets = {sorted(shapes)} (need only (8, 40))")


def test_05_forward_consistency(ref_cfg, ref_comb):
    cfg = ref_cfg.with_quantization(False)
    p, comb = ref_comb
    m = pipeline.matrix_spec(cfg, comb)
    g, r = cfg.grid, cfg.grid.resolution
    worst, checked = 0.0, 0
    for trial in range(3):
        rng = np.random.default_rng(trial)
        idx = rng.choice(np.arange(1, int(round(m.span / r))), size=60, replace=False)
        x = np.zeros(g.n_samples)
        for i in idx:
            x += rng.uniform(0.1, 1.0) * np.cos(g.tone_phase(i * r) + rng.uniform(0, 2 * math.pi))
        w = RealWaveform(x, g.sim_rate)
        v = homodyne_receive(optical_sample(p, w, cfg.sampling), cfg.receiver, cfg.laser, cfg.split_ratio)
        measured = dft_forward(digitize(v, cfg.receiver, g)[0])
        truth = one_sided(dft_forward(w), m.span)
        floor = 1e-9 * np.abs(truth).max()
        regular, degenerate = offsets(m, r)
        systems = [build_coset_system(m, f, measured) for f in regular]
        systems += [build_degenerate_system(m, f, measured) for f in degenerate]
        for s in systems:
            xt = truth[np.rint(s.unknown_freqs / r).astype(int)]
            if np.abs(xt).max() <= floor:
                continue  # coset carries no ground truth
            checked += 1
            coef = s.from_complex(xt)
            worst = max(worst, np.linalg.norm(s.a @ coef - s.y) / np.linalg.norm(s.y))
    record(5, checked > 0 and worst < 1e-6, f"max ||a x - y|| / ||y|| = {worst:.3g} over {checked} occupied cosets (need < 1e-6)")


def test_06_solver_oracle(ref_cfg, ref_comb):
    rep = pipeline.oracle_trials(ref_cfg, ref_comb[1], n_trials=200)
    match, dom = rep.match_rate, rep.dominance_rate
    record(
        6,
        len(rep.trials) == 200 and match >= 0.95 and dom == 1.0,
        f"OMP/exhaustive support match = {match:.1%} (need >= 95%), exhaustive residual <= OMP in {dom:.1%} (need 100%)",
    )


def test_07_null_input(ref_cfg, ref_comb):
    base = replace(ref_cfg, stimulus=replace(ref_cfg.stimulus, bands=()))
    counts = []
    for i in range(20):
        cfg = base.with_seed(ref_cfg.sweep.seed + i)
        res = pipeline.simulate(cfg, ref_comb)
        counts.append(int(res.estimate.support.size))
    mean = float(np.mean(counts))
    record(7, mean <= 2.0, f"mean spurious bins above T over 20 seeds = {mean:.2f} (need <= 2), range {min(counts)}..{max(counts)}")


def test_08_sfdr(ref_result):
    sfdr = ref_result.metrics.sfdr
    record(8, 53.0 <= sfdr <= 65.0, f"SFDR with reconstruction-spur exclusion = {sfdr:.2f} dB (need 59 +/- 6 dB)")


def test_09_detection_limit(ref_cfg, ref_comb):
    res = pipeline.detection_sweep(ref_cfg, ref_comb)
    limit = res.limit
    rates = ", ".join(f"{s:g}:{r:.2f}" for s, r in zip(res.snr, res.rate))
    ok = res.trials >= 20 and not math.isnan(limit) and 3.0 <= limit <= 12.0
    record(9, ok, f"90% detection limit = {limit:g} dB (need within [3, 12] dB); rates {rates}")


def test_10_numerical_hygiene(ref_cfg, ref_comb, ref_result, tmp_path):
    acq = ref_result.acquisition
    p = ref_comb[0]
    # Parseval on the real stimulus, the optical comb and the complex ADC capture
    c = ref_cfg
    y = optical_sample(p, acq.signal.total, c.sampling)
    cap = digitize(homodyne_receive(y, c.receiver, c.laser, c.split_ratio), c.receiver, c.grid)[0]
    checks = [
        abs(dft_forward(acq.signal.total).mean_square() - acq.signal.total.mean_square()) / acq.signal.total.mean_square()
    ]
    for env in (p, y, cap):
        power = float(np.mean(np.abs(env.samples) ** 2))
        checks.append(abs(dft_forward(env).mean_square() - power) / power)
    parseval = max(checks)

    vals = np.fft.ifftshift(acq.input_spectrum.values)
    mirror = np.conj(vals[(-np.arange(vals.size)) % vals.size])
    symmetry = float(np.abs(vals - mirror).max() / np.abs(vals).max())

    again = pipeline.simulate(ref_cfg, ref_comb)
    same = np.array_equal(again.estimate.values, ref_result.estimate.values)
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(["simulate", "--config", str(REFERENCE_CONFIG), "--out", str(d)]) == 0
    files = sorted(f.name for f in dirs[0].iterdir() if f.name != "runtime.txt")
    for f in files:
        same &= (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes()
    record(
        10,
        parseval <= 1e-9 and symmetry <= 1e-12 and same,
        f"Parseval rel. error = {parseval:.2g} (need <= 1e-9), conjugate symmetry = {symmetry:.2g} (need <= 1e-12), "
        f"byte-identical reruns over {len(files)} files = {same}",
    )
