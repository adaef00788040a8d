import math

import numpy as np
import pytest

from combsense.reconstruction import (
    ReconstructedSpectrum,
    detected_bands,
    detection_limit_sweep,
    relative_error,
    sfdr_report,
)
from combsense.signals import SpectrumGrid

N = 64  # two-sided grid; one-sided span is 32 bins
R = 1.0
DBM0 = math.sqrt(50 * 1e-3)  # amplitude of a 0 dBm bin


def two_sided(one):
    """Two-sided grid holding ``one`` at bins 0..N/2-1 and its mirror."""
    v = np.zeros(N, complex)
    v[N // 2 :] = one
    v[1 : N // 2] = np.conj(one[1:][::-1])
    return SpectrumGrid(v, R)


def tone(bins, amps):
    x = np.zeros(N // 2, complex)
    x[list(bins)] = amps
    return x


def est(x, t=-math.inf):
    return ReconstructedSpectrum(x, R, t)


class TestRelativeError:
    def test_identical(self):
        x = tone([3, 9], [1.0, 0.5j])
        assert relative_error(two_sided(x), est(x)) == 0.0

    def test_zero_estimate(self):
        x = tone([3], [1.0])
        assert relative_error(two_sided(x), est(np.zeros_like(x))) == 1.0

    def test_scaled_tone(self):
        assert relative_error(two_sided(tone([5], [1.0])), est(tone([5], [0.9]))) == pytest.approx(0.1)

    def test_zero_truth(self):
        with pytest.raises(ValueError, match="zero-norm"):
            relative_error(two_sided(np.zeros(N // 2)), est(tone([1], [1.0])))

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="different grids"):
            relative_error(SpectrumGrid(np.ones(N), 2.0), est(tone([1], [1.0])))


class TestSfdr:
    def test_synthetic_59(self):
        truth = tone([3], [DBM0])
        x = tone([3, 20], [DBM0, DBM0 * 10 ** (-59 / 20)])
        for exclude in (True, False):
            assert sfdr_report(est(x), two_sided(truth), [(2.5, 3.5)], exclude_reconstruction_spurs=exclude) == pytest.approx(59.0)

    def test_no_spur(self):
        truth = tone([3], [DBM0])
        assert sfdr_report(est(truth), two_sided(truth), [(2.5, 3.5)]) == math.inf

    def test_empty_support(self):
        with pytest.raises(ValueError, match="empty support"):
            sfdr_report(est(np.zeros(N // 2)), two_sided(tone([3], [1.0])), [(2.5, 3.5)])

    def test_reconstruction_spur_excluded(self):
        # a spur on the same coset offset as true-band energy counts as fit leakage
        truth = tone([3], [DBM0])
        x = tone([3, 13], [DBM0, DBM0 * 1e-2])
        with_flag = sfdr_report(est(x), two_sided(truth), [(2.5, 3.5)], spacing=10.0, exclude_reconstruction_spurs=True)
        without = sfdr_report(est(x), two_sided(truth), [(2.5, 3.5)], spacing=10.0, exclude_reconstruction_spurs=False)
        assert with_flag == math.inf and without == pytest.approx(40.0)


class TestBands:
    def test_gap_merging(self):
        x = tone([4, 5, 8, 20], [1.0, 1.0, 1.0, 2.0])
        bands = detected_bands(est(x))
        assert len(bands) == 2
        assert bands[0].lo == 4 and bands[0].hi == 8
        assert bands[1].center == 20 and bands[1].width == 1

    def test_gap_too_wide(self):
        assert len(detected_bands(est(tone([4, 8], [1.0, 1.0])))) == 2

    def test_centroid(self):
        b = detected_bands(est(tone([10, 11], [1.0, math.sqrt(3)])))[0]
        assert b.center == pytest.approx(10.75)

    def test_empty(self):
        assert detected_bands(est(np.zeros(N // 2))) == []


class TestThreshold:
    def test_power_threshold(self):
        x = tone([2, 7], [DBM0, DBM0 * 1e-3])
        e = est(x).with_threshold(-30.0)
        assert list(e.support) == [2.0]
        assert est(x).with_threshold(-60.0).support.size == 2


class TestSweep:
    def test_step_probe(self):
        res = detection_limit_sweep(lambda snr, seed: snr >= 6, [-20, 0, 6, 20, 61])
        assert res.rate == (0.0, 0.0, 1.0, 1.0, 1.0)
        assert res.limit == 6.0 and res.trials == 20

    def test_partial_rate(self):
        res = detection_limit_sweep(lambda snr, seed: seed < snr, [5, 18, 19], seeds=range(20))
        assert res.rate == (0.25, 0.9, 0.95)
        assert res.limit == 18.0

    def test_never_detected(self):
        assert math.isnan(detection_limit_sweep(lambda s, k: False, [0, 1]).limit)

    def test_needs_seeds(self):
        with pytest.raises(ValueError):
            detection_limit_sweep(lambda s, k: True, [0], seeds=())
