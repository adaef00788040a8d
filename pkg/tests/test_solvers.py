import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combsense.frontend import CombLines
from combsense.reconstruction import (
    CosetSystem,
    MatrixSpec,
    RankDeficiencyWarning,
    best_residual_at_size,
    build_coset_system,
    exhaustive_table,
    residual_power,
    solve_exhaustive_l0,
    solve_omp,
    support_of,
)
from combsense.signals import SpectrumGrid

R = 1.25e6


def system(comb, f_bins=123):
    return build_coset_system(MatrixSpec(comb), f_bins * R, SpectrumGrid(np.zeros(3200, complex), R))


def with_truth(s, support, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    x = np.zeros(s.n_unknowns, complex)
    x[list(support)] = rng.standard_normal(len(support)) + 1j * rng.standard_normal(len(support))
    y = s.a @ x
    if noise:
        y = y + noise * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
    return replace(s, y=y), x


@pytest.fixture(scope="module")
def comb(ref_comb):
    return ref_comb[1].restrict(21)


def identity_comb():
    ks = np.arange(-21, 22)
    return CombLines(ks, (ks == 0).astype(complex), 1e9)


def toy(a, y, groups=None):
    a = np.asarray(a, complex)
    groups = np.arange(a.shape[1]) if groups is None else np.asarray(groups)
    n = int(groups.max()) + 1
    return CosetSystem(0.0, np.asarray(y, complex), a, np.arange(1, n + 1) * 1.0,
                       np.zeros(n, bool), np.arange(a.shape[0]) * 1.0, groups)


class TestOmp:
    def test_zero_measurement(self, comb):
        s = system(comb)
        assert not solve_omp(s, 4).any()

    def test_selection_matrix_one_sparse(self):
        base = system(identity_comb())
        visible = np.flatnonzero(np.abs(base.a).sum(axis=0))
        s, x = with_truth(base, [visible[-1]])
        coef = solve_omp(s, 1)
        assert support_of(s, coef) == (visible[-1],)
        np.testing.assert_allclose(coef, x, atol=1e-14)

    def test_stops_at_tolerance(self, comb):
        s, _ = with_truth(system(comb), [3, 30], seed=2)
        coef = solve_omp(s, 4, residual_tol=float(np.vdot(s.y, s.y).real) * 2)
        assert not coef.any()

    def test_max_support_bound(self, comb):
        with pytest.raises(ValueError):
            solve_omp(system(comb), 9)

    def test_rank_deficient_column_dropped(self):
        # unknown 0 is a (re, im) pair whose two columns are parallel
        a = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        s = toy(a, [1.0, 0.1], groups=[0, 0, 1])
        with pytest.warns(RankDeficiencyWarning):
            coef = solve_omp(s, 2)
        assert support_of(s, coef) == (1,)

    def test_noiseless_recovery(self, comb):
        s, x = with_truth(system(comb, 200), [5], seed=4)
        coef = solve_omp(s, 4, residual_tol=1e-30)
        np.testing.assert_allclose(coef, x, atol=1e-10)


class TestExhaustive:
    def test_bound(self, comb):
        with pytest.raises(ValueError, match="exhaustive search bound exceeded"):
            solve_exhaustive_l0(system(comb), 4)

    def test_one_sparse(self, comb):
        s, x = with_truth(system(comb), [11], seed=1)
        coef = solve_exhaustive_l0(s, 2)
        assert support_of(s, coef) == (11,)
        assert residual_power(s, coef) < 1e-20 * float(np.vdot(s.y, s.y).real) + 1e-30

    @pytest.mark.parametrize("support", [(2, 9), (14, 15), (0, 39)])
    def test_two_sparse(self, comb, support):
        s, x = with_truth(system(comb, 77), support, seed=3)
        coef = solve_exhaustive_l0(s, 2)
        assert support_of(s, coef) == support
        np.testing.assert_allclose(coef, x, atol=1e-9 * np.abs(x).max())

    def test_all_zero(self, comb):
        assert support_of(system(comb), solve_exhaustive_l0(system(comb), 2)) == ()

    def test_lexicographic_tie(self):
        # identical columns give identical residuals; the first wins
        s = toy(np.array([[1.0, 1.0], [0.0, 0.0]]), [1.0, 0.0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert support_of(s, solve_exhaustive_l0(s, 1)) == (0,)

    def test_tolerance_prefers_sparser(self, comb):
        s, x = with_truth(system(comb), [4], seed=5, noise=1e-4)
        tol = 8 * 2 * 2e-8
        coef = solve_exhaustive_l0(s, 3, tol)
        assert support_of(s, coef) == (4,)

    def test_table_sizes(self, comb):
        t = exhaustive_table(system(comb), 2)
        assert len(t) == 1 + 40 + 40 * 39 // 2


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 399), st.integers(0, 2**31), st.integers(1, 2))
def test_exhaustive_dominates_omp(ref_comb, f_bins, seed, k):
    s = system(ref_comb[1].restrict(21), f_bins)
    rng = np.random.default_rng(seed)
    sup = sorted(rng.choice(40, size=k, replace=False))
    s, _ = with_truth(s, sup, seed=seed, noise=1e-3)
    omp = solve_omp(s, 2)
    size = len(support_of(s, omp))
    assert best_residual_at_size(s, size) <= residual_power(s, omp) * (1 + 1e-9)
    ex = solve_exhaustive_l0(s, 2)
    assert residual_power(s, ex) <= residual_power(s, omp) * (1 + 1e-9)
