"""Per-offset aliasing systems linking the down-converted spectrum to the input spectrum.

A down-converted bin at ``nu`` collects ``scale * S_k * X(nu - k*df)`` over all
comb lines. For an offset ``0 < f < df/2`` the bins ``l*df + f`` and
``l*df - f`` inside the low-pass band see only the input frequencies
``j*df + f`` and ``j*df - f``; using ``X(-v) = conj(X(v))`` every such bin is
linear in ``X(j*df + f)`` and ``conj(X(j*df - f))``. Rows from the ``-f`` set
are stored conjugated so the whole system is complex-linear in that vector.

The two self-conjugate offsets ``f = 0`` and ``f = df/2`` mix ``X`` and
``conj(X)`` of the same frequency in one row; they are handled by a
real-valued system with one (re, im) column pair per unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..frontend import CombLines
from ..signals import SpectrumGrid, on_grid

_TOL = 1e-6


@dataclass(frozen=True)
class MatrixSpec:
    """Static description of the measurement model.

    ``equalizer``, when given, is the known receiver response; measured bins
    are divided by it before they enter a system.
    """

    comb: CombLines
    lpf_cutoff: float = 2e9
    span: float = 20e9
    scale: complex = 1.0
    equalizer: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        k_use = int(max(abs(self.comb.k[0]), abs(self.comb.k[-1])))
        if k_use * self.spacing + self.spacing / 2 < self.span:
            raise ValueError("comb lines do not cover the span")

    @property
    def spacing(self) -> float:
        return self.comb.spacing

    @property
    def k_use(self) -> int:
        return int(self.comb.k[-1])


@dataclass(frozen=True)
class CosetSystem:
    """Measurements ``y`` and matrix ``a`` for one coset offset.

    ``groups[c]`` is the unknown that column ``c`` belongs to; complex systems
    have one column per unknown, real-form systems have (re, im) pairs.
    ``conj_flags[u]`` marks unknowns whose coefficient is ``conj(X)``.
    """

    f_offset: float
    y: np.ndarray
    a: np.ndarray
    unknown_freqs: np.ndarray
    conj_flags: np.ndarray
    row_freqs: np.ndarray
    groups: np.ndarray
    real_form: bool = False

    @property
    def n_rows(self) -> int:
        """Number of complex measurements."""
        return self.row_freqs.size

    @property
    def n_unknowns(self) -> int:
        return self.unknown_freqs.size

    @property
    def degenerate(self) -> bool:
        return self.real_form

    def group_columns(self):
        return [np.flatnonzero(self.groups == g) for g in range(self.n_unknowns)]

    def to_complex(self, coef: np.ndarray) -> np.ndarray:
        """Map a solver coefficient vector to ``X`` at ``unknown_freqs``."""
        coef = np.asarray(coef)
        if self.real_form:
            out = np.zeros(self.n_unknowns, dtype=complex)
            np.add.at(out, self.groups[0::2], coef[0::2])
            np.add.at(out, self.groups[1::2], 1j * coef[1::2])
            return out
        return np.where(self.conj_flags, np.conj(coef), coef)

    def from_complex(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.real_form:
            out = np.empty(self.a.shape[1])
            out[0::2] = x.real
            out[1::2] = x.imag
            return out
        return np.where(self.conj_flags, np.conj(x), x)


def _measured_rows(
    m: MatrixSpec, measured: SpectrumGrid, nu: np.ndarray
) -> np.ndarray:
    y = measured.at(nu)
    if m.equalizer is not None:
        y = y / m.equalizer(nu)
    return y


def _check_offset(m: MatrixSpec, f_offset: float, measured: SpectrumGrid) -> None:
    if not on_grid(f_offset, measured.resolution):
        raise ValueError("coset offset not on the resolution grid")


def build_coset_system(
    m: MatrixSpec, f_offset: float, measured: SpectrumGrid
) -> CosetSystem:
    df = m.spacing
    tol = _TOL * measured.resolution
    _check_offset(m, f_offset, measured)
    if abs(f_offset) < tol or abs(f_offset - df / 2) < tol:
        raise ValueError("degenerate coset")
    if not 0 < f_offset < df / 2:
        raise ValueError("coset offset must lie in (0, spacing/2)")

    l_max = int(np.ceil(m.lpf_cutoff / df)) + 1
    ls = np.arange(-l_max, l_max + 1)
    l_plus = ls[np.abs(ls * df + f_offset) < m.lpf_cutoff - tol]
    l_minus = ls[np.abs(ls * df - f_offset) < m.lpf_cutoff - tol]

    j_plus = np.arange(0, int(np.ceil(m.span / df)) + 1)
    j_plus = j_plus[j_plus * df + f_offset < m.span - tol]
    j_minus = np.arange(1, int(np.ceil(m.span / df)) + 2)
    j_minus = j_minus[j_minus * df - f_offset < m.span - tol]

    freqs = np.concatenate([j_plus * df + f_offset, j_minus * df - f_offset])
    conj = np.concatenate([np.zeros(j_plus.size, bool), np.ones(j_minus.size, bool)])
    js = np.concatenate([j_plus, j_minus])
    order = np.argsort(freqs, kind="stable")
    freqs, conj, js = freqs[order], conj[order], js[order]

    s = m.comb
    # rows from +f: plus columns see S[l-j]; conj(minus) columns see S[l+j]
    k_fp = np.where(conj[None, :], l_plus[:, None] + js[None, :], l_plus[:, None] - js[None, :])
    # rows from -f, conjugated: minus columns see conj S[l-j]; plus columns conj S[l+j]
    k_fm = np.where(conj[None, :], l_minus[:, None] - js[None, :], l_minus[:, None] + js[None, :])
    a = np.vstack([m.scale * s[k_fp], np.conj(m.scale * s[k_fm])])

    nu_p = l_plus * df + f_offset
    nu_m = l_minus * df - f_offset
    y = np.concatenate(
        [_measured_rows(m, measured, nu_p), np.conj(_measured_rows(m, measured, nu_m))]
    )
    return CosetSystem(
        f_offset=float(f_offset),
        y=y,
        a=a,
        unknown_freqs=freqs,
        conj_flags=conj,
        row_freqs=np.concatenate([nu_p, nu_m]),
        groups=np.arange(freqs.size),
        real_form=False,
    )


def build_degenerate_system(
    m: MatrixSpec, f_offset: float, measured: SpectrumGrid
) -> CosetSystem:
    """Real-form system for the self-conjugate offsets ``0`` and ``spacing/2``.

    Each row reads ``Y = P*X + Q*conj(X)`` summed over unknowns, i.e.
    ``(P + Q)*Re(X) + 1j*(P - Q)*Im(X)``; stacking real and imaginary parts
    gives a real system. DC is not an unknown.
    """
    df = m.spacing
    tol = _TOL * measured.resolution
    _check_offset(m, f_offset, measured)
    if abs(f_offset) < tol:
        h, c = 0.0, 0
    elif abs(f_offset - df / 2) < tol:
        h, c = df / 2, 1
    else:
        raise ValueError("offset is not degenerate")

    l_max = int(np.ceil(m.lpf_cutoff / df)) + 1
    ls = np.arange(-l_max, l_max + 1)
    ls = ls[np.abs(ls * df + h) < m.lpf_cutoff - tol]
    js = np.arange(1 if c == 0 else 0, int(np.ceil(m.span / df)) + 1)
    js = js[js * df + h < m.span - tol]

    s = m.comb
    p = m.scale * s[ls[:, None] - js[None, :]]
    q = m.scale * s[ls[:, None] + js[None, :] + c]
    cols_re = p + q
    cols_im = 1j * (p - q)
    cplx = np.empty((ls.size, 2 * js.size), dtype=complex)
    cplx[:, 0::2] = cols_re
    cplx[:, 1::2] = cols_im
    a = np.vstack([cplx.real, cplx.imag])

    nu = ls * df + h
    y_c = _measured_rows(m, measured, nu)
    return CosetSystem(
        f_offset=float(h),
        y=np.concatenate([y_c.real, y_c.imag]),
        a=a,
        unknown_freqs=js * df + h,
        conj_flags=np.zeros(js.size, bool),
        row_freqs=nu,
        groups=np.repeat(np.arange(js.size), 2),
        real_form=True,
    )
