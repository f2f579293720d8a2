"""Wigner function of single-mode CSS states and parameter sweeps.

The Wigner function is the displaced parity W(beta) = (2/pi) Tr[rho D(beta) P D(beta)^dag].
For coherent kets the operator is closed form,

    D(beta) P D(beta)^dag |a> = exp(-2i Im(beta conj(a))) |2 beta - a>,

so every point is a finite sum of coherent overlaps with no quadrature.
Phase-space coordinates are x = Re(beta), p = Im(beta); with this choice
the integral of W over dx dp is 1.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .css import MixedOperator, PureState, overlap_exponent
from .protocols import cat_amplitude_approx, run_protocol1_imperfect

TWO_OVER_PI = 2.0 / math.pi


def _single_mode(state: PureState | MixedOperator, mode: str) -> None:
    fm = state.layout.field_modes
    if len(fm) != 1:
        raise ValueError(f"Wigner function needs a single-mode state, got modes {fm}")
    if fm[0] != mode:
        raise ValueError(f"unknown field mode {mode!r}")


def _parity_kernel(ket_labels: np.ndarray, bra_labels: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """<bra| D(beta) P D(beta)^dag |ket>, broadcast over all three arguments."""
    shifted = 2 * beta - ket_labels
    phase = -2 * (beta.imag * ket_labels.real - beta.real * ket_labels.imag)
    return np.exp(overlap_exponent(bra_labels, shifted) + 1j * phase)


def _wigner_values(state: PureState | MixedOperator, beta: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta, dtype=complex)
    if isinstance(state, PureState):
        br = state.branches
        c = state.coeffs
        lab = state.label_matrix[:, 0]
        out = np.zeros(beta.shape)
        for j in range(len(br)):
            for k in range(len(br)):
                if br[j].photons != br[k].photons:
                    continue
                w = c[j] * np.conj(c[k])
                out += np.real(w * _parity_kernel(lab[j], lab[k], beta))
        return TWO_OVER_PI * out
    out = np.zeros(beta.shape)
    for t in state.terms:
        if t.ket.photons != t.bra.photons:
            continue
        val = np.real(t.weight * _parity_kernel(t.ket.labels[0], t.bra.labels[0], beta))
        out += val if t.diagonal else 2 * val
    return TWO_OVER_PI * out


def wigner_point(state: PureState | MixedOperator, mode: str, beta: complex) -> float:
    _single_mode(state, mode)
    return float(_wigner_values(state, np.array(complex(beta))))


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # values[i, j] = W(x[i] + 1j p[j])

    def integral(self) -> float:
        """Trapezoid quadrature of W over the grid."""
        return float(trapezoid(trapezoid(self.values, self.p, axis=1), self.x))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,p,w\n")
        for i, xv in enumerate(self.x):
            for j, pv in enumerate(self.p):
                buf.write(f"{xv:.17g},{pv:.17g},{self.values[i, j]:.17g}\n")
        return buf.getvalue()


def wigner_grid(state: PureState | MixedOperator, mode: str, x_range: tuple[float, float],
                p_range: tuple[float, float], nx: int, np_: int) -> WignerGrid:
    _single_mode(state, mode)
    if nx < 1 or np_ < 1 or x_range[0] > x_range[1] or p_range[0] > p_range[1]:
        raise ValueError("empty grid")
    x = np.linspace(x_range[0], x_range[1], nx)
    p = np.linspace(p_range[0], p_range[1], np_)
    beta = x[:, None] + 1j * p[None, :]
    return WignerGrid(x, p, _wigner_values(state, beta))


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRecord:
    alpha: complex
    phi: float
    epsilon: float
    outcome_prob: float
    fid: float
    w0: float
    gamma_phi: complex


def sweep_point(alpha: complex, phi: float, epsilon: float) -> SweepRecord:
    """H-outcome probability, fidelity with the ideal even cat and o2 Wigner value
    at the origin, all for Kerr phases (phi, phi + epsilon)."""
    res = run_protocol1_imperfect(alpha, phi, epsilon)
    w0 = wigner_point(res.rho_o2, "o2", 0)
    return SweepRecord(complex(alpha), float(phi), float(epsilon), res.outcome_prob, res.fid, w0,
                       cat_amplitude_approx(complex(alpha), phi))


def sweep(alphas: Sequence[complex], phis: Sequence[float], epsilons: Sequence[float]) -> list[SweepRecord]:
    """One record per grid point, lexicographic in (alpha, phi, epsilon)."""
    if not len(alphas) or not len(phis) or not len(epsilons):
        raise ValueError("every swept parameter needs at least one value")
    return [sweep_point(a, ph, e) for a, ph, e in itertools.product(alphas, phis, epsilons)]


def format_complex(z: complex) -> str:
    """17-digit ``a+bi`` literal, the same syntax the CLI accepts."""
    z = complex(z)
    im = f"{z.imag:.17g}"
    sign = "" if im.startswith("-") else "+"
    return f"{z.real:.17g}{sign}{im}i"


def _fmt(v) -> str:
    if isinstance(v, complex):
        return format_complex(v)
    return f"{v:.17g}"


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRecord))


def sweep_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def sweep_to_json(records: Iterable[SweepRecord]) -> list[dict]:
    out = []
    for r in records:
        d = {}
        for name, v in zip(SWEEP_COLUMNS, astuple(r)):
            d[name] = [v.real, v.imag] if isinstance(v, complex) else v
        out.append(d)
    return out
