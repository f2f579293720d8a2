"""Brute-force truncated Fock-basis simulator used as an independent check.

Nothing here uses coherent-state labels after the initial embedding: beam
splitters are built photon-number sector by sector from their generator,
cross-Kerr is a diagonal phase, polarization rotators act on dual-rail
ancilla modes. Only small amplitudes (|alpha| <~ 3) are feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .css import PureState, ZeroNormError
from .elements import QUARTER_PI, SQRT_HALF, ZeroProbabilityError

N_MAX = 40


class TruncationError(ValueError):
    pass


def tail_rule_ok(alpha: complex, n_max: int) -> bool:
    a = abs(alpha)
    return a * a + 6 * a + 10 <= n_max


def _check_tail(alpha: complex, n_max: int) -> None:
    if not tail_rule_ok(alpha, n_max):
        raise TruncationError(f"|alpha|={abs(alpha):.4g} needs n_max >= |alpha|^2 + 6|alpha| + 10, got {n_max}")


@dataclass(frozen=True)
class FockVector:
    """Dense amplitudes over ``n_field`` modes of dimension n_max+1 followed by ancilla modes."""

    n_max: int
    n_field: int
    ancilla_dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ancilla_dims", tuple(self.ancilla_dims))
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != self.dims:
            raise ValueError(f"amplitude shape {amps.shape} does not match {self.dims}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.n_max + 1,) * self.n_field + self.ancilla_dims

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: FockVector) -> complex:
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def normalized(self) -> FockVector:
        n = self.norm()
        if n == 0:
            raise ZeroNormError("zero Fock vector")
        return FockVector(self.n_max, self.n_field, self.ancilla_dims, self.amplitudes / n)

    def with_amplitudes(self, amps: np.ndarray) -> FockVector:
        return FockVector(self.n_max, self.n_field, self.ancilla_dims, amps)


def fock_fidelity(u: FockVector, v: FockVector) -> float:
    return abs(u.inner(v)) ** 2 / (u.norm() ** 2 * v.norm() ** 2)


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    # e^{-|a|^2/2} a^n / sqrt(n!) in log form
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def fock_coherent(alpha: complex, n_max: int = N_MAX) -> FockVector:
    _check_tail(alpha, n_max)
    return FockVector(n_max, 1, (), coherent_amplitudes(alpha, n_max))


def fock_basis(n: int, n_max: int = N_MAX) -> FockVector:
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(n_max, 1, (), amps)


def fock_tensor(*vs: FockVector) -> FockVector:
    """Tensor product; field modes are gathered first, then ancillas, in argument order."""
    n_max = vs[0].n_max
    if any(v.n_max != n_max for v in vs):
        raise ValueError("all factors need the same n_max")
    amps = vs[0].amplitudes
    for v in vs[1:]:
        amps = np.multiply.outer(amps, v.amplitudes)
    # reorder axes: fields of each factor, then ancillas of each factor
    field_axes, anc_axes, offset = [], [], 0
    for v in vs:
        field_axes += list(range(offset, offset + v.n_field))
        anc_axes += list(range(offset + v.n_field, offset + v.n_field + len(v.ancilla_dims)))
        offset += v.n_field + len(v.ancilla_dims)
    amps = np.transpose(amps, field_axes + anc_axes)
    return FockVector(n_max, sum(v.n_field for v in vs), sum((v.ancilla_dims for v in vs), ()), amps)


def ancilla(dims: Sequence[int], occupation: Sequence[int], n_max: int = N_MAX) -> FockVector:
    amps = np.zeros(tuple(dims), dtype=complex)
    amps[tuple(occupation)] = 1.0
    return FockVector(n_max, 0, tuple(dims), amps)


def _apply_two_mode(v: FockVector, i: int, j: int, u: np.ndarray) -> FockVector:
    d1, d2 = v.dims[i], v.dims[j]
    amps = np.moveaxis(v.amplitudes, (i, j), (0, 1))
    shape = amps.shape
    amps = (u @ amps.reshape(d1 * d2, -1)).reshape(shape)
    return v.with_amplitudes(np.moveaxis(amps, (0, 1), (i, j)))


@lru_cache(maxsize=32)
def bs_unitary(d1: int, d2: int, theta: float) -> np.ndarray:
    """Two-mode mixer with a^dag -> c a^dag + s b^dag, b^dag -> s a^dag - c b^dag.

    Built as exp(theta (b^dag a - a^dag b)) times the parity of mode b, one
    total-photon-number sector at a time, so every sector that fits inside
    the d1 x d2 box is exactly unitary.
    """
    u = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for n in range(d1 + d2 - 1):
        # basis |p, n-p>, p = 0..n
        p = np.arange(n + 1)
        gen = np.zeros((n + 1, n + 1))
        # b^dag a |p, n-p> = sqrt(p) sqrt(n-p+1) |p-1, n-p+1>
        amp = np.sqrt(p[1:] * (n - p[1:] + 1.0))
        gen[p[1:] - 1, p[1:]] += amp
        gen[p[1:], p[1:] - 1] -= amp
        rot = expm(theta * gen) * ((-1.0) ** (n - p))[None, :]
        inside = (p < d1) & (n - p < d2)
        idx = p[inside] * d2 + (n - p[inside])
        u[np.ix_(idx, idx)] = rot[np.ix_(inside, inside)]
    return u


def fock_bs(v: FockVector, i: int, j: int, theta: float = QUARTER_PI) -> FockVector:
    """Beam splitter on axes ``i``, ``j`` (field or ancilla), same convention as the CSS model."""
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    return _apply_two_mode(v, i, j, bs_unitary(v.dims[i], v.dims[j], float(theta)))


def fock_cross_kerr(v: FockVector, field_mode: int, ancilla_index: int, phi: float) -> FockVector:
    """exp(i phi n_a n_b) between a field axis and an ancilla mode."""
    if not 0 <= field_mode < v.n_field:
        raise ValueError(f"no field mode {field_mode}")
    axis = v.n_field + ancilla_index
    if not 0 <= ancilla_index < len(v.ancilla_dims):
        raise ValueError(f"no ancilla {ancilla_index}")
    n = np.arange(v.dims[field_mode])
    m = np.arange(v.dims[axis])
    phase = np.exp(1j * phi * np.multiply.outer(n, m))
    shape = [1] * len(v.dims)
    shape[field_mode], shape[axis] = len(n), len(m)
    return v.with_amplitudes(v.amplitudes * phase.reshape(shape))


def fock_project(v: FockVector, ancilla_occupation: Sequence[int]) -> FockVector:
    """Unnormalized field component for a fixed occupation of all ancilla modes."""
    amps = v.amplitudes[(Ellipsis,) + tuple(ancilla_occupation)]
    return FockVector(v.n_max, v.n_field, (), amps)


def reduced_density(v: FockVector, mode: int) -> np.ndarray:
    amps = np.moveaxis(v.amplitudes, mode, 0).reshape(v.dims[mode], -1)
    return amps @ amps.conj().T


def fock_parity(v: FockVector, mode: int = 0) -> float:
    """<(-1)^n> on one mode of a normalized vector."""
    rho = reduced_density(v, mode)
    signs = (-1.0) ** np.arange(rho.shape[0])
    return float(np.real(np.sum(signs * np.diag(rho))) / np.real(np.trace(rho)))


def fock_displace(v: FockVector, mode: int, beta: complex, pad: int = 40) -> FockVector:
    """Apply D(beta) on a field mode, exponentiating the generator in a padded space."""
    d = v.dims[mode] + pad
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    gen = beta * a.conj().T - np.conj(beta) * a
    dm = expm(gen)[: v.dims[mode], : v.dims[mode]]
    amps = np.moveaxis(v.amplitudes, mode, 0)
    shape = amps.shape
    amps = (dm @ amps.reshape(shape[0], -1)).reshape(shape)
    return v.with_amplitudes(np.moveaxis(amps, 0, mode))


def fock_wigner(v: FockVector, beta: complex, mode: int = 0) -> float:
    """(2/pi) times the parity of D(-beta)|v>, with D built by matrix exponential.

    The displaced state must still fit: n_max has to satisfy the tail rule for
    max |label| + |beta|, not only for the labels of ``v``.
    """
    return 2.0 / math.pi * fock_parity(fock_displace(v, mode, -beta), mode)


def css_to_fock(s: PureState, n_max: int = N_MAX) -> FockVector:
    """Embed a CSS state. Each photon becomes one ancilla axis indexed by (pol, path)."""
    for b in s.branches:
        for z in b.labels:
            _check_tail(z, n_max)
    nf = len(s.layout.field_modes)
    anc = tuple(2 * len(p.paths) for p in s.layout.photon_modes)
    amps = np.zeros((n_max + 1,) * nf + anc, dtype=complex)
    for b in s.branches:
        t = np.array(b.coeff, dtype=complex)
        for z in b.labels:
            t = np.multiply.outer(t, coherent_amplitudes(z, n_max))
        idx = tuple(("H", "V").index(pol) * len(pm.paths) + pm.paths.index(path)
                    for (pol, path), pm in zip(b.photons, s.layout.photon_modes))
        amps[(Ellipsis,) + idx] += t if nf else t.reshape(())
    return FockVector(n_max, nf, anc, amps)


@dataclass(frozen=True)
class OracleResult:
    prob: float
    o2: FockVector
    purity: float


def oracle_protocol1(alpha: complex, phi: float, outcome: str = "H", n_max: int = N_MAX,
                     phi2: float | None = None) -> OracleResult:
    """Single-photon scheme in the Fock basis.

    Modes: a1, a2 (field), then the photon as two dual-rail ancillas
    (H occupation, V occupation). The o2 state returned is the dominant
    eigenvector of the reduced o2 density matrix.
    """
    if outcome not in ("H", "V"):
        raise ValueError(f"outcome must be 'H' or 'V', got {outcome!r}")
    phi2 = phi if phi2 is None else phi2
    source = math.sqrt(2.0) * complex(alpha)
    _check_tail(source, n_max)
    photon = ancilla((2, 2), (1, 0), n_max).amplitudes * SQRT_HALF + ancilla((2, 2), (0, 1), n_max).amplitudes * SQRT_HALF
    v = fock_tensor(fock_coherent(source, n_max), fock_basis(0, n_max), FockVector(n_max, 0, (2, 2), photon))
    v = fock_bs(v, 0, 1)
    v = fock_cross_kerr(v, 0, 0, phi)
    v = fock_cross_kerr(v, 1, 1, phi2)
    v = fock_bs(v, 2, 3)  # 45 degree rotator on the dual-rail photon
    total = v.norm() ** 2
    comp = fock_project(v, (1, 0) if outcome == "H" else (0, 1))
    prob = comp.norm() ** 2 / total
    if prob < 1e-300:
        raise ZeroProbabilityError("requested outcome has probability zero")
    comp = fock_bs(comp.normalized(), 0, 1)
    rho = reduced_density(comp, 1)
    w, vecs = np.linalg.eigh(rho)
    top = vecs[:, -1]
    return OracleResult(prob, FockVector(n_max, 1, (), top), float(np.real(np.trace(rho @ rho))))
