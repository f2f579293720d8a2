"""Optical elements acting on coherent-state superpositions.

Beam-splitter convention (the only one used anywhere in the package)::

    (a, b) -> (a cos t + b sin t,  a sin t - b cos t)

At t = pi/4 this is ((a + b)/sqrt2, (a - b)/sqrt2), second port carrying the
minus sign. The map is a symmetric orthogonal matrix, so applying it twice is
the identity.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from .css import (
    Branch,
    PureState,
    ZeroNormError,
    global_phase_distance,
    norm_squared,
    normalize,
)

QUARTER_PI = math.pi / 4
SQRT_HALF = math.sqrt(0.5)

ONE_DETECTOR = "one_detector"
BOTH_DETECTORS = "both_detectors"
PATTERNS = (ONE_DETECTOR, BOTH_DETECTORS)


class ZeroProbabilityError(ZeroNormError):
    """A post-selection outcome with probability zero was requested."""


def _cos_sin(theta: float) -> tuple[float, float]:
    # exact equal weights at 50:50 so that (a+b) and (b+a) give identical labels
    if theta == QUARTER_PI:
        return SQRT_HALF, SQRT_HALF
    return math.cos(theta), math.sin(theta)


def bs_matrix(theta: float = QUARTER_PI) -> np.ndarray:
    c, s = _cos_sin(theta)
    return np.array([[c, s], [s, -c]])


def apply_bs(state: PureState, i: str, j: str, theta: float = QUARTER_PI) -> PureState:
    """Mix field modes ``i`` and ``j`` on a beam splitter."""
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    ii, jj = state.layout.field_index(i), state.layout.field_index(j)
    c, s = _cos_sin(theta)
    out = []
    for b in state.branches:
        labels = list(b.labels)
        x, y = labels[ii], labels[jj]
        labels[ii] = x * c + y * s
        labels[jj] = x * s - y * c
        out.append(Branch(b.coeff, tuple(labels), b.photons))
    return state.with_branches(out)


def apply_cross_kerr(state: PureState, field_mode: str, photon: str, path: str, phase: float) -> PureState:
    """exp(i phase n_a n_b) with the photon mode b taken as ``path``.

    Branches with the photon on ``path`` get their field label rotated by
    ``phase``; all other branches are untouched.
    """
    fi = state.layout.field_index(field_mode)
    pi = state.layout.photon_index(photon)
    if path not in state.layout.photon_modes[pi].paths:
        raise ValueError(f"path {path!r} not allowed for photon {photon!r}")
    rot = cmath.exp(1j * phase)
    out = []
    for b in state.branches:
        if b.photons[pi][1] == path:
            labels = list(b.labels)
            labels[fi] = labels[fi] * rot
            b = Branch(b.coeff, tuple(labels), b.photons)
        out.append(b)
    return state.with_branches(out)


def pol_rotation_matrix(angle: float = QUARTER_PI) -> np.ndarray:
    """Polarization map, column k = image of basis state k (H=0, V=1).

    At 45 degrees this is H -> (H+V)/sqrt2, V -> (H-V)/sqrt2. Other settings
    interpolate as a plate of retardance 4*angle along the -1 eigenaxis of
    that map, so angle 0 is the identity and every setting is unitary.
    """
    if angle == QUARTER_PI:
        return np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex)
    if angle == 0:
        return np.eye(2, dtype=complex)
    # -1 eigenvector of the 45 degree map
    v = np.array([-math.sin(math.pi / 8), math.cos(math.pi / 8)])
    q = np.outer(v, v)
    return np.eye(2) + (cmath.exp(4j * angle) - 1) * q


def apply_pol_rotation(state: PureState, photon: str, angle: float = QUARTER_PI) -> PureState:
    pi = state.layout.photon_index(photon)
    m = pol_rotation_matrix(angle)
    out = []
    for b in state.branches:
        pol, path = b.photons[pi]
        col = 0 if pol == "H" else 1
        for row, new_pol in enumerate(("H", "V")):
            amp = m[row, col]
            if amp == 0:
                continue
            photons = b.photons[:pi] + ((new_pol, path),) + b.photons[pi + 1:]
            out.append(Branch(b.coeff * complex(amp), b.labels, photons))
    return state.with_branches(out)


def _reroute(state: PureState, photon: str, route) -> PureState:
    pi = state.layout.photon_index(photon)
    allowed = state.layout.photon_modes[pi].paths
    out = []
    for b in state.branches:
        pol, path = b.photons[pi]
        new_path = route(pol, path)
        if new_path not in allowed:
            raise ValueError(f"path {new_path!r} not allowed for photon {photon!r}")
        out.append(Branch(b.coeff, b.labels, b.photons[:pi] + ((pol, new_path),) + b.photons[pi + 1:]))
    return state.with_branches(out)


def apply_pbs(state: PureState, photon: str, in_path: str, h_path: str, v_path: str) -> PureState:
    """Polarizing beam splitter: H is transmitted to ``h_path``, V reflected to ``v_path``."""

    def route(pol, path):
        if path != in_path:
            raise ValueError(f"photon {photon!r} is on path {path!r}, expected {in_path!r}")
        return h_path if pol == "H" else v_path

    return _reroute(state, photon, route)


def combine_pbs(state: PureState, photon: str, h_path: str, v_path: str, out_path: str) -> PureState:
    """A PBS used backwards: H arriving on ``h_path`` and V on ``v_path`` leave on ``out_path``."""

    def route(pol, path):
        expected = h_path if pol == "H" else v_path
        if path != expected:
            raise ValueError(f"{pol} photon {photon!r} is on path {path!r}, expected {expected!r}")
        return out_path

    return _reroute(state, photon, route)


def _project(state: PureState, keep) -> tuple[float, PureState]:
    total = norm_squared(state)
    if total == 0:
        raise ZeroNormError("cannot measure an empty state")
    projected = state.with_branches((b for b in state.branches if keep(b)), normalized=False)
    prob = norm_squared(projected) / total
    try:
        post, _ = normalize(projected)
    except ZeroNormError:
        raise ZeroProbabilityError("requested outcome has probability zero") from None
    if prob == 0:
        raise ZeroProbabilityError("requested outcome has probability zero")
    return prob, post


def measure_polarization(state: PureState, photon: str, outcome: str) -> tuple[float, PureState]:
    """Project ``photon`` onto polarization ``outcome``.

    The probability is the Gram-sum norm of the projected component, not a
    sum of |coeff|^2: coherent branches are not orthogonal. The photon stays
    in the post-measurement state; use :func:`discard_photons` to drop it.
    """
    if outcome not in ("H", "V"):
        raise ValueError(f"outcome must be 'H' or 'V', got {outcome!r}")
    pi = state.layout.photon_index(photon)
    return _project(state, lambda b: b.photons[pi][0] == outcome)


def detector_pattern(state: PureState, photons: Sequence[str], pattern: str) -> tuple[float, PureState]:
    """Post-select on which detectors fire.

    A detector is identified with the photon's path. ``one_detector`` keeps
    branches where all listed photons share one path; ``both_detectors``
    keeps branches where their paths are all distinct.
    """
    if pattern not in PATTERNS:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")
    idx = [state.layout.photon_index(p) for p in photons]
    if len(idx) < 2:
        raise ValueError("a detector pattern needs at least two photons")

    def keep(b):
        paths = [b.photons[i][1] for i in idx]
        if pattern == ONE_DETECTOR:
            return len(set(paths)) == 1
        return len(set(paths)) == len(paths)

    return _project(state, keep)


def discard_photons(state: PureState, photons: Sequence[str], tol: float = 1e-9) -> PureState:
    """Drop absorbed photons and return the conditional field state.

    Branches are grouped by the configuration of the dropped photons. The
    result is pure only if every group is the same state up to a phase;
    otherwise the reduced state is mixed and ValueError is raised.
    """
    idx = sorted(state.layout.photon_index(p) for p in photons)
    layout = state.layout.without_photons(photons)
    groups: dict[tuple, list[Branch]] = {}
    for b in state.branches:
        key = tuple(b.photons[i] for i in idx)
        rest = tuple(p for i, p in enumerate(b.photons) if i not in idx)
        groups.setdefault(key, []).append(Branch(b.coeff, b.labels, rest))
    comps = [PureState(layout, tuple(g)) for g in groups.values()]
    weights = [norm_squared(c) for c in comps]
    if not comps or max(weights) == 0:
        raise ZeroNormError("cannot discard photons from an empty state")
    ref, _ = normalize(comps[int(np.argmax(weights))])
    for c, w in zip(comps, weights):
        if w == 0:
            continue
        unit, _ = normalize(c)
        if global_phase_distance(unit, ref) > tol:
            raise ValueError("discarding these photons leaves a mixed field state")
    return ref
