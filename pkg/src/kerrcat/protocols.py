"""End-to-end cat-generation pipelines built from the optical elements.

Single-photon scheme: a coherent beam of amplitude sqrt2*alpha is split into
a1, a2; a photon in (H+V)/sqrt2 is routed by a PBS so that its H part
cross-Kerr couples to a1 and its V part to a2; the photon is recombined,
rotated by 45 degrees, analysed on a second PBS and detected. The detected
polarization leaves a1, a2 in an entangled coherent state, and a final 50:50
beam splitter turns that into a coherent state in o1 times a cat in o2.

Twin-photon scheme: the same field preparation, but two photons in the
singlet, b1 coupling to a1 and b2 to a2. Both photons are rotated and sent
into the two input ports of one PBS; whether one detector or both fire
selects the even or odd entangled coherent state.

Checkpoint names (stable API): ``eq3`` post-Kerr, ``eq4`` post-rotation,
``eq5``/``eq6`` post-selected field state, ``eq7`` after the final beam
splitter. The twin scheme records ``twin_kerr`` and ``eq8`` instead of
``eq3``/``eq4``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .css import (
    Branch,
    COEFF_TOL,
    LABEL_TOL,
    MixedOperator,
    MixedTerm,
    ModeLayout,
    PhotonMode,
    PureState,
    fidelity_mixed_pure,
    fidelity_pure,
    merge_prune,
    normalize,
    partial_trace_field,
    state_from_dict,
)
from .elements import (
    BOTH_DETECTORS,
    ONE_DETECTOR,
    QUARTER_PI,
    SQRT_HALF,
    ZeroProbabilityError,
    apply_bs,
    apply_cross_kerr,
    apply_pbs,
    apply_pol_rotation,
    combine_pbs,
    detector_pattern,
    discard_photons,
    measure_polarization,
)

SQRT2 = math.sqrt(2.0)

SINGLE_PHOTON_PATHS = ("in", "arm1", "arm2", "det_h", "det_v")
TWIN_PHOTON_PATHS = ("in", "kerr", "bypass", "det1", "det2")

# Ports of the shared PBS in the twin scheme: photon -> (H exit, V exit).
# Photons of opposite polarization exit the same port (one detector fires),
# photons of equal polarization exit different ports (both fire). Swapping
# the b2 entry swaps which pattern heralds the even entangled state.
TWIN_PBS_PORTS = {"b1": ("det1", "det2"), "b2": ("det2", "det1")}

PATTERN_CHECKPOINT = {ONE_DETECTOR: "eq5", BOTH_DETECTORS: "eq6"}
OUTCOME_CHECKPOINT = {"H": "eq5", "V": "eq6"}


@dataclass(frozen=True)
class CatSpec:
    gamma: complex
    parity: str = "+"

    def __post_init__(self):
        p = {"+": "+", "-": "-", "even": "+", "odd": "-"}.get(self.parity)
        if p is None:
            raise ValueError(f"parity must be '+' or '-', got {self.parity!r}")
        object.__setattr__(self, "parity", p)
        object.__setattr__(self, "gamma", complex(self.gamma))


def build_cat(spec: CatSpec, mode: str = "o2") -> PureState:
    """Normalized N(|gamma> +/- |-gamma>) on a single field mode."""
    sign = 1.0 if spec.parity == "+" else -1.0
    raw = PureState.from_terms(ModeLayout((mode,)), [(1.0, (spec.gamma,)), (sign, (-spec.gamma,))])
    state, _ = normalize(raw)
    return state


def cat_norm(gamma: complex, parity: str = "+") -> float:
    """Length of the unnormalized |gamma> +/- |-gamma>, sqrt(2 +/- 2 exp(-2|gamma|^2))."""
    sign = 1.0 if CatSpec(gamma, parity).parity == "+" else -1.0
    return math.sqrt(2.0 + sign * 2.0 * math.exp(-2.0 * abs(gamma) ** 2))


def cat_amplitude_exact(alpha: complex, phi: float) -> complex:
    """(alpha - alpha e^{i phi}) / sqrt2, the o2 label of the |alpha, alpha'> branch."""
    return (alpha - alpha * cmath.exp(1j * phi)) / SQRT2


def cat_amplitude_approx(alpha: complex, phi: float) -> complex:
    """gamma*phi with gamma = -i alpha / sqrt2 (first order in phi)."""
    return -1j * alpha * phi / SQRT2


@dataclass
class ProtocolResult:
    protocol: int
    alpha: complex
    phi: float
    outcome: str
    outcome_prob: float
    checkpoints: dict[str, PureState]
    cat_o2: PureState
    o1_label: complex
    cat_amplitude_exact: complex
    cat_amplitude_approx: complex

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "alpha": [self.alpha.real, self.alpha.imag],
            "phi": self.phi,
            "outcome": self.outcome,
            "outcome_prob": self.outcome_prob,
            "cat_amplitude_exact": [self.cat_amplitude_exact.real, self.cat_amplitude_exact.imag],
            "cat_amplitude_approx": [self.cat_amplitude_approx.real, self.cat_amplitude_approx.imag],
            "o1_label": [self.o1_label.real, self.o1_label.imag],
            "checkpoints": {k: v.to_dict() for k, v in self.checkpoints.items()},
            "cat_o2": self.cat_o2.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ProtocolResult:
        return cls(
            protocol=int(d["protocol"]),
            alpha=complex(*d["alpha"]),
            phi=float(d["phi"]),
            outcome=d["outcome"],
            outcome_prob=float(d["outcome_prob"]),
            checkpoints={k: state_from_dict(v) for k, v in d["checkpoints"].items()},
            cat_o2=state_from_dict(d["cat_o2"]),
            o1_label=complex(*d["o1_label"]),
            cat_amplitude_exact=complex(*d["cat_amplitude_exact"]),
            cat_amplitude_approx=complex(*d["cat_amplitude_approx"]),
        )


def _check_alpha(alpha: complex) -> complex:
    alpha = complex(alpha)
    if abs(alpha) == 0:
        raise ValueError("alpha must be nonzero")
    return alpha


def _split_field(layout: ModeLayout, alpha: complex, photon_terms) -> PureState:
    # sqrt2*alpha in a1, vacuum in a2, then a 50:50 splitter gives |alpha, alpha>
    s = PureState.from_terms(layout, [(c, (SQRT2 * alpha, 0j), ph) for c, ph in photon_terms], normalized=True)
    return apply_bs(s, "a1", "a2")


def _single_photon_field(alpha: complex, phase1: float, phase2: float, outcome: str):
    layout = ModeLayout(("a1", "a2"), (PhotonMode("b", SINGLE_PHOTON_PATHS),))
    s = _split_field(layout, alpha, [(SQRT_HALF, (("H", "in"),)), (SQRT_HALF, (("V", "in"),))])
    s = apply_pbs(s, "b", "in", "arm1", "arm2")
    s = apply_cross_kerr(s, "a1", "b", "arm1", phase1)
    s = apply_cross_kerr(s, "a2", "b", "arm2", phase2)
    eq3 = combine_pbs(s, "b", "arm1", "arm2", "in")
    eq4 = apply_pol_rotation(eq3, "b", QUARTER_PI)
    s = apply_pbs(eq4, "b", "in", "det_h", "det_v")
    prob, s = measure_polarization(s, "b", outcome)
    field_state = discard_photons(s, ["b"])
    return {"eq3": eq3, "eq4": eq4, OUTCOME_CHECKPOINT[outcome]: field_state}, prob, field_state


def _recombine(field_state: PureState) -> tuple[PureState, complex, PureState]:
    eq7 = apply_bs(field_state, "a1", "a2").relabel({"a1": "o1", "a2": "o2"})
    o1_label, cat = merge_prune(eq7, LABEL_TOL, COEFF_TOL).factor_field_mode("o1")
    cat, _ = normalize(merge_prune(cat))
    return eq7, o1_label, cat


def run_protocol1(alpha: complex, phi: float, outcome: str = "H") -> ProtocolResult:
    """Single-photon scheme, post-selected on detecting polarization ``outcome``."""
    alpha = _check_alpha(alpha)
    if outcome not in OUTCOME_CHECKPOINT:
        raise ValueError(f"outcome must be 'H' or 'V', got {outcome!r}")
    checkpoints, prob, field_state = _single_photon_field(alpha, phi, phi, outcome)
    eq7, o1_label, cat = _recombine(field_state)
    checkpoints["eq7"] = eq7
    return ProtocolResult(1, alpha, float(phi), outcome, prob, checkpoints, cat, o1_label,
                          cat_amplitude_exact(alpha, phi), cat_amplitude_approx(alpha, phi))


def outcome_probabilities(alpha: complex, phi: float) -> dict[str, float]:
    """Born probabilities of the H and V detections in the single-photon scheme."""
    out = {}
    for o in ("H", "V"):
        try:
            out[o] = _single_photon_field(_check_alpha(alpha), phi, phi, o)[1]
        except ZeroProbabilityError:
            out[o] = 0.0
    return out


def sample_protocol1(alpha: complex, phi: float, seed: int | None = None) -> ProtocolResult:
    """Run the single-photon scheme with the detection outcome drawn at random."""
    rng = np.random.default_rng(seed)
    p = outcome_probabilities(alpha, phi)
    outcome = "H" if rng.random() < p["H"] else "V"
    return run_protocol1(alpha, phi, outcome)


def twin_photon_layout() -> ModeLayout:
    return ModeLayout(("a1", "a2"), (PhotonMode("b1", TWIN_PHOTON_PATHS), PhotonMode("b2", TWIN_PHOTON_PATHS)))


def run_protocol2(alpha: complex, phi: float, pattern: str = ONE_DETECTOR) -> ProtocolResult:
    """Twin-photon scheme, post-selected on the detector ``pattern``."""
    alpha = _check_alpha(alpha)
    if pattern not in PATTERN_CHECKPOINT:
        raise ValueError(f"pattern must be one of {tuple(PATTERN_CHECKPOINT)}, got {pattern!r}")
    singlet = [(SQRT_HALF, (("H", "in"), ("V", "in"))), (-SQRT_HALF, (("V", "in"), ("H", "in")))]
    s = _split_field(twin_photon_layout(), alpha, singlet)
    for photon, mode in (("b1", "a1"), ("b2", "a2")):
        s = apply_pbs(s, photon, "in", "kerr", "bypass")
        s = apply_cross_kerr(s, mode, photon, "kerr", phi)
        s = combine_pbs(s, photon, "kerr", "bypass", "in")
    twin_kerr = s
    s = apply_pol_rotation(s, "b1", QUARTER_PI)
    eq8 = apply_pol_rotation(s, "b2", QUARTER_PI)
    s = eq8
    for photon, (h_port, v_port) in TWIN_PBS_PORTS.items():
        s = apply_pbs(s, photon, "in", h_port, v_port)
    prob, s = detector_pattern(s, ("b1", "b2"), pattern)
    field_state = discard_photons(s, ["b1", "b2"])
    eq7, o1_label, cat = _recombine(field_state)
    checkpoints = {"twin_kerr": twin_kerr, "eq8": eq8, PATTERN_CHECKPOINT[pattern]: field_state, "eq7": eq7}
    return ProtocolResult(2, alpha, float(phi), pattern, prob, checkpoints, cat, o1_label,
                          cat_amplitude_exact(alpha, phi), cat_amplitude_approx(alpha, phi))


def pattern_probabilities(alpha: complex, phi: float) -> dict[str, float]:
    out = {}
    for p in PATTERN_CHECKPOINT:
        try:
            out[p] = run_protocol2(alpha, phi, p).outcome_prob
        except ZeroProbabilityError:
            out[p] = 0.0
    return out


# --------------------------------------------------------------------------
# unequal Kerr phases


@dataclass(frozen=True)
class KerrSetting:
    phi: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.epsilon)):
            raise ValueError("Kerr phases must be finite")


@dataclass(frozen=True)
class ImperfectResult:
    rho_o2: MixedOperator
    fid: float
    outcome_prob: float = float("nan")

    def __iter__(self):
        return iter((self.rho_o2, self.fid))


def _imperfect_pipeline(alpha: complex, phi: float, epsilon: float) -> tuple[float, PureState]:
    setting = KerrSetting(phi, epsilon)
    _, prob, field_state = _single_photon_field(_check_alpha(alpha), setting.phi, setting.phi + setting.epsilon, "H")
    return prob, field_state


def _trace_o1(field_state: PureState) -> MixedOperator:
    out = apply_bs(field_state, "a1", "a2").relabel({"a1": "o1", "a2": "o2"})
    rho, _ = partial_trace_field(out, "o1").normalize()
    return rho


def imperfect_field_state(alpha: complex, phi: float, epsilon: float) -> PureState:
    """Normalized |alpha', alpha> + |alpha, alpha''> after an H detection,
    with alpha'' = alpha e^{i(phi + epsilon)}."""
    return _imperfect_pipeline(alpha, phi, epsilon)[1]


def imperfect_rho_o2(alpha: complex, phi: float, epsilon: float) -> MixedOperator:
    return _trace_o1(imperfect_field_state(alpha, phi, epsilon))


def run_protocol1_imperfect(alpha: complex, phi: float, epsilon: float) -> ImperfectResult:
    """o2 state for unequal Kerr phases, its fidelity with the ideal even cat,
    and the probability of the H detection that heralds it."""
    prob, field_state = _imperfect_pipeline(alpha, phi, epsilon)
    rho = _trace_o1(field_state)
    target = run_protocol1(alpha, phi, "H").cat_o2
    return ImperfectResult(rho, fidelity_mixed_pure(rho, target), prob)


def cross_phase(alpha: complex, phi: float, epsilon: float) -> tuple[float, float]:
    """Phase of the o2 coherence after tracing o1: (exact, leading order).

    Exact is arg <u2|u1> for the o1 labels u1 = (alpha + alpha')/sqrt2 and
    u2 = (alpha + alpha'')/sqrt2; to leading order it is -|alpha|^2 epsilon.
    """
    alpha = complex(alpha)
    u1 = (alpha + alpha * cmath.exp(1j * phi)) / SQRT2
    u2 = (alpha + alpha * cmath.exp(1j * (phi + epsilon))) / SQRT2
    exact = (np.conj(u2) * u1).imag
    return float(exact), -abs(alpha) ** 2 * epsilon


def leading_order_rho_o2(alpha: complex, phi: float, epsilon: float) -> MixedOperator:
    """Four-term o2 operator with the cross coherence replaced by its leading
    order value exp(-i |alpha|^2 epsilon) (unit magnitude); normalized."""
    alpha = _check_alpha(alpha)
    a1 = alpha * cmath.exp(1j * phi)
    a2 = alpha * cmath.exp(1j * (phi + epsilon))
    c = SQRT_HALF
    # o2 labels as produced by apply_bs on |alpha', alpha> and |alpha, alpha''>
    b1, b2 = a1 * c - alpha * c, alpha * c - a2 * c
    layout = ModeLayout(("o2",))
    k1, k2 = Branch(1, (b1,)).ket, Branch(1, (b2,)).ket
    _, lead = cross_phase(alpha, phi, epsilon)
    rho = MixedOperator(layout, (MixedTerm(k1, k1, 1.0), MixedTerm(k2, k2, 1.0),
                                 MixedTerm(k1, k2, cmath.exp(1j * lead))))
    return rho.normalize()[0]


def approximation_fidelity(alpha: complex, phi: float) -> float:
    """Fidelity between the exact o2 even cat and the first-order cat with amplitude gamma*phi."""
    exact = run_protocol1(alpha, phi, "H").cat_o2
    approx = build_cat(CatSpec(cat_amplitude_approx(complex(alpha), phi), "+"), mode="o2")
    return fidelity_pure(exact, approx)
