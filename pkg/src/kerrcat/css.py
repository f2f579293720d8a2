"""Exact algebra of coherent-state superpositions.

A state is a finite sum of branches. Each branch is a complex coefficient times
a product of coherent states (one complex label per field mode) times a fixed
configuration of single photons, each photon carrying a polarization and a
spatial path. Photon configurations are orthonormal, coherent labels are not.

Overlap exponents are always assembled before a single ``exp`` is taken, so
amplitudes of order 10^2 never produce ``exp(-|a|^2/2)`` underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

POLARIZATIONS = ("H", "V")
LABEL_TOL = 1e-12
COEFF_TOL = 1e-14
ZERO_NORM_SQ = 1e-300

PhotonConfig = tuple[tuple[str, str], ...]


class ZeroNormError(ValueError):
    """The state vanishes; usually a post-selection outcome of probability 0."""


class LayoutMismatchError(ValueError):
    pass


def _check_finite(z: complex, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite {what}: {z!r}")
    return z


# --------------------------------------------------------------------------
# overlaps


def overlap_exponent(a, b):
    """Exponent E with <a|b> = exp(E), elementwise over broadcast arrays.

    Re(E) = -|a - b|^2 / 2 is formed from the difference directly, so it is
    accurate even when |a|, |b| ~ 10^2 and the labels are close.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    d = b - a
    return -0.5 * (d.real**2 + d.imag**2) + 1j * (a.real * b.imag - a.imag * b.real)


def overlap(a: complex, b: complex) -> complex:
    """Coherent-state overlap <a|b>."""
    _check_finite(a, "label")
    _check_finite(b, "label")
    return complex(np.exp(overlap_exponent(a, b)))


def cexpm1(z):
    """exp(z) - 1 for complex arrays, accurate when |z| is small."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    em1 = np.expm1(x)
    s = np.sin(0.5 * y)
    re = em1 * np.cos(y) - 2.0 * s * s
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


# --------------------------------------------------------------------------
# layout and branches


@dataclass(frozen=True)
class PhotonMode:
    name: str
    paths: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ValueError(f"photon {self.name!r} has no paths")
        if len(set(self.paths)) != len(self.paths):
            raise ValueError(f"photon {self.name!r} has duplicate paths")


@dataclass(frozen=True)
class ModeLayout:
    """Names of the field modes and of the photons (with their allowed paths)."""

    field_modes: tuple[str, ...]
    photon_modes: tuple[PhotonMode, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "field_modes", tuple(self.field_modes))
        object.__setattr__(self, "photon_modes", tuple(self.photon_modes))
        names = list(self.field_modes) + [p.name for p in self.photon_modes]
        if len(set(names)) != len(names):
            raise ValueError(f"mode identifiers are not unique: {names}")

    @property
    def photon_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.photon_modes)

    def field_index(self, mode: str) -> int:
        try:
            return self.field_modes.index(mode)
        except ValueError:
            raise ValueError(f"unknown field mode {mode!r}") from None

    def photon_index(self, name: str) -> int:
        try:
            return self.photon_names.index(name)
        except ValueError:
            raise ValueError(f"unknown photon {name!r}") from None

    def without_field_mode(self, mode: str) -> ModeLayout:
        i = self.field_index(mode)
        return ModeLayout(self.field_modes[:i] + self.field_modes[i + 1:], self.photon_modes)

    def without_photons(self, names: Iterable[str]) -> ModeLayout:
        drop = set(names)
        for n in drop:
            self.photon_index(n)
        return ModeLayout(self.field_modes, tuple(p for p in self.photon_modes if p.name not in drop))

    def renamed(self, mapping: Mapping[str, str]) -> ModeLayout:
        for old in mapping:
            self.field_index(old)
        return ModeLayout(tuple(mapping.get(m, m) for m in self.field_modes), self.photon_modes)

    def to_dict(self) -> dict:
        return {
            "field_modes": list(self.field_modes),
            "photon_modes": [{"name": p.name, "paths": list(p.paths)} for p in self.photon_modes],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ModeLayout:
        return cls(
            tuple(d["field_modes"]),
            tuple(PhotonMode(p["name"], tuple(p["paths"])) for p in d.get("photon_modes", [])),
        )


@dataclass(frozen=True)
class Ket:
    """A coefficient-free branch: coherent labels plus photon configuration."""

    labels: tuple[complex, ...]
    photons: PhotonConfig = ()


@dataclass(frozen=True)
class Branch:
    coeff: complex
    labels: tuple[complex, ...]
    photons: PhotonConfig = ()

    @property
    def ket(self) -> Ket:
        return Ket(self.labels, self.photons)


def _validate_ket(layout: ModeLayout, labels, photons) -> tuple[tuple[complex, ...], PhotonConfig]:
    labels = tuple(_check_finite(z, "label") for z in labels)
    if len(labels) != len(layout.field_modes):
        raise ValueError(f"expected {len(layout.field_modes)} labels, got {len(labels)}")
    photons = tuple((str(pol), str(path)) for pol, path in photons)
    if len(photons) != len(layout.photon_modes):
        raise ValueError(f"expected {len(layout.photon_modes)} photon entries, got {len(photons)}")
    for (pol, path), pm in zip(photons, layout.photon_modes):
        if pol not in POLARIZATIONS:
            raise ValueError(f"bad polarization {pol!r} for photon {pm.name!r}")
        if path not in pm.paths:
            raise ValueError(f"path {path!r} not allowed for photon {pm.name!r}")
    return labels, photons


# --------------------------------------------------------------------------
# pure states


@dataclass(frozen=True)
class PureState:
    """Finite superposition of coherent-product branches over a fixed layout.

    Branches with identical labels and photon configuration are merged on
    construction and exactly-zero coefficients are dropped, so two
    mathematically cancelling terms leave an empty (zero) state.
    """

    layout: ModeLayout
    branches: tuple[Branch, ...]
    normalized: bool = False

    def __post_init__(self):
        merged: dict[tuple, complex] = {}
        for br in self.branches:
            labels, photons = _validate_ket(self.layout, br.labels, br.photons)
            key = (labels, photons)
            merged[key] = merged.get(key, 0j) + _check_finite(br.coeff, "coefficient")
        branches = tuple(Branch(c, k[0], k[1]) for k, c in merged.items() if c != 0)
        object.__setattr__(self, "branches", branches)

    @classmethod
    def from_terms(cls, layout: ModeLayout, terms: Iterable[tuple], normalized: bool = False) -> PureState:
        """Build from ``(coeff, labels[, photons])`` tuples."""
        branches = []
        for t in terms:
            coeff, labels = t[0], t[1]
            photons = t[2] if len(t) > 2 else ()
            branches.append(Branch(coeff, tuple(labels), tuple(photons)))
        return cls(layout, tuple(branches), normalized)

    @classmethod
    def coherent(cls, layout: ModeLayout, labels: Sequence[complex], photons: PhotonConfig = ()) -> PureState:
        return cls(layout, (Branch(1.0, tuple(labels), tuple(photons)),), True)

    def __len__(self) -> int:
        return len(self.branches)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([b.coeff for b in self.branches], dtype=complex)

    @property
    def label_matrix(self) -> np.ndarray:
        return np.array([b.labels for b in self.branches], dtype=complex).reshape(
            len(self.branches), len(self.layout.field_modes))

    def with_branches(self, branches: Iterable[Branch], normalized: bool | None = None,
                      layout: ModeLayout | None = None) -> PureState:
        return PureState(layout or self.layout, tuple(branches),
                         self.normalized if normalized is None else normalized)

    def scaled(self, factor: complex) -> PureState:
        return self.with_branches((Branch(b.coeff * factor, b.labels, b.photons) for b in self.branches),
                                  normalized=False)

    def relabel(self, mapping: Mapping[str, str]) -> PureState:
        """Rename field modes; labels are untouched."""
        return self.with_branches(self.branches, layout=self.layout.renamed(mapping))

    def factor_field_mode(self, mode: str, tol: float = LABEL_TOL) -> tuple[complex, PureState]:
        """Split off ``mode`` when it carries one coherent label in every branch.

        Returns the common label and the state of the remaining modes.
        """
        i = self.layout.field_index(mode)
        if not self.branches:
            raise ZeroNormError("cannot factor an empty state")
        ref = self.branches[0].labels[i]
        for b in self.branches:
            if abs(b.labels[i] - ref) >= tol:
                raise ValueError(f"mode {mode!r} is not in a product coherent state")
        rest = self.layout.without_field_mode(mode)
        branches = [Branch(b.coeff, b.labels[:i] + b.labels[i + 1:], b.photons) for b in self.branches]
        return ref, PureState(rest, tuple(branches), self.normalized)

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "branches": [_branch_to_dict(b.coeff, b.labels, b.photons) for b in self.branches],
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> PureState:
        layout = ModeLayout.from_dict(d["layout"])
        branches = []
        for bd in d["branches"]:
            labels, photons = _ket_from_dict(bd)
            branches.append(Branch(complex(*bd["coeff"]), labels, photons))
        return cls(layout, tuple(branches), bool(d.get("normalized", False)))


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _branch_to_dict(coeff, labels, photons) -> dict:
    d = {} if coeff is None else {"coeff": _pair(coeff)}
    d["labels"] = [_pair(z) for z in labels]
    d["photons"] = [{"pol": pol, "path": path} for pol, path in photons]
    return d


def _ket_from_dict(d: Mapping[str, Any]) -> tuple[tuple[complex, ...], PhotonConfig]:
    labels = tuple(complex(re, im) for re, im in d["labels"])
    photons = tuple((p["pol"], p["path"]) for p in d["photons"])
    return labels, photons


def _check_layouts(x, y) -> None:
    if x.layout != y.layout:
        raise LayoutMismatchError(f"layout mismatch: {x.layout} vs {y.layout}")


def _gram_exponents(labels_x: np.ndarray, labels_y: np.ndarray) -> np.ndarray:
    # E[j, k] = sum over modes of log <x_j|y_k>
    return overlap_exponent(labels_x[:, None, :], labels_y[None, :, :]).sum(axis=-1)


def _photon_mask(px: Sequence[PhotonConfig], py: Sequence[PhotonConfig]) -> np.ndarray:
    return np.array([[a == b for b in py] for a in px], dtype=bool).reshape(len(px), len(py))


def _gram_sum(cx: np.ndarray, px, lx: np.ndarray, cy: np.ndarray, py, ly: np.ndarray) -> complex:
    """sum_jk conj(cx_j) cy_k <x_j|y_k>, written as sum(...)(1 + expm1(E)).

    The leading part is a product of plain coefficient sums per photon group,
    which removes the catastrophic cancellation of nearly-equal branches with
    opposite signs (odd cats and odd entangled states at small separation).
    """
    if len(cx) == 0 or len(cy) == 0:
        return 0j
    mask = _photon_mask(px, py)
    lead = 0j
    for cfg in set(px) & set(py):
        sx = sum(c for c, p in zip(cx, px) if p == cfg)
        sy = sum(c for c, p in zip(cy, py) if p == cfg)
        lead += np.conj(sx) * sy
    weights = np.conj(cx)[:, None] * cy[None, :]
    corr = np.where(mask, weights * cexpm1(_gram_exponents(lx, ly)), 0)
    return complex(lead + corr.sum())


def inner_product(x: PureState, y: PureState) -> complex:
    """<x|y> via the Gram sum over branch pairs."""
    _check_layouts(x, y)
    return _gram_sum(x.coeffs, [b.photons for b in x.branches], x.label_matrix,
                     y.coeffs, [b.photons for b in y.branches], y.label_matrix)


def norm_squared(s: PureState) -> float:
    return max(inner_product(s, s).real, 0.0)


def norm(s: PureState) -> float:
    return math.sqrt(norm_squared(s))


def normalize(s: PureState) -> tuple[PureState, float]:
    """Return (unit-norm state, pre-normalization length)."""
    n2 = norm_squared(s)
    if not n2 > ZERO_NORM_SQ:
        raise ZeroNormError("state has zero norm")
    n = math.sqrt(n2)
    unit = s.scaled(1.0 / n)
    return unit.with_branches(unit.branches, normalized=True), n


def merge_prune(s: PureState, label_tol: float = LABEL_TOL, coeff_tol: float = COEFF_TOL) -> PureState:
    """Merge branches whose labels agree within ``label_tol`` in every mode
    and whose photon configurations match; drop branches whose coefficient is
    below ``coeff_tol`` relative to the largest."""
    kept: list[list] = []  # [coeff, labels, photons]
    for b in s.branches:
        for k in kept:
            if k[2] == b.photons and all(abs(u - v) < label_tol for u, v in zip(k[1], b.labels)):
                k[0] += b.coeff
                break
        else:
            kept.append([b.coeff, b.labels, b.photons])
    if kept:
        cmax = max(abs(k[0]) for k in kept)
        kept = [k for k in kept if abs(k[0]) >= coeff_tol * cmax and k[0] != 0]
    return s.with_branches(Branch(*k) for k in kept)


def fidelity_pure(s: PureState, t: PureState) -> float:
    """|<t|s>|^2 for normalized states."""
    return abs(inner_product(t, s)) ** 2


def global_phase_distance(s: PureState, t: PureState) -> float:
    """1 - |<t|s>|; zero exactly when the states agree up to a global phase."""
    return max(0.0, 1.0 - abs(inner_product(t, s)))


# --------------------------------------------------------------------------
# mixed operators


@dataclass(frozen=True)
class MixedTerm:
    ket: Ket
    bra: Ket
    weight: complex

    @property
    def diagonal(self) -> bool:
        return self.ket == self.bra


@dataclass(frozen=True)
class MixedOperator:
    """Hermitian operator sum_terms w |ket><bra|.

    Only the diagonal and one triangle are stored; every off-diagonal term
    implies its partner conj(w) |bra><ket|.
    """

    layout: ModeLayout
    terms: tuple[MixedTerm, ...]

    def __post_init__(self):
        seen: dict[tuple[Ket, Ket], int] = {}
        terms: list[MixedTerm] = []
        for t in self.terms:
            ket = Ket(*_validate_ket(self.layout, t.ket.labels, t.ket.photons))
            bra = Ket(*_validate_ket(self.layout, t.bra.labels, t.bra.photons))
            w = _check_finite(t.weight, "weight")
            if ket == bra and w.imag != 0:
                raise ValueError("diagonal weight must be real")
            if (bra, ket) in seen and ket != bra:
                raise ValueError("both triangles given for an off-diagonal term")
            if (ket, bra) in seen:
                i = seen[(ket, bra)]
                terms[i] = MixedTerm(ket, bra, terms[i].weight + w)
            else:
                seen[(ket, bra)] = len(terms)
                terms.append(MixedTerm(ket, bra, w))
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def from_pure(cls, s: PureState) -> MixedOperator:
        """|s><s|."""
        terms = []
        br = s.branches
        for j in range(len(br)):
            for k in range(j, len(br)):
                terms.append(MixedTerm(br[j].ket, br[k].ket, br[j].coeff * np.conj(br[k].coeff)))
        return cls(s.layout, tuple(terms))

    def diagonal_terms(self) -> list[MixedTerm]:
        return [t for t in self.terms if t.diagonal]

    def expanded_terms(self) -> list[MixedTerm]:
        """All terms, with the implicit Hermitian partners written out."""
        out = []
        for t in self.terms:
            out.append(t)
            if not t.diagonal:
                out.append(MixedTerm(t.bra, t.ket, np.conj(t.weight)))
        return out

    def _arrays(self, side: str):
        kets = [getattr(t, side) for t in self.terms]
        labels = np.array([k.labels for k in kets], dtype=complex).reshape(len(kets), len(self.layout.field_modes))
        return labels, [k.photons for k in kets]

    def trace(self) -> float:
        lk, pk = self._arrays("ket")
        lb, pb = self._arrays("bra")
        w = np.array([t.weight for t in self.terms], dtype=complex)
        same = np.array([a == b for a, b in zip(pk, pb)], dtype=bool)
        vals = np.where(same, w * np.exp(overlap_exponent(lb, lk).sum(axis=-1)), 0)
        diag = np.array([t.diagonal for t in self.terms], dtype=bool)
        return float(vals[diag].real.sum() + 2 * vals[~diag].real.sum())

    def scaled(self, factor: float) -> MixedOperator:
        return MixedOperator(self.layout, tuple(MixedTerm(t.ket, t.bra, t.weight * factor) for t in self.terms))

    def normalize(self) -> tuple[MixedOperator, float]:
        tr = self.trace()
        if not tr > ZERO_NORM_SQ:
            raise ZeroNormError("operator has zero trace")
        return self.scaled(1.0 / tr), tr

    def matrix(self) -> tuple[list[Ket], np.ndarray]:
        """Distinct kets and the full Hermitian coefficient matrix over them."""
        kets: list[Ket] = []
        index: dict[Ket, int] = {}
        for t in self.terms:
            for k in (t.ket, t.bra):
                if k not in index:
                    index[k] = len(kets)
                    kets.append(k)
        m = np.zeros((len(kets), len(kets)), dtype=complex)
        for t in self.expanded_terms():
            m[index[t.ket], index[t.bra]] += t.weight
        return kets, m

    def expectation(self, t: PureState) -> complex:
        """<t| rho |t>, with per-pair exponents summed before exponentiation."""
        _check_layouts(self, t)
        if not self.terms or not t.branches:
            return 0j
        ct = t.coeffs
        lt = t.label_matrix
        pt = [b.photons for b in t.branches]
        lk, pk = self._arrays("ket")
        lb, pb = self._arrays("bra")
        w = np.array([x.weight for x in self.terms], dtype=complex)
        # <t_m|ket_i> and <bra_i|t_n> exponents, shape (terms, m) and (terms, n)
        e_tk = overlap_exponent(lt[None, :, :], lk[:, None, :]).sum(axis=-1)
        e_bt = overlap_exponent(lb[:, None, :], lt[None, :, :]).sum(axis=-1)
        m_tk = np.array([[p == q for p in pt] for q in pk], dtype=bool).reshape(len(pk), len(pt))
        m_bt = np.array([[q == p for p in pt] for q in pb], dtype=bool).reshape(len(pb), len(pt))
        expo = e_tk[:, :, None] + e_bt[:, None, :]
        mask = m_tk[:, :, None] & m_bt[:, None, :]
        cw = np.conj(ct)[None, :, None] * ct[None, None, :]
        per_term = np.where(mask, cw * np.exp(np.where(mask, expo, 0)), 0).sum(axis=(1, 2)) * w
        diag = np.array([x.diagonal for x in self.terms], dtype=bool)
        return complex(per_term[diag].sum() + 2 * per_term[~diag].real.sum())

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "terms": [
                {"ket": _branch_to_dict(None, t.ket.labels, t.ket.photons),
                 "bra": _branch_to_dict(None, t.bra.labels, t.bra.photons),
                 "weight": _pair(complex(t.weight))}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> MixedOperator:
        layout = ModeLayout.from_dict(d["layout"])
        terms = tuple(
            MixedTerm(Ket(*_ket_from_dict(td["ket"])), Ket(*_ket_from_dict(td["bra"])), complex(*td["weight"]))
            for td in d["terms"]
        )
        return cls(layout, terms)


def partial_trace_field(s: PureState, mode: str) -> MixedOperator:
    """Trace out one field mode.

    rho = sum_jk c_j conj(c_k) <l_k|l_j> |rest_j><rest_k|, with l the labels of
    the traced mode.
    """
    i = s.layout.field_index(mode)
    layout = s.layout.without_field_mode(mode)
    rests: list[Ket] = []
    index: dict[Ket, int] = {}
    rid = []
    for b in s.branches:
        r = Ket(b.labels[:i] + b.labels[i + 1:], b.photons)
        if r not in index:
            index[r] = len(rests)
            rests.append(r)
        rid.append(index[r])
    n = len(rests)
    acc = np.zeros((n, n), dtype=complex)
    c = s.coeffs
    traced = s.label_matrix[:, i] if len(s.branches) else np.zeros(0, dtype=complex)
    # expo[j, k] = log <l_k|l_j>
    expo = overlap_exponent(traced[None, :], traced[:, None])
    for j in range(len(c)):
        for k in range(len(c)):
            acc[rid[j], rid[k]] += c[j] * np.conj(c[k]) * np.exp(expo[j, k])
    terms = []
    for a in range(n):
        terms.append(MixedTerm(rests[a], rests[a], acc[a, a].real))
        for b in range(a + 1, n):
            if acc[a, b] != 0:
                terms.append(MixedTerm(rests[a], rests[b], acc[a, b]))
    return MixedOperator(layout, tuple(terms))


def fidelity_mixed_pure(rho: MixedOperator, t: PureState) -> float:
    """<t|rho|t> for unit-trace rho and normalized t."""
    return rho.expectation(t).real


# --------------------------------------------------------------------------
# serialization


def state_from_dict(d: Mapping[str, Any]) -> PureState | MixedOperator:
    if "terms" in d:
        return MixedOperator.from_dict(d)
    return PureState.from_dict(d)


def dumps(state: PureState | MixedOperator, **kw) -> str:
    return json.dumps(state.to_dict(), **kw)


def loads(text: str) -> PureState | MixedOperator:
    return state_from_dict(json.loads(text))
