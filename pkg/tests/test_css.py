import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import amplitudes, css_states
from kerrcat.css import (
    Branch,
    Ket,
    LayoutMismatchError,
    MixedOperator,
    MixedTerm,
    ModeLayout,
    PhotonMode,
    PureState,
    ZeroNormError,
    dumps,
    fidelity_mixed_pure,
    fidelity_pure,
    global_phase_distance,
    inner_product,
    loads,
    merge_prune,
    norm,
    normalize,
    overlap,
    partial_trace_field,
)

ONE = ModeLayout(("o2",))
TWO = ModeLayout(("o1", "o2"))

# mpmath at 40 digits
E_MINUS_8 = 3.3546262790251183882e-4
BIG_OVERLAP = 0.13534430576927503297
CAT2_NORM = 1.4144507503818593626


def cat(gamma, sign=1.0, layout=ONE):
    return PureState.from_terms(layout, [(1.0, (gamma,)), (sign, (-gamma,))])


def fock_overlap(a, b, n_max=60):
    return sum(math.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2) * (a.conjugate() * b) ** n / math.factorial(n)
               for n in range(n_max + 1))


class TestOverlap:
    def test_vacuum(self):
        assert overlap(0, 0) == 1

    def test_opposite_labels(self):
        assert abs(overlap(2, -2)) == pytest.approx(E_MINUS_8, rel=1e-14)
        assert overlap(2, -2) == pytest.approx(fock_overlap(2 + 0j, -2 + 0j), rel=1e-12)

    def test_large_amplitude_no_underflow(self):
        a = 100j
        v = overlap(a, a * cmath.exp(0.02j))
        assert abs(v) == pytest.approx(BIG_OVERLAP, rel=1e-11)

    @pytest.mark.parametrize("a,b", [(0.3 + 0.1j, -0.5j), (1.2, 1.0 + 0.7j), (-1.5 + 1j, 0.2 - 1.8j)])
    def test_matches_fock_sum(self, a, b):
        assert overlap(a, b) == pytest.approx(fock_overlap(complex(a), complex(b)), abs=1e-13)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            overlap(float("nan"), 0)

    @given(amplitudes(10.0), amplitudes(10.0))
    @settings(max_examples=150)
    def test_conjugate_symmetry(self, a, b):
        assert overlap(a, b) == pytest.approx(overlap(b, a).conjugate(), abs=1e-15)


class TestInnerProduct:
    def test_self_normalized(self):
        s, _ = normalize(cat(1.3))
        assert inner_product(s, s) == pytest.approx(1, abs=1e-14)

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0, 2.0, 3.7])
    def test_even_odd_orthogonal(self, gamma):
        even, _ = normalize(cat(gamma, 1))
        odd, _ = normalize(cat(gamma, -1))
        assert abs(inner_product(even, odd)) < 1e-14

    def test_entangled_coherent_states_orthogonal(self):
        a = 2.0j
        ap = a * cmath.exp(0.3j)
        plus, _ = normalize(PureState.from_terms(TWO, [(1, (ap, a)), (1, (a, ap))]))
        minus, _ = normalize(PureState.from_terms(TWO, [(1, (ap, a)), (-1, (a, ap))]))
        assert abs(inner_product(plus, minus)) < 1e-14

    def test_photon_configs_are_orthogonal(self):
        lay = ModeLayout(("a",), (PhotonMode("b", ("x",)),))
        h = PureState.coherent(lay, (1.0,), (("H", "x"),))
        v = PureState.coherent(lay, (1.0,), (("V", "x"),))
        assert inner_product(h, v) == 0

    def test_layout_mismatch(self):
        with pytest.raises(LayoutMismatchError):
            inner_product(cat(1.0), cat(1.0, layout=ModeLayout(("x",))))

    def test_small_odd_cat_no_cancellation(self):
        # |g> - |-g> has squared norm 2 - 2 exp(-2 g^2) ~ 4 g^2
        g = 1e-6
        assert norm(cat(g, -1)) ** 2 == pytest.approx(-2 * math.expm1(-2 * g * g), rel=1e-9)

    @given(css_states(), st.data())
    @settings(max_examples=150, deadline=None)
    def test_cauchy_schwarz(self, x, data):
        y = data.draw(css_states(layout=x.layout))
        lhs = abs(inner_product(x, y)) ** 2
        rhs = norm(x) ** 2 * norm(y) ** 2
        assert lhs <= rhs * (1 + 1e-12) + 1e-12

    @given(css_states(), st.data())
    @settings(max_examples=100, deadline=None)
    def test_hermitian(self, x, data):
        y = data.draw(css_states(layout=x.layout))
        assert inner_product(x, y) == pytest.approx(inner_product(y, x).conjugate(), abs=1e-10)


class TestNormalize:
    def test_cat_norm(self):
        _, n = normalize(cat(2.0))
        assert n == pytest.approx(CAT2_NORM, rel=1e-14)

    def test_merges_identical_branches(self):
        s = PureState.from_terms(ONE, [(1, (0,)), (1, (0,))])
        assert len(s) == 1
        unit, n = normalize(s)
        assert n == 2
        assert unit.branches[0].coeff == 1

    def test_odd_cat_at_zero(self):
        with pytest.raises(ZeroNormError):
            normalize(cat(0.0, -1))

    def test_tiny_odd_cat_underflows_to_error(self):
        with pytest.raises(ZeroNormError):
            normalize(cat(1e-200, -1))

    @given(css_states())
    @settings(max_examples=100, deadline=None)
    def test_idempotent(self, s):
        once, _ = normalize(s)
        twice, n = normalize(once)
        assert n == pytest.approx(1, abs=1e-12)
        for a, b in zip(once.branches, twice.branches):
            assert a.coeff == pytest.approx(b.coeff, rel=1e-12)


class TestMergePrune:
    def test_identical(self):
        s = PureState(ONE, (Branch(0.5, (1.0,)), Branch(0.5, (1.0 + 1e-15,))))
        m = merge_prune(s)
        assert len(m) == 1 and m.branches[0].coeff == pytest.approx(1.0)

    def test_zero_coefficient_removed(self):
        s = PureState(ONE, (Branch(0.0, (1.0,)), Branch(1.0, (2.0,))))
        assert len(merge_prune(s)) == 1

    def test_tolerance(self):
        s = PureState(ONE, (Branch(1, (1.0,)), Branch(1, (1.0 + 1e-15j,))))
        assert len(merge_prune(s, label_tol=1e-12)) == 1
        assert len(merge_prune(s, label_tol=1e-16)) == 2

    def test_photons_must_match(self):
        lay = ModeLayout(("a",), (PhotonMode("b", ("x",)),))
        s = PureState(lay, (Branch(1, (1.0,), (("H", "x"),)), Branch(1, (1.0,), (("V", "x"),))))
        assert len(merge_prune(s)) == 2

    @given(css_states())
    @settings(max_examples=100, deadline=None)
    def test_norm_change_bounded(self, s):
        tol = 1e-6
        assert abs(norm(merge_prune(s, coeff_tol=tol)) - norm(s)) <= 10 * tol * max(norm(s), 1)


class TestPartialTrace:
    def test_product_state(self):
        s, _ = normalize(PureState.from_terms(TWO, [(1, (0.7j, 1.0)), (-1, (0.7j, -1.0))]))
        rho = partial_trace_field(s, "o1")
        _, reduced = s.factor_field_mode("o1")
        assert fidelity_mixed_pure(rho, reduced) == pytest.approx(1, abs=1e-14)
        assert rho.trace() == pytest.approx(1, abs=1e-14)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            partial_trace_field(cat(1.0), "nope")

    def test_cross_weight_is_traced_overlap(self):
        u1, u2, b1, b2 = 3.0 + 1j, 2.5 - 0.5j, 0.3, -0.4
        s = PureState.from_terms(TWO, [(1, (u1, b1)), (1, (u2, b2))])
        rho = partial_trace_field(s, "o1")
        assert len(rho.diagonal_terms()) == 2
        assert len(rho.expanded_terms()) == 4
        off = [t for t in rho.terms if not t.diagonal][0]
        assert off.weight == pytest.approx(overlap(u2, u1), rel=1e-14)

    @given(css_states(n_modes=2), st.sampled_from(["m0", "m1"]))
    @settings(max_examples=120, deadline=None)
    def test_trace_and_hermiticity(self, s, mode):
        s, _ = normalize(s)
        rho = partial_trace_field(s, mode)
        assert rho.trace() == pytest.approx(1, abs=1e-10)
        _, m = rho.matrix()
        np.testing.assert_allclose(m, m.conj().T, atol=1e-14)


class TestFidelity:
    def test_self(self):
        s, _ = normalize(cat(1.1 + 0.4j))
        assert fidelity_pure(s, s) == pytest.approx(1, abs=1e-14)

    def test_even_odd(self):
        assert fidelity_pure(normalize(cat(1.0))[0], normalize(cat(1.0, -1))[0]) < 1e-28

    def test_mixed_of_pure(self):
        s, _ = normalize(cat(0.8j, -1))
        assert fidelity_mixed_pure(MixedOperator.from_pure(s), s) == pytest.approx(1, abs=1e-13)

    def test_global_phase(self):
        s, _ = normalize(cat(1.5))
        assert global_phase_distance(s, s.scaled(cmath.exp(0.7j))) < 1e-14
        assert global_phase_distance(s, normalize(cat(1.5, -1))[0]) == pytest.approx(1, abs=1e-14)

    @given(css_states(), st.data())
    @settings(max_examples=100, deadline=None)
    def test_range(self, s, data):
        t = data.draw(css_states(layout=s.layout))
        s, _ = normalize(s)
        t, _ = normalize(t)
        assert -1e-12 <= fidelity_pure(s, t) <= 1 + 1e-12
        rho = MixedOperator.from_pure(s)
        assert -1e-10 <= fidelity_mixed_pure(rho, t) <= 1 + 1e-10


class TestLayout:
    def test_unique_names(self):
        with pytest.raises(ValueError):
            ModeLayout(("a", "a"))

    def test_label_count(self):
        with pytest.raises(ValueError):
            PureState.from_terms(TWO, [(1, (1.0,))])

    def test_path_must_be_allowed(self):
        lay = ModeLayout(("a",), (PhotonMode("b", ("x",)),))
        with pytest.raises(ValueError):
            PureState.coherent(lay, (1.0,), (("H", "y"),))

    def test_mixed_rejects_both_triangles(self):
        k1, k2 = Ket((1.0,)), Ket((2.0,))
        with pytest.raises(ValueError):
            MixedOperator(ONE, (MixedTerm(k1, k2, 0.1), MixedTerm(k2, k1, 0.1)))


class TestSerialization:
    def test_document_shape(self):
        lay = ModeLayout(("a",), (PhotonMode("b", ("x", "y")),))
        s = PureState.coherent(lay, (1 + 2j,), (("V", "y"),))
        doc = json.loads(dumps(s))
        assert list(doc) == ["layout", "branches", "normalized"]
        assert doc["branches"][0] == {"coeff": [1.0, 0.0], "labels": [[1.0, 2.0]], "photons": [{"pol": "V", "path": "y"}]}

    @given(css_states())
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, s):
        back = loads(dumps(s))
        assert back == s

    def test_mixed_round_trip(self):
        s = PureState.from_terms(TWO, [(1, (3.0 + 1j, 0.3)), (1j, (2.5 - 0.5j, -0.4))])
        rho = partial_trace_field(s, "o1")
        assert loads(dumps(rho)) == rho
