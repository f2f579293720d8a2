import math
import time

import numpy as np
import pytest
from hypothesis import strategies as st

from kerrcat.css import Branch, ModeLayout, PhotonMode, PureState, normalize

PATHS = ("p", "q")


def layout_for(n_modes, with_photon=False):
    names = tuple(f"m{i}" for i in range(n_modes))
    photons = (PhotonMode("b", PATHS),) if with_photon else ()
    return ModeLayout(names, photons)


@st.composite
def amplitudes(draw, max_abs=3.0, min_abs=0.0):
    r = draw(st.floats(min_abs, max_abs, allow_nan=False))
    t = draw(st.floats(0, 2 * math.pi, allow_nan=False))
    return complex(r * math.cos(t), r * math.sin(t))


@st.composite
def css_states(draw, n_modes=None, with_photon=None, max_branches=6, max_abs=3.0, layout=None):
    if layout is None:
        n = draw(st.integers(1, 2)) if n_modes is None else n_modes
        ph = draw(st.booleans()) if with_photon is None else with_photon
        layout = layout_for(n, ph)
    k = draw(st.integers(1, max_branches))
    branches = []
    for _ in range(k):
        coeff = draw(amplitudes(2.0, 0.05))
        labels = tuple(draw(amplitudes(max_abs)) for _ in layout.field_modes)
        photons = tuple((draw(st.sampled_from("HV")), draw(st.sampled_from(pm.paths))) for pm in layout.photon_modes)
        branches.append(Branch(coeff, labels, photons))
    return PureState(layout, tuple(branches))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def entangled_reference(alpha, phi, sign):
    """Normalized |a', a> + sign |a, a'> on (a1, a2), built directly."""
    ap = alpha * np.exp(1j * phi)
    s = PureState.from_terms(ModeLayout(("a1", "a2")), [(1, (ap, alpha)), (sign, (alpha, ap))])
    return normalize(s)[0]


def output_reference(alpha, phi, sign):
    """The same state after the output 50:50 splitter, on (o1, o2)."""
    ap = alpha * np.exp(1j * phi)
    r = math.sqrt(0.5)
    u = (ap + alpha) * r
    s = PureState.from_terms(ModeLayout(("o1", "o2")), [(1, (u, (ap - alpha) * r)), (sign, (u, (alpha - ap) * r))])
    return normalize(s)[0]


def random_params(rng, n, amp=(1.0, 150.0), phi=(0.001, 0.3)):
    mags = rng.uniform(*amp, n)
    args = rng.uniform(0, 2 * math.pi, n)
    phis = rng.uniform(*phi, n)
    return [(complex(m * math.cos(t), m * math.sin(t)), float(p)) for m, t, p in zip(mags, args, phis)]


# acceptance reporting: one line per criterion, printed after the run
ACCEPTANCE_LINES = []
SUITE_BUDGET_S = 300.0
_session = {}


def record(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_sessionstart(session):
    _session["t0"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _session.get("t0", time.perf_counter())
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    status = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    tr.write_line(f"criterion 10 (total suite runtime < {SUITE_BUDGET_S:.0f} s): {status} [{elapsed:.1f} s]")
