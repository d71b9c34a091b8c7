import itertools

import pytest

from cancausal.graph import GraphError
from cancausal.oracle import (TriState, cv_can_structural, nrr_can_structural,
                              numerical_pattern, structural_cells)
from cancausal.patterns import DEP, IND
from cancausal.scm import preset
from cancausal.scm.presets import PRESET_NAMES
from cancausal.scm.specfile import parse_model_spec


def model(eq_y, extra_nodes="", extra_noise="", extra_eqs=""):
    return parse_model_spec(f"""
node X observed
node Y observed
node U hidden
{extra_nodes}
noise ex gaussian 0 1
noise eu gaussian 0 1
noise ey gaussian 0 1
{extra_noise}
X = ex
U = eu
{extra_eqs}
Y = {eq_y}
""")


def test_fig1a_given_z_holds():
    assert cv_can_structural(preset("fig1a"), "Y", "X", ["Z"]) is TriState.HOLDS


def test_fig1b_needs_z():
    m = preset("fig1b")
    assert cv_can_structural(m, "Y", "X", []) is TriState.UNKNOWN
    assert cv_can_structural(m, "Y", "X", ["Z"]) is TriState.HOLDS


def test_fig1c_marginal_not_holds():
    assert cv_can_structural(preset("fig1c"), "Y", "X", []) is not TriState.HOLDS


def test_hidden_inside_nonlinearity_fails():
    m = model("(tanh (+ X U))")
    assert cv_can_structural(m, "Y", "X") is TriState.FAILS
    assert nrr_can_structural(m, "Y", "X") is TriState.FAILS


def test_noise_mixing_fails():
    m = model("(* X ey)")
    assert cv_can_structural(m, "Y", "X") is TriState.FAILS


def test_pure_additive_noise_holds():
    m = model("(+ (cube X) ey)")
    assert cv_can_structural(m, "Y", "X") is TriState.HOLDS
    assert nrr_can_structural(m, "Y", "X") is TriState.HOLDS


def test_independent_hidden_scale_holds():
    m = model("(+ X (* U ey))")
    assert cv_can_structural(m, "Y", "X") is TriState.HOLDS


def test_hidden_confounded_scale_unknown():
    m = parse_model_spec("""
node U hidden
node X observed
node Y observed
noise ex gaussian 0 1
noise eu gaussian 0 1
noise ey gaussian 0 1
U = eu
X = (+ U ex)
Y = (+ X (* U ey))
""")
    assert cv_can_structural(m, "Y", "X") is TriState.UNKNOWN


def test_argument_checks():
    m = preset("fig1a")
    with pytest.raises(ValueError):
        cv_can_structural(m, "X", "Y")
    with pytest.raises(ValueError):
        cv_can_structural(m, "Y", "X", ["X"])
    with pytest.raises(GraphError):
        cv_can_structural(m, "Y", "X", ["nope"])


def _all_queries():
    for name in PRESET_NAMES:
        m = preset(name)
        g = m.graph
        for y in g.nodes:
            for x in sorted(g.parents(y)):
                rest = [v for v in g.nodes if v not in (x, y)]
                for k in range(min(2, len(rest)) + 1):
                    for s in itertools.combinations(rest, k):
                        yield name, m, y, x, s


def test_residual_form_implies_variance_form():
    seen = 0
    for name, m, y, x, s in _all_queries():
        seen += 1
        if nrr_can_structural(m, y, x, s) is TriState.HOLDS:
            assert cv_can_structural(m, y, x, s) is TriState.HOLDS, (name, y, x, s)
        if cv_can_structural(m, y, x, s) is TriState.FAILS:
            assert nrr_can_structural(m, y, x, s) is TriState.FAILS
    assert seen > 50


def test_structural_cells_for_presets():
    assert structural_cells(preset("fig1d"), "X", "Y", "Z") == \
        {0: TriState.HOLDS, 2: TriState.HOLDS}
    assert structural_cells(preset("postnl"), "X", "Y", "W") == \
        {0: TriState.FAILS, 2: TriState.FAILS}
    assert structural_cells(preset("hoyer_bivariate_an"), "X", "Y") == {0: TriState.HOLDS}


def test_numerical_pattern_small_run():
    row = numerical_pattern(preset("hoyer_bivariate_an"), "X", "Y", n=2000, n_perm=199,
                            level=0.01, method="nrr")
    assert row.cells == (IND, DEP)
    assert row.decision is True
