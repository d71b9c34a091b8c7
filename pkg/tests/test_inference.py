import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cancausal.inference import (INCONCLUSIVE, POTENTIAL_CAUSE, CriterionConfig, Decision,
                                 InferenceError, infer_potential_cause, pattern_table,
                                 replay_decision)
from cancausal.patterns import (DEP, IND, PatternRow, cell_queries, decision_from_cells,
                                majority)
from cancausal.scm import preset, sample
from cancausal.scm.model import Dataset


def frame(**cols):
    names = list(cols)
    return Dataset(names, [True] * len(names), np.column_stack([cols[c] for c in names]))


@pytest.fixture(scope="module")
def fig1a_data():
    return sample(preset("fig1a"), 20_000, 0).observed_view()


def search_by_hand(cells):
    """The witness search over {} then {z}, read directly off the four cells."""
    c1, c2, c3, c4 = cells
    if c1 == IND and c2 == DEP:
        return True
    return c3 == IND and c2 == DEP and c4 == DEP


@given(st.tuples(*[st.sampled_from([IND, DEP])] * 4))
def test_cell_logic_matches_search(cells):
    assert decision_from_cells(cells) == search_by_hand(cells)
    assert PatternRow.from_cells(cells).decision == search_by_hand(cells)


@given(st.tuples(*[st.sampled_from([IND, DEP])] * 2))
def test_two_cell_logic(cells):
    assert decision_from_cells(cells) == (cells == (IND, DEP))


def test_cell_queries_order():
    assert cell_queries("X", "Y", "Z") == [("Y", "X", ()), ("X", "Y", ()),
                                           ("Y", "X", ("Z",)), ("X", "Y", ("Z",))]
    assert len(cell_queries("X", "Y", None)) == 2


def test_majority_ties_go_to_dependence():
    rows = [PatternRow.from_cells((IND, DEP)), PatternRow.from_cells((DEP, DEP))]
    v = majority(rows)
    assert v.cells == (DEP, DEP)
    assert v.decision is False
    assert v.cell_agreement == (1, 2)
    with pytest.raises(ValueError):
        majority([])


@settings(max_examples=50)
@given(st.lists(st.tuples(*[st.sampled_from([IND, DEP])] * 4), min_size=1, max_size=11))
def test_majority_counts(rows):
    v = majority([PatternRow.from_cells(r) for r in rows])
    for i, cell in enumerate(v.cells):
        votes = sum(r[i] == cell for r in rows)
        assert v.cell_agreement[i] == votes
        assert 2 * votes >= len(rows)


def test_pattern_row_validation():
    with pytest.raises(ValueError):
        PatternRow((IND,), False)
    with pytest.raises(ValueError):
        PatternRow(("yes", DEP), False)


def test_fig1a_potential_cause_with_empty_witness(fig1a_data):
    d = infer_potential_cause(fig1a_data, "X", "Y", ["Z"], CriterionConfig(seed=0))
    assert d.kind == POTENTIAL_CAUSE
    assert d.witness_set == ()
    assert len(d.reverse_checks(())) == 1


def test_witness_has_complete_reverse_checks(fig1a_data):
    d = infer_potential_cause(fig1a_data, "X", "Y", ["Z"], CriterionConfig(seed=0))
    w = d.witness_set
    checks = d.reverse_checks(w)
    assert len(checks) == 2 ** len(w)
    assert {frozenset(e.s) for e in checks} == \
        {frozenset(c) for k in range(len(w) + 1) for c in itertools.combinations(w, k)}
    assert all(not e.verdict.independent for e in checks)
    fwd = [e for e in d.evidence if e.direction == "forward" and e.s == w]
    assert len(fwd) == 1 and fwd[0].verdict.independent


def test_decision_replays_and_round_trips(fig1a_data):
    ds = fig1a_data.take(np.arange(3000))
    d = infer_potential_cause(ds, "X", "Y", ["Z"], CriterionConfig(seed=4))
    assert replay_decision(ds, d)
    back = Decision.from_dict(json.loads(json.dumps(d.to_dict())))
    assert back.to_dict() == json.loads(json.dumps(d.to_dict()))
    assert replay_decision(ds, back)


@pytest.mark.parametrize("name", ["fig1c", "fig1d"])
def test_inconclusive_presets(name):
    ds = sample(preset(name), 20_000, 0).observed_view()
    d = infer_potential_cause(ds, "X", "Y", ["Z"], CriterionConfig(seed=0))
    assert d.kind == INCONCLUSIVE
    assert d.witness_set is None
    assert d.metadata["candidates_tried"] == 2


def test_independent_pair_gives_no():
    rng = np.random.default_rng(0)
    ds = frame(X=rng.normal(size=600), Y=rng.laplace(size=600), Z=rng.normal(size=600))
    row = pattern_table(ds, "X", "Y", "Z", CriterionConfig(seed=1))
    assert row.cells[1] == IND
    assert row.decision is False


def test_pattern_decision_agrees_with_cells(fig1a_data):
    ds = fig1a_data.take(np.arange(4000))
    for method in ("cv", "nrr"):
        row = pattern_table(ds, "X", "Y", "Z", CriterionConfig(method=method, seed=2))
        assert row.decision == decision_from_cells(row.cells)
        assert len(row.p_values) == 4
        assert row.meta["method"] == method


def test_threads_do_not_change_decisions(fig1a_data):
    ds = fig1a_data.take(np.arange(2000))
    a = infer_potential_cause(ds, "X", "Y", ["Z"], CriterionConfig(seed=3, threads=1))
    b = infer_potential_cause(ds, "X", "Y", ["Z"], CriterionConfig(seed=3, threads=3))
    assert a.to_dict() == b.to_dict()


def test_nrr_decision_records_approximation(fig1a_data):
    ds = fig1a_data.take(np.arange(1000))
    d = infer_potential_cause(ds, "X", "Y", [], CriterionConfig(method="nrr"))
    assert "approximation" in d.metadata


def test_search_errors_keep_partial_evidence():
    rng = np.random.default_rng(1)
    x = rng.normal(size=60)
    ds = frame(X=x, Y=x + rng.normal(size=60), Z=rng.normal(size=60))
    cfg = CriterionConfig(min_stratum=50)
    with pytest.raises(InferenceError) as info:
        infer_potential_cause(ds, "X", "Y", ["Z"], cfg)
    assert all(e.s == () for e in info.value.evidence)


def test_argument_validation():
    rng = np.random.default_rng(2)
    ds = frame(X=rng.normal(size=100), Y=rng.normal(size=100))
    with pytest.raises(ValueError):
        infer_potential_cause(ds, "X", "X")
    with pytest.raises(ValueError):
        infer_potential_cause(ds, "X", "Y", ["X"])
    with pytest.raises(KeyError):
        infer_potential_cause(ds, "X", "Y", ["W"])
    with pytest.raises(ValueError):
        CriterionConfig(method="other")
    with pytest.raises(ValueError):
        CriterionConfig(max_pool_size=2, max_witness_size=3)
    with pytest.raises(ValueError):
        infer_potential_cause(ds, "X", "Y", [f"c{i}" for i in range(9)])
