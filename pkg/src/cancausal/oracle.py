"""Ground truth for fully known models.

The structural checks read a node's equation through the term taxonomy and
the graph (hidden nodes included). They only use a sufficient condition:
with every observed argument of the non-noise terms placed in ``S``, the
form holds when ``x`` is d-separated from each remaining hidden argument by
``S``. When that condition cannot be shown the answer is ``Unknown``;
``Fails`` is reserved for the two cases that rule the form out for every
``S``. ``numerical_pattern`` settles cells by running the tests on a large
simulated sample at a strict level.
"""

from __future__ import annotations

import enum
from typing import Sequence

from .indep_tests import Verdict, run_test
from .inference import CriterionConfig, pattern_table
from .patterns import PatternRow, majority
from .scm.model import ScmModel, sample
from .scm.taxonomy import TermTaxonomy, decompose

ORACLE_LEVEL = 0.001
# 999 is the fewest permutations whose smallest p-value (1/1000) can reach the level
ORACLE_PERMUTATIONS = 999
ORACLE_ROWS = 200_000


class TriState(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


def required_conditioning(tax: TermTaxonomy) -> frozenset:
    """Observed variables that must be held fixed for the sufficient condition."""
    return (tax.V11 | tax.V12 | tax.V13_coef_args | tax.U14_coef_args | tax.V2
            | tax.V13 | tax.V3)


def _check(model: ScmModel, y: str, x: str, s: Sequence[str]):
    g = model.graph
    s = frozenset(s)
    for v in (y, x, *s):
        g.node_id(v)
    if x not in g.parents(y):
        raise ValueError(f"{x!r} is not a parent of {y!r}")
    if x in s or y in s:
        raise ValueError("the conditioning set must exclude x and y")
    tax = decompose(model, y, x)
    if tax.x_in_noise_mixing or tax.U11:
        return TriState.FAILS, tax
    if not required_conditioning(tax) <= s:
        return TriState.UNKNOWN, tax
    for u in sorted(tax.hidden_parents - tax.U11 - s):
        if not g.d_separated(x, u, s):
            return TriState.UNKNOWN, tax
    return TriState.HOLDS, tax


def cv_can_structural(model: ScmModel, y: str, x: str, s: Sequence[str] = ()) -> TriState:
    """Does ``y``'s equation take the conditional-variance form in ``x`` given ``s``?"""
    return _check(model, y, x, s)[0]


def nrr_can_structural(model: ScmModel, y: str, x: str, s: Sequence[str] = ()) -> TriState:
    """Does ``y``'s equation take the residual-independence form in ``x`` given ``s``?

    The d-separation condition already implies full conditional independence
    of the hidden arguments from ``x``, so the sufficient condition is the
    same one used for the variance form.
    """
    return _check(model, y, x, s)[0]


def structural_cells(model: ScmModel, x: str, y: str, z: str | None = None,
                     kind: str = "cv") -> dict:
    """Structural answer for each pattern cell whose tested variable is a parent of the target."""
    fn = cv_can_structural if kind == "cv" else nrr_can_structural
    out = {}
    g = model.graph
    for i, (target, tested, s) in enumerate(
            [(y, x, ()), (x, y, ())] + ([(y, x, (z,)), (x, y, (z,))] if z else [])):
        if tested in g.parents(target):
            out[i] = fn(model, target, tested, s)
    return out


def numerical_pattern(model: ScmModel, x: str, y: str, z: str | None = None,
                      n: int = ORACLE_ROWS, seed: int = 0, method: str = "cv",
                      level: float = ORACLE_LEVEL, n_perm: int = ORACLE_PERMUTATIONS,
                      threads: int = 1) -> PatternRow:
    """Pattern row computed on ``n`` fresh rows at a strict level."""
    ds = sample(model, n, seed, threads)
    cfg = CriterionConfig(method=method, level=level, n_perm=n_perm, seed=seed,
                          threads=threads)
    return pattern_table(ds, x, y, z, cfg)


def numerical_cell(ds, target: str, tested: str, s: Sequence[str] = (), seed: int = 0,
                   method: str = "cv", level: float = ORACLE_LEVEL,
                   n_perm: int = ORACLE_PERMUTATIONS, threads: int = 1) -> Verdict:
    """One oracle-scale test, seeded exactly as the same cell of ``numerical_pattern``."""
    cfg = CriterionConfig(method=method, level=level, n_perm=n_perm, seed=seed, threads=threads)
    return run_test(method, ds, target, tested, list(s),
                    cfg.test_config(cfg.test_seed(target, tested, s)))


def voted_numerical_pattern(model: ScmModel, x: str, y: str, z: str | None = None,
                            seeds: Sequence[int] = range(10), **kw):
    rows = [numerical_pattern(model, x, y, z, seed=sd, **kw) for sd in seeds]
    return majority(rows), rows
