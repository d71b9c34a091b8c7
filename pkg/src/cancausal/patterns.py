"""Four-cell independence patterns between a pair and one extra variable.

A row lists, for a pair ``(x, y)`` and an extra variable ``z``, whether the
configured test accepts independence in the cells

    (y | x), (x | y), (y | x, z), (x | y, z)

and whether that pattern licenses ``x`` as a potential cause of ``y``. With
no extra variable the row has only the first two cells.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

IND, DEP = "indep", "dep"
CELL_LABELS = ("Y|X", "X|Y", "Y|X,Z", "X|Y,Z")


def cell_queries(x: str, y: str, z: str | None):
    """``(target, tested, conditioning)`` for each cell, in row order."""
    cells = [(y, x, ()), (x, y, ())]
    if z is not None:
        cells += [(y, x, (z,)), (x, y, (z,))]
    return cells


def decision_from_cells(cells: Sequence[str]) -> bool:
    """Potential-cause decision for ``x -> y`` implied by a pattern.

    The witness search over ``{}`` then ``{z}`` succeeds when the forward
    test accepts and every reverse test over subsets of the witness rejects.
    """
    c = list(cells)
    if c[0] == IND and c[1] == DEP:
        return True
    return len(c) == 4 and c[2] == IND and c[1] == DEP and c[3] == DEP


@dataclass(frozen=True)
class PatternRow:
    cells: tuple
    decision: bool
    labels: tuple = CELL_LABELS
    p_values: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.cells) not in (2, 4):
            raise ValueError("a pattern row has 2 or 4 cells")
        if any(c not in (IND, DEP) for c in self.cells):
            raise ValueError(f"cells must be {IND!r} or {DEP!r}")
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "labels", tuple(self.labels[:len(self.cells)]))
        object.__setattr__(self, "p_values", tuple(self.p_values))

    @classmethod
    def from_cells(cls, cells, **kw) -> "PatternRow":
        return cls(tuple(cells), decision_from_cells(cells), **kw)

    def to_dict(self) -> dict:
        return {"cells": list(self.cells), "decision": self.decision,
                "labels": list(self.labels), "p_values": list(self.p_values),
                "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "PatternRow":
        return cls(tuple(d["cells"]), d["decision"], tuple(d["labels"]),
                   tuple(d["p_values"]), d.get("meta", {}))


@dataclass(frozen=True)
class VotedRow:
    """Per-cell majority over several rows, with the agreement counts."""

    cells: tuple
    decision: bool
    cell_agreement: tuple
    decision_agreement: int
    n: int

    def to_dict(self) -> dict:
        return {"cells": list(self.cells), "decision": self.decision,
                "cell_agreement": list(self.cell_agreement),
                "decision_agreement": self.decision_agreement, "n": self.n}


def majority(rows: Sequence[PatternRow]) -> VotedRow:
    """Majority vote per cell and for the decision; ties go to ``dep`` / No."""
    if not rows:
        raise ValueError("no rows to vote over")
    k = len(rows[0].cells)
    cells, agree = [], []
    for i in range(k):
        cnt = Counter(r.cells[i] for r in rows)
        win = IND if cnt[IND] > cnt[DEP] else DEP
        cells.append(win)
        agree.append(cnt[win])
    yes = sum(r.decision for r in rows)
    dec = yes > len(rows) - yes
    return VotedRow(tuple(cells), dec, tuple(agree), yes if dec else len(rows) - yes,
                    len(rows))
