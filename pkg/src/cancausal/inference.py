"""Potential-cause inference from asymmetries of cv- or nrr-independence.

``infer_potential_cause`` searches conditioning sets ``S`` drawn from a pool,
smallest first and lexicographic within a size. For the first ``S`` whose
forward test (``y`` given ``x`` and ``S``) accepts independence it runs the
reverse test (``x`` given ``y`` and ``S'``) for every ``S' <= S``. If all of
those reject, ``x`` is reported as a potential cause of ``y`` with witness
``S``; otherwise the search goes on. Every verdict is kept as evidence.

Each test's seed is derived from the base seed and the test's identity, so a
test gives the same verdict wherever it appears, and any verdict can be
replayed from the evidence trail.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .indep_tests import IndepTestConfig, Verdict, derive_seed, run_test
from .patterns import DEP, IND, PatternRow, cell_queries
from .scm.model import Dataset

POTENTIAL_CAUSE = "PotentialCause"
INCONCLUSIVE = "Inconclusive"

NRR_APPROXIMATION = (
    "residual independence is checked for one regression family (kernel "
    "regression of the target on x and S jointly), not for every regression")


@dataclass(frozen=True)
class CriterionConfig:
    method: str = "cv"
    level: float = 0.01
    n_perm: int = 199
    max_pool_size: int = 8
    max_witness_size: int = 3
    seed: int = 0
    stratum_size: int = 20
    min_stratum: int = 10
    regression: str = "ll"
    threads: int = 1

    def __post_init__(self):
        if self.method not in ("cv", "nrr"):
            raise ValueError(f"unknown method {self.method!r}; use 'cv' or 'nrr'")
        if self.max_pool_size < self.max_witness_size:
            raise ValueError("max_pool_size must be >= max_witness_size")
        if self.max_witness_size < 0:
            raise ValueError("max_witness_size must be >= 0")
        IndepTestConfig(level=self.level, n_perm=self.n_perm)

    def test_config(self, seed: int) -> IndepTestConfig:
        return IndepTestConfig(level=self.level, n_perm=self.n_perm, seed=seed,
                               stratum_size=self.stratum_size, min_stratum=self.min_stratum,
                               regression=self.regression, threads=self.threads)

    def test_seed(self, y: str, x: str, s: Sequence[str]) -> int:
        return derive_seed(self.seed, self.method, y, x, *sorted(s))

    def to_dict(self) -> dict:
        # thread count never changes results, so it stays out of reports
        d = asdict(self)
        d.pop("threads")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CriterionConfig":
        return cls(**d)


@dataclass(frozen=True)
class Evidence:
    direction: str          # "forward" or "reverse"
    candidate: tuple        # the forward set this entry belongs to
    y: str
    x: str
    s: tuple
    verdict: Verdict

    def to_dict(self) -> dict:
        return {"direction": self.direction, "candidate": list(self.candidate),
                "y": self.y, "x": self.x, "s": list(self.s),
                "verdict": self.verdict.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Evidence":
        return cls(d["direction"], tuple(d["candidate"]), d["y"], d["x"], tuple(d["s"]),
                   Verdict.from_dict(d["verdict"]))


@dataclass(frozen=True)
class Decision:
    kind: str
    x: str
    y: str
    witness_set: tuple | None
    evidence: tuple
    config: CriterionConfig
    metadata: dict = field(default_factory=dict)

    @property
    def is_potential_cause(self) -> bool:
        return self.kind == POTENTIAL_CAUSE

    def reverse_checks(self, candidate) -> list:
        cand = tuple(candidate)
        return [e for e in self.evidence if e.direction == "reverse" and e.candidate == cand]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "x": self.x, "y": self.y,
                "witness_set": None if self.witness_set is None else list(self.witness_set),
                "evidence": [e.to_dict() for e in self.evidence],
                "config": self.config.to_dict(), "metadata": self.metadata}

    @classmethod
    def from_dict(cls, d: dict) -> "Decision":
        w = d["witness_set"]
        return cls(d["kind"], d["x"], d["y"], None if w is None else tuple(w),
                   tuple(Evidence.from_dict(e) for e in d["evidence"]),
                   CriterionConfig.from_dict(d["config"]), d.get("metadata", {}))

    def summary(self) -> str:
        if self.is_potential_cause:
            w = "{" + ", ".join(self.witness_set) + "}"
            return f"{POTENTIAL_CAUSE}({self.x} -> {self.y}), witness {w}"
        return f"{INCONCLUSIVE} for {self.x} -> {self.y} ({len(self.evidence)} tests)"


class InferenceError(RuntimeError):
    """A test failed during the search; ``evidence`` holds what ran before it."""

    def __init__(self, msg, evidence):
        super().__init__(msg)
        self.evidence = tuple(evidence)


def _subsets(items, max_size):
    for k in range(max_size + 1):
        yield from itertools.combinations(items, k)


class _Runner:
    """Runs tests with derived seeds and remembers verdicts within one search."""

    def __init__(self, ds, cfg):
        self.ds = ds
        self.cfg = cfg
        self.cache = {}

    def __call__(self, y, x, s) -> Verdict:
        key = (y, x, tuple(sorted(s)))
        if key not in self.cache:
            seed = self.cfg.test_seed(y, x, s)
            self.cache[key] = run_test(self.cfg.method, self.ds, y, x, list(key[2]),
                                       self.cfg.test_config(seed))
        return self.cache[key]


def infer_potential_cause(ds: Dataset, x: str, y: str, pool: Sequence[str] = (),
                          cfg: CriterionConfig | None = None) -> Decision:
    cfg = cfg or CriterionConfig()
    return _infer(ds, x, y, pool, cfg, _Runner(ds, cfg))


def _infer(ds, x, y, pool, cfg, run) -> Decision:
    pool = tuple(sorted(dict.fromkeys(pool)))
    if x == y:
        raise ValueError("x and y must differ")
    if x in pool or y in pool:
        raise ValueError("the pool must not contain x or y")
    if len(pool) > cfg.max_pool_size:
        raise ValueError(f"pool has {len(pool)} columns; the limit is {cfg.max_pool_size}")
    for c in (x, y, *pool):
        if c not in ds:
            raise KeyError(f"no column named {c!r}; have {list(ds.columns)}")

    evidence = []
    witness = None
    meta = {"pool": list(pool), "candidates_tried": 0}
    if cfg.method == "nrr":
        meta["approximation"] = NRR_APPROXIMATION

    try:
        for S in _subsets(pool, min(cfg.max_witness_size, len(pool))):
            meta["candidates_tried"] += 1
            fwd = run(y, x, S)
            evidence.append(Evidence("forward", S, y, x, S, fwd))
            if not fwd.independent:
                continue
            subs = list(_subsets(S, len(S)))
            if cfg.threads > 1 and len(subs) > 1:
                with ThreadPoolExecutor(cfg.threads) as ex:
                    revs = list(ex.map(lambda sp: run(x, y, sp), subs))
            else:
                revs = [run(x, y, sp) for sp in subs]
            for sp, v in zip(subs, revs):
                evidence.append(Evidence("reverse", S, x, y, sp, v))
            if all(not v.independent for v in revs):
                witness = S
                break
    except Exception as exc:
        raise InferenceError(f"test failed during the search: {exc}", evidence) from exc

    kind = POTENTIAL_CAUSE if witness is not None else INCONCLUSIVE
    return Decision(kind, x, y, witness, tuple(evidence), cfg, meta)


def replay_decision(ds: Dataset, decision: Decision) -> bool:
    """Re-run every recorded verdict with its seed; True if all match exactly."""
    cfg = decision.config
    for e in decision.evidence:
        v = run_test(cfg.method, ds, e.y, e.x, list(e.s), cfg.test_config(e.verdict.seed))
        if v.to_dict() != e.verdict.to_dict():
            return False
    again = infer_potential_cause(ds, decision.x, decision.y, decision.metadata.get("pool", ()),
                                  cfg)
    return again.kind == decision.kind and again.witness_set == decision.witness_set


def pattern_table(ds: Dataset, x: str, y: str, z: str | None = None,
                  cfg: CriterionConfig | None = None) -> PatternRow:
    """Cells ``(y|x, x|y, y|x,z, x|y,z)`` and the potential-cause decision for ``x -> y``."""
    cfg = cfg or CriterionConfig()
    cols = [x, y] + ([z] if z is not None else [])
    if len(set(cols)) != len(cols):
        raise ValueError("columns must be distinct")
    run = _Runner(ds, cfg)
    verdicts = [run(t, u, s) for t, u, s in cell_queries(x, y, z)]
    cells = tuple(IND if v.independent else DEP for v in verdicts)
    decision = _infer(ds, x, y, [z] if z is not None else [], cfg, run)
    return PatternRow(cells, decision.is_potential_cause,
                      p_values=tuple(v.p_value for v in verdicts),
                      meta={"method": cfg.method, "seeds": [v.seed for v in verdicts]})
