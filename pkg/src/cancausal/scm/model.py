"""Structural causal models over expression trees and forward sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..graph import CausalGraph
from .expr import Expr, NoiseRef

BLOCK_ROWS = 8192


class ModelError(ValueError):
    pass


class SamplingError(RuntimeError):
    def __init__(self, node, msg):
        self.node = node
        super().__init__(f"node {node!r}: {msg}")


@dataclass(frozen=True)
class NoiseSpec:
    """A named noise term: ``gaussian(mean, sd)``, ``uniform(lo, hi)`` or ``laplace(loc, scale)``."""

    name: str
    distribution: str
    params: tuple

    def __post_init__(self):
        d, p = self.distribution, self.params
        if d not in ("gaussian", "uniform", "laplace"):
            raise ModelError(f"noise {self.name!r}: unknown distribution {d!r}")
        if len(p) != 2:
            raise ModelError(f"noise {self.name!r}: {d} takes two parameters")
        if d == "gaussian" and not p[1] > 0:
            raise ModelError(f"noise {self.name!r}: sd must be > 0")
        if d == "uniform" and not p[1] > p[0]:
            raise ModelError(f"noise {self.name!r}: need hi > lo")
        if d == "laplace" and not p[1] > 0:
            raise ModelError(f"noise {self.name!r}: scale must be > 0")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        a, b = self.params
        if self.distribution == "gaussian":
            return rng.normal(a, b, n)
        if self.distribution == "uniform":
            return rng.uniform(a, b, n)
        return rng.laplace(a, b, n)

    @property
    def variance(self) -> float:
        a, b = self.params
        if self.distribution == "gaussian":
            return b * b
        if self.distribution == "uniform":
            return (b - a) ** 2 / 12
        return 2 * b * b


class ScmModel:
    """Graph + one equation per node + private noise terms.

    The graph's edges must cover the variables each equation references;
    ``derived_graph`` rebuilds the edge set from the equations alone.
    A node may be deterministic (no noise), but a noise term may feed at
    most one node.
    """

    def __init__(self, graph: CausalGraph, equations: Mapping[str, Expr],
                 noises: Sequence[NoiseSpec], description: str = "", default_seed: int = 0):
        self.graph = graph
        self.equations = dict(equations)
        self.noises = {nz.name: nz for nz in noises}
        self.description = description
        self.default_seed = default_seed
        if len(self.noises) != len(noises):
            raise ModelError("duplicate noise names")
        clash = set(self.noises) & set(graph.nodes)
        if clash:
            raise ModelError(f"names used for both nodes and noises: {sorted(clash)}")

        owner = {}
        for v in graph.nodes:
            if v not in self.equations:
                raise ModelError(f"node {v!r} has no equation")
            e = self.equations[v]
            extra = e.var_refs() - graph.parents(v)
            if extra:
                raise ModelError(f"equation of {v!r} references non-parents {sorted(extra)}")
            nz = e.noise_refs()
            unknown = nz - set(self.noises)
            if unknown:
                raise ModelError(f"equation of {v!r} references undeclared noise {sorted(unknown)}")
            if len(nz) > 1:
                raise ModelError(f"node {v!r} has more than one noise term {sorted(nz)}")
            for name in nz:
                if name in owner:
                    raise ModelError(f"noise {name!r} shared by {owner[name]!r} and {v!r}")
                owner[name] = v
        extra_eq = set(self.equations) - set(graph.nodes)
        if extra_eq:
            raise ModelError(f"equations for undeclared nodes {sorted(extra_eq)}")
        self._noise_of = {v: next(iter(self.equations[v].noise_refs()), None) for v in graph.nodes}

    @classmethod
    def from_equations(cls, nodes, equations, noises, **kw) -> "ScmModel":
        """Build the graph from the variables each equation references."""
        edges = [(p, v) for v, e in equations.items() for p in e.var_refs()]
        return cls(CausalGraph(nodes, edges), equations, noises, **kw)

    def noise_of(self, v: str):
        return self._noise_of[v]

    def is_exogenous(self, v: str) -> bool:
        e = self.equations[v]
        return isinstance(e, NoiseRef)

    def derived_graph(self) -> CausalGraph:
        return self.graph.with_edges(
            (p, v) for v, e in self.equations.items() for p in e.var_refs())

    def with_equation(self, node: str, expr: Expr) -> "ScmModel":
        eqs = dict(self.equations)
        eqs[node] = expr
        nodes = [(n, self.graph.is_observed(n)) for n in self.graph.nodes]
        return ScmModel.from_equations(nodes, eqs, list(self.noises.values()),
                                       description=self.description,
                                       default_seed=self.default_seed)

    def __repr__(self):
        lines = [f"ScmModel({self.description!r})"]
        for v in self.graph.topological_order():
            tag = "" if self.graph.is_observed(v) else " [hidden]"
            lines.append(f"  {v}{tag} = {self.equations[v]}")
        return "\n".join(lines)

    def sample(self, n: int, seed: int | None = None) -> "Dataset":
        return sample(self, n, self.default_seed if seed is None else seed)


@dataclass
class Dataset:
    """Column-labelled sample matrix; ``data`` has shape (rows, columns)."""

    columns: tuple
    observed: tuple
    data: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.observed = tuple(bool(o) for o in self.observed)
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ValueError("data must be a (rows, columns) matrix matching the column labels")
        if len(self.observed) != len(self.columns):
            raise ValueError("one observed flag per column")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("dataset contains non-finite entries")
        self._pos = {c: i for i, c in enumerate(self.columns)}

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def __len__(self):
        return self.data.shape[0]

    def __contains__(self, name):
        return name in self._pos

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self._pos[name]]
        except KeyError:
            raise KeyError(f"no column named {name!r}; have {list(self.columns)}") from None

    def __getitem__(self, name):
        return self.column(name)

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        return np.column_stack([self.column(c) for c in names]) if names else np.empty((len(self), 0))

    def observed_view(self) -> "Dataset":
        keep = [i for i, o in enumerate(self.observed) if o]
        return Dataset([self.columns[i] for i in keep], [True] * len(keep),
                       self.data[:, keep], self.seed, dict(self.meta))

    def select(self, names: Sequence[str]) -> "Dataset":
        idx = [self._pos[c] for c in names]
        return Dataset(list(names), [self.observed[i] for i in idx], self.data[:, idx],
                       self.seed, dict(self.meta))

    def take(self, rows) -> "Dataset":
        return Dataset(self.columns, self.observed, self.data[rows], self.seed, dict(self.meta))


def _block_rng(seed: int, block: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block, stream))
    return np.random.Generator(np.random.Philox(ss))


def _sample_block(model: ScmModel, seed: int, block: int, rows: int) -> np.ndarray:
    env = {}
    for k, name in enumerate(sorted(model.noises)):
        env[name] = model.noises[name].draw(_block_rng(seed, block, k), rows)
    order = model.graph.topological_order()
    out = np.empty((rows, len(model.graph.nodes)))
    col = {v: i for i, v in enumerate(model.graph.nodes)}
    with np.errstate(all="ignore"):
        for v in order:
            val = np.broadcast_to(np.asarray(model.equations[v].evaluate(env), dtype=float),
                                  (rows,))
            if not np.all(np.isfinite(val)):
                bad = int(np.sum(~np.isfinite(val)))
                raise SamplingError(v, f"{bad} non-finite value(s) during evaluation")
            env[v] = val
            out[:, col[v]] = val
    return out


def sample(model: ScmModel, n: int, seed: int, threads: int = 1) -> Dataset:
    """Draw ``n`` rows by evaluating the equations in topological order.

    Rows are generated in fixed-size blocks, each with its own counter-based
    substream keyed by ``(seed, block, noise index)``, so the output does not
    depend on ``threads``. Hidden columns are included; use
    ``Dataset.observed_view`` to drop them.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    starts = list(range(0, n, BLOCK_ROWS))
    jobs = [(b, min(BLOCK_ROWS, n - s)) for b, s in enumerate(starts)]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            blocks = list(ex.map(lambda j: _sample_block(model, seed, *j), jobs))
    else:
        blocks = [_sample_block(model, seed, *j) for j in jobs]
    g = model.graph
    return Dataset(g.nodes, [g.is_observed(v) for v in g.nodes], np.vstack(blocks), seed,
                   {"model": model.description})
