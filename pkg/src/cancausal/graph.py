"""Directed acyclic causal graphs with observability flags and d-separation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple


class GraphError(ValueError):
    """Invalid graph construction or query."""


class CycleError(GraphError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__("edges form a directed cycle: " + " -> ".join(cycle))


@dataclass(frozen=True)
class NodeId:
    index: int
    name: str

    def __str__(self):
        return self.name


class Relatives(NamedTuple):
    parents: frozenset
    descendants: frozenset
    non_descendants: frozenset


class CausalGraph:
    """Immutable DAG whose nodes carry an ``observed`` flag.

    Nodes are addressed by name everywhere in the public API; ``node_id``
    gives the (index, name) pair when a stable integer handle is needed.

    Parameters
    ----------
    nodes : iterable of ``(name, observed)`` pairs, or of names (all observed)
    edges : iterable of ``(parent, child)`` name pairs
    """

    def __init__(self, nodes: Iterable, edges: Iterable = ()):
        names = []
        observed = {}
        for item in nodes:
            if isinstance(item, str):
                name, obs = item, True
            else:
                name, obs = item
            if name in observed:
                raise GraphError(f"duplicate node {name!r}")
            names.append(name)
            observed[name] = bool(obs)
        self._names = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}
        self._observed = observed

        parents = {n: set() for n in names}
        children = {n: set() for n in names}
        edge_set = set()
        for a, b in edges:
            for v in (a, b):
                if v not in self._index:
                    raise GraphError(f"edge endpoint {v!r} is not a declared node")
            if a == b:
                raise GraphError(f"self-edge on {a!r}")
            edge_set.add((a, b))
            parents[b].add(a)
            children[a].add(b)
        self._edges = frozenset(edge_set)
        self._parents = {n: frozenset(p) for n, p in parents.items()}
        self._children = {n: frozenset(c) for n, c in children.items()}
        self._order = self._topological_order()
        self._desc_cache = {}

    # -- basic accessors -------------------------------------------------
    @property
    def nodes(self) -> tuple:
        return self._names

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def observed_nodes(self) -> tuple:
        return tuple(n for n in self._names if self._observed[n])

    @property
    def hidden_nodes(self) -> tuple:
        return tuple(n for n in self._names if not self._observed[n])

    def is_observed(self, v: str) -> bool:
        self._check(v)
        return self._observed[v]

    def node_id(self, v: str) -> NodeId:
        self._check(v)
        return NodeId(self._index[v], v)

    def parents(self, v: str) -> frozenset:
        self._check(v)
        return self._parents[v]

    def children(self, v: str) -> frozenset:
        self._check(v)
        return self._children[v]

    def topological_order(self) -> tuple:
        return self._order

    def __contains__(self, v) -> bool:
        return v in self._index

    def __eq__(self, other):
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return (self._names == other._names and self._edges == other._edges
                and self._observed == other._observed)

    def __hash__(self):
        return hash((self._names, self._edges))

    def __repr__(self):
        es = ", ".join(f"{a}->{b}" for a, b in sorted(self._edges))
        hid = ",".join(self.hidden_nodes)
        return f"CausalGraph([{es}], hidden={{{hid}}})"

    def with_edges(self, edges: Iterable) -> "CausalGraph":
        return CausalGraph([(n, self._observed[n]) for n in self._names], edges)

    # -- queries ---------------------------------------------------------
    def _check(self, v):
        if v not in self._index:
            raise GraphError(f"unknown node {v!r}")

    def _topological_order(self):
        indeg = {n: len(self._parents[n]) for n in self._names}
        queue = deque(n for n in self._names if indeg[n] == 0)
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in sorted(self._children[n], key=self._index.get):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self._names):
            raise CycleError(self._find_cycle(set(self._names) - set(order)))
        return tuple(order)

    def _find_cycle(self, remaining):
        # every node left after Kahn's algorithm lies on or upstream of a cycle
        start = min(remaining, key=self._index.get)
        seen = {}
        path = []
        v = start
        while v not in seen:
            seen[v] = len(path)
            path.append(v)
            v = min((p for p in self._parents[v] if p in remaining), key=self._index.get)
        cycle = path[seen[v]:][::-1]
        return cycle + [cycle[0]]

    def descendants(self, v: str) -> frozenset:
        self._check(v)
        if v not in self._desc_cache:
            seen = set()
            stack = list(self._children[v])
            while stack:
                u = stack.pop()
                if u not in seen:
                    seen.add(u)
                    stack.extend(self._children[u])
            self._desc_cache[v] = frozenset(seen)
        return self._desc_cache[v]

    def ancestors(self, v: str) -> frozenset:
        self._check(v)
        seen = set()
        stack = list(self._parents[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self._parents[u])
        return frozenset(seen)

    def relatives(self, v: str) -> Relatives:
        """Parents, descendants and non-descendants (which include ``v``)."""
        desc = self.descendants(v)
        return Relatives(self._parents[v], desc, frozenset(self._names) - desc)

    def is_adjacent(self, a: str, b: str) -> bool:
        """Direct edge either way, or a hidden node with edges into both."""
        self._check(a)
        self._check(b)
        if a == b:
            raise GraphError("adjacency needs two distinct nodes")
        if (a, b) in self._edges or (b, a) in self._edges:
            return True
        shared = self._parents[a] & self._parents[b]
        return any(not self._observed[k] for k in shared)

    def potential_causes(self, v: str) -> frozenset:
        """Parents of ``v`` plus nodes sharing a hidden parent with it."""
        out = set(self.parents(v))
        for k in self._parents[v]:
            if not self._observed[k]:
                out |= self._children[k]
        out.discard(v)
        return frozenset(out)

    def d_separated(self, a: str, b: str, s: Iterable = ()) -> bool:
        """True iff every path between ``a`` and ``b`` is blocked by ``s``.

        Reachability formulation: a ball travels from ``a`` remembering
        whether it arrived along an edge into the current node (``up`` is
        False) or out of it (``up`` is True). Colliders pass the ball only if
        they are in ``s`` or have a descendant in ``s``.
        """
        s = frozenset(s)
        for v in (a, b, *s):
            self._check(v)
        if a == b:
            raise GraphError("d-separation needs two distinct nodes")
        if a in s or b in s:
            raise GraphError("query nodes must not be in the conditioning set")

        # nodes with a descendant in s (including s itself)
        anc_s = set(s)
        stack = list(s)
        while stack:
            u = stack.pop()
            for p in self._parents[u]:
                if p not in anc_s:
                    anc_s.add(p)
                    stack.append(p)

        # state (node, up): up=True means we reached node from one of its children
        visited = set()
        queue = deque([(a, True)])
        while queue:
            v, up = queue.popleft()
            if (v, up) in visited:
                continue
            visited.add((v, up))
            if v == b:
                return False
            if up and v not in s:
                for p in self._parents[v]:
                    queue.append((p, True))
                for c in self._children[v]:
                    queue.append((c, False))
            elif not up:
                if v not in s:
                    for c in self._children[v]:
                        queue.append((c, False))
                if v in anc_s:
                    for p in self._parents[v]:
                        queue.append((p, True))
        return True
