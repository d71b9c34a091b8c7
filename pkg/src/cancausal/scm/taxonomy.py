"""Split a node's equation into the summand buckets used by the CAN conditions.

For a target ``y`` and a reference parent ``x`` every top-level summand of
``y``'s equation lands in exactly one bucket:

``f11``                 terms containing ``x`` (and not the noise of ``y``)
``f12``                 other noise-free terms that are not linear in a single variable
``linear_obs_funccoef`` ``g(V~) * V`` with ``V`` observed, ``g`` of observed variables
``linear_obs_const``    ``beta * V`` with ``V`` observed
``linear_hid_funccoef`` ``g(V~) * U`` with ``U`` hidden, ``g`` of observed variables
``linear_hid_const``    ``alpha * U`` with ``U`` hidden
``noise_mixing``        terms holding the noise of ``y`` together with variables
``pure_noise``          terms that only hold the noise of ``y``

Sums are distributed at the top level only (through ``Scaled`` and nested
``Sum`` nodes); any other root is classified whole.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Constant, Expr, Product, Scaled, Sum, Unary, VarRef, add, scale
from .model import ScmModel

BUCKETS = (
    "f11",
    "f12",
    "linear_obs_funccoef",
    "linear_obs_const",
    "linear_hid_funccoef",
    "linear_hid_const",
    "noise_mixing",
    "pure_noise",
)


@dataclass(frozen=True)
class Term:
    expr: Expr
    bucket: str
    observed_args: frozenset
    hidden_args: frozenset
    linear_var: str | None = None
    coefficient_args: frozenset = frozenset()


@dataclass(frozen=True)
class TermTaxonomy:
    y: str
    x: str
    terms: tuple

    def _in(self, bucket):
        return [t for t in self.terms if t.bucket == bucket]

    def _union(self, bucket, attr):
        out = set()
        for t in self._in(bucket):
            out |= getattr(t, attr)
        return frozenset(out)

    @property
    def f11_args(self) -> frozenset:
        return self._union("f11", "observed_args") | self._union("f11", "hidden_args")

    @property
    def V11(self) -> frozenset:
        return self._union("f11", "observed_args") - {self.x}

    @property
    def U11(self) -> frozenset:
        return self._union("f11", "hidden_args")

    @property
    def V12(self) -> frozenset:
        return self._union("f12", "observed_args")

    @property
    def U12(self) -> frozenset:
        return self._union("f12", "hidden_args")

    @property
    def f12_args(self) -> frozenset:
        return self.V12 | self.U12

    @property
    def V13(self) -> frozenset:
        return frozenset(t.linear_var for t in self._in("linear_obs_funccoef"))

    @property
    def V13_coef_args(self) -> frozenset:
        return self._union("linear_obs_funccoef", "coefficient_args")

    @property
    def V3(self) -> frozenset:
        return frozenset(t.linear_var for t in self._in("linear_obs_const"))

    @property
    def U14(self) -> frozenset:
        return frozenset(t.linear_var for t in self._in("linear_hid_funccoef"))

    @property
    def U14_coef_args(self) -> frozenset:
        return self._union("linear_hid_funccoef", "coefficient_args")

    @property
    def U3(self) -> frozenset:
        return frozenset(t.linear_var for t in self._in("linear_hid_const"))

    @property
    def V2(self) -> frozenset:
        return self._union("noise_mixing", "observed_args")

    @property
    def U2(self) -> frozenset:
        return self._union("noise_mixing", "hidden_args")

    @property
    def noise_mixing_args(self) -> frozenset:
        return self.V2 | self.U2

    @property
    def pure_noise(self) -> bool:
        return bool(self._in("pure_noise"))

    @property
    def hidden_parents(self) -> frozenset:
        out = set()
        for t in self.terms:
            out |= t.hidden_args
        return frozenset(out)

    @property
    def x_in_noise_mixing(self) -> bool:
        return self.x in self.noise_mixing_args

    @property
    def an_reducible(self) -> bool:
        """Noise separable from ``x``: ``x`` is outside every noise-mixing term."""
        return not self.x_in_noise_mixing

    def bucket_terms(self, bucket: str) -> list:
        return [t.expr for t in self._in(bucket)]

    def reassemble(self) -> Expr:
        exprs = [t.expr for b in BUCKETS for t in self._in(b)]
        return add(*exprs) if exprs else Constant(0.0)

    def summary(self) -> dict:
        return {
            "f11": sorted(self.f11_args),
            "f12": sorted(self.f12_args),
            "linear_obs_funccoef": {t.linear_var: sorted(t.coefficient_args)
                                    for t in self._in("linear_obs_funccoef")},
            "linear_obs_const": sorted(self.V3),
            "linear_hid_funccoef": {t.linear_var: sorted(t.coefficient_args)
                                    for t in self._in("linear_hid_funccoef")},
            "linear_hid_const": sorted(self.U3),
            "noise_mixing": sorted(self.noise_mixing_args),
            "pure_noise": self.pure_noise,
        }


def _summands(e: Expr, c: float = 1.0):
    if isinstance(e, Sum):
        for t in e.terms:
            yield from _summands(t, c)
    elif isinstance(e, Scaled) and isinstance(e.arg, Sum):
        yield from _summands(e.arg, c * e.coefficient)
    elif c == 1.0:
        yield e
    else:
        yield scale(c, e)


def _strip(e: Expr) -> Expr:
    """Drop scaling and identity wrappers around a single variable factor."""
    while isinstance(e, (Scaled, Unary)) and (isinstance(e, Scaled) or e.kind == "identity"):
        e = e.arg
    return e


def _factors(e: Expr):
    e = _strip(e)
    if isinstance(e, Product):
        out = []
        for f in e.factors:
            out.extend(_factors(f))
        return out
    return [e]


def _linear_split(term: Expr, is_observed):
    """Return ``(var, coefficient_args)`` if ``term`` is linear in one variable
    whose coefficient depends only on observed variables, else ``None``."""
    facs = _factors(term)
    bare = [f for f in facs if isinstance(f, VarRef)]
    candidates = []
    for f in bare:
        others = [g for g in facs if g is not f]
        other_vars = frozenset().union(*(g.var_refs() for g in others)) if others else frozenset()
        if f.name in other_vars:
            continue
        if sum(1 for g in bare if g.name == f.name) > 1:
            continue
        if all(is_observed(v) for v in other_vars):
            candidates.append((f.name, other_vars))
    if not candidates:
        return None
    # prefer the hidden variable as the linear one (random coefficient times observed)
    candidates.sort(key=lambda c: (is_observed(c[0]), c[0]))
    return candidates[0]


def decompose(model: ScmModel, y: str, x: str) -> TermTaxonomy:
    g = model.graph
    if x not in g.parents(y):
        raise ValueError(f"{x!r} is not a parent of {y!r}")
    noise = model.noise_of(y)
    is_obs = g.is_observed
    terms = []
    for t in _summands(model.equations[y]):
        vars_ = t.var_refs()
        obs = frozenset(v for v in vars_ if is_obs(v))
        hid = vars_ - obs
        has_noise = noise is not None and noise in t.noise_refs()
        if has_noise:
            bucket = "noise_mixing" if vars_ else "pure_noise"
            terms.append(Term(t, bucket, obs, hid))
            continue
        if x in vars_:
            terms.append(Term(t, "f11", obs, hid))
            continue
        lin = _linear_split(t, is_obs) if vars_ else None
        if lin is not None:
            var, coef = lin
            if coef:
                bucket = "linear_obs_funccoef" if is_obs(var) else "linear_hid_funccoef"
            else:
                bucket = "linear_obs_const" if is_obs(var) else "linear_hid_const"
            terms.append(Term(t, bucket, obs, hid, var, frozenset(coef)))
            continue
        terms.append(Term(t, "f12", obs, hid))
    return TermTaxonomy(y, x, tuple(terms))
