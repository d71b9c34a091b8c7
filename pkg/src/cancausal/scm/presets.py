"""Registry of example systems.

``fig1a``-``fig1d`` are Gaussian mixed models with one random coefficient
each (a hidden node entering a product term). ``gen_ee1``-``gen_ee3`` widen
the A and B structures to nonlinear equations and non-Gaussian noise.
The remaining presets are bivariate references and a post-nonlinear
generator.

Every preset records the query it is meant for (``x``, ``y``, ``pool``) and,
where known, the expected conditional-variance pattern in the order
``(Y|X, X|Y, Y|X,Z, X|Y,Z)`` with the resulting potential-cause decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .expr import NoiseRef, Unary, VarRef, add, mul, scale
from .model import NoiseSpec, ScmModel

IND, DEP = "indep", "dep"


def _v(name):
    return VarRef(name)


def _n(name):
    return NoiseRef(name)


def _gauss(name, sd=1.0):
    return NoiseSpec(name, "gaussian", (0.0, sd))


@dataclass(frozen=True)
class PresetInfo:
    name: str
    build: Callable[..., ScmModel]
    defaults: dict
    x: str = "X"
    y: str = "Y"
    pool: tuple = ("Z",)
    expected_cells: tuple | None = None
    expected_decision: bool | None = None
    notes: str = ""
    tags: tuple = field(default_factory=tuple)


def _fig1a(p):
    nodes = [("Z", True), ("X", True), ("Y", True), ("V", False), ("eps", False)]
    eqs = {
        "Z": _n("eta_z"),
        "V": _n("eta_v"),
        "eps": _n("eta_eps"),
        "X": add(scale(p["b_xz"], _v("Z")), _n("eta_x")),
        "Y": add(scale(p["b_yx"], _v("X")), scale(p["b_yz"], _v("Z")),
                 scale(p["c_re"], mul(_v("eps"), _v("V"))), _n("eta_y")),
    }
    noises = [_gauss("eta_z"), _gauss("eta_v"), _gauss("eta_eps"), _gauss("eta_x"),
              _gauss("eta_y", p["sd_y"])]
    return nodes, eqs, noises


def _fig1b(p):
    nodes = [("Z", True), ("X", True), ("Y", True), ("V", False), ("eps", False)]
    eqs = {
        "Z": _n("eta_z"),
        "V": _n("eta_v"),
        "eps": _n("eta_eps"),
        "X": add(scale(p["b_xz"], _v("Z")), scale(p["c_re"], mul(_v("eps"), _v("V"))),
                 _n("eta_x")),
        "Y": add(scale(p["b_yx"], _v("X")), scale(p["b_yz"], _v("Z")), _n("eta_y")),
    }
    noises = [_gauss("eta_z"), _gauss("eta_v"), _gauss("eta_eps"),
              _gauss("eta_x", p["sd_x"]), _gauss("eta_y")]
    return nodes, eqs, noises


def _fig1c(p):
    nodes = [("Z", True), ("X", True), ("Y", True), ("eps", False)]
    eqs = {
        "Z": _n("eta_z"),
        "eps": _n("eta_eps"),
        "X": add(scale(p["b_xz"], _v("Z")), _n("eta_x")),
        "Y": add(scale(p["b_yx"], _v("X")), scale(p["c_re"], mul(_v("eps"), _v("Z"))),
                 _n("eta_y")),
    }
    noises = [_gauss("eta_z"), _gauss("eta_eps"), _gauss("eta_x"), _gauss("eta_y", p["sd_y"])]
    return nodes, eqs, noises


def _fig1d(p):
    nodes = [("X", True), ("Y", True), ("Z", True), ("eps", False)]
    eqs = {
        "X": _n("eta_x"),
        "eps": _n("eta_eps"),
        "Y": add(scale(p["b_yx"], _v("X")), _n("eta_y")),
        "Z": add(scale(p["b_zx"], _v("X")), scale(p["c_re"], mul(_v("eps"), _v("X"))),
                 _n("eta_z")),
    }
    noises = [_gauss("eta_x"), _gauss("eta_eps"), _gauss("eta_y"), _gauss("eta_z", p["sd_z"])]
    return nodes, eqs, noises


def _gen_ee1(p):
    # Y = b X + b Z + f_y(V, eps, eps_y) with a nonlinear f_y and Laplace eps_y
    nodes = [("Z", True), ("X", True), ("Y", True), ("V", False), ("eps", False)]
    f_y = add(scale(p["c_re"], mul(_v("eps"), _v("V"))),
              Unary("tanh", add(_v("V"), _n("eps_y"))),
              scale(p["c_noise"], _n("eps_y")))
    eqs = {
        "Z": _n("eta_z"),
        "V": _n("eta_v"),
        "eps": _n("eta_eps"),
        "X": add(scale(p["b_xz"], _v("Z")), _n("eta_x")),
        "Y": add(scale(p["b_yx"], _v("X")), scale(p["b_yz"], _v("Z")), f_y),
    }
    noises = [_gauss("eta_z"), _gauss("eta_v"), _gauss("eta_eps"), _gauss("eta_x"),
              NoiseSpec("eps_y", "laplace", (0.0, p["laplace_scale"]))]
    return nodes, eqs, noises


def _gen_ee2(p):
    # Z generic; X = f_x(Z, eps_x); Y = f_y1(X, Z) + f_y2(Z, V, eps, eps_y)
    nodes = [("Z", True), ("X", True), ("Y", True), ("V", False), ("eps", False)]
    eqs = {
        "Z": _n("eps_z"),
        "V": _n("eta_v"),
        "eps": _n("eta_eps"),
        "X": add(Unary("tanh", scale(p["a_xz"], _v("Z"))), scale(0.5, _v("Z")), _n("eps_x")),
        "Y": add(_v("X"), scale(p["a_y1"], Unary("tanh", _v("X"))),
                 scale(0.5, mul(_v("X"), _v("Z"))),
                 mul(_v("eps"), _v("V")),
                 scale(p["a_y2"], mul(Unary("tanh", _v("Z")), _v("V"))),
                 mul(add(_n("eps_y")), Unary("exp", scale(0.25, _v("Z"))))),
    }
    noises = [NoiseSpec("eps_z", "uniform", (-2.0, 2.0)), _gauss("eta_v"), _gauss("eta_eps"),
              NoiseSpec("eps_x", "laplace", (0.0, 0.7)),
              NoiseSpec("eps_y", "uniform", (-1.0, 1.0))]
    return nodes, eqs, noises


def _gen_ee3(p):
    # Z generic; X = f_x(Z, V, eps, eps_x); Y = f_y1(X, Z) + f_y2(Z, eps_y)
    nodes = [("Z", True), ("X", True), ("Y", True), ("V", False), ("eps", False)]
    eqs = {
        "Z": _n("eps_z"),
        "V": _n("eta_v"),
        "eps": _n("eta_eps"),
        "X": add(Unary("tanh", _v("Z")), scale(p["c_re"], mul(_v("eps"), _v("V"))),
                 scale(0.5, mul(_v("Z"), _n("eps_x")))),
        "Y": add(_v("X"), scale(p["a_y1"], Unary("tanh", _v("X"))), scale(p["b_yz"], _v("Z")),
                 mul(add(_n("eps_y")), Unary("exp", scale(0.25, _v("Z"))))),
    }
    noises = [NoiseSpec("eps_z", "uniform", (-2.0, 2.0)), _gauss("eta_v"), _gauss("eta_eps"),
              NoiseSpec("eps_x", "uniform", (-1.0, 1.0)),
              NoiseSpec("eps_y", "laplace", (0.0, 0.7))]
    return nodes, eqs, noises


def _postnl(p):
    # Y = h4(h2(h1(X, eps_y)) + h3(W)) with invertible h2 = cube, h4 = exp
    nodes = [("X", True), ("W", True), ("Y", True)]
    h1 = add(_v("X"), _n("eta_y"))
    inner = add(Unary("cube", scale(p["a_h2"], h1)), scale(p["a_h3"], _v("W")))
    eqs = {
        "X": _n("eta_x"),
        "W": _n("eta_w"),
        "Y": Unary("exp", scale(p["a_h4"], inner)),
    }
    noises = [_gauss("eta_x"), _gauss("eta_w"), _gauss("eta_y", 0.5)]
    return nodes, eqs, noises


def _hoyer(p):
    nodes = [("X", True), ("Y", True)]
    eqs = {
        "X": _n("eps_x"),
        "Y": add(Unary("cube", _v("X")), _v("X"), _n("eps_y")),
    }
    noises = [NoiseSpec("eps_x", "uniform", (-p["x_range"], p["x_range"])),
              NoiseSpec("eps_y", "uniform", (-1.0, 1.0))]
    return nodes, eqs, noises


def _linear_gaussian(p):
    nodes = [("X", True), ("Y", True)]
    eqs = {"X": _n("eta_x"), "Y": add(scale(p["b_yx"], _v("X")), _n("eta_y"))}
    return nodes, eqs, [_gauss("eta_x"), _gauss("eta_y")]


def _wrap(fn, description):
    def build(**params):
        nodes, eqs, noises = fn(params)
        return ScmModel.from_equations(nodes, eqs, noises, description=description)
    return build


PRESETS = {
    "fig1a": PresetInfo(
        "fig1a", _wrap(_fig1a, "fig1a: random coefficient on hidden V -> Y"),
        dict(b_xz=1.0, b_yx=1.0, b_yz=1.0, c_re=1.5, sd_y=0.5),
        expected_cells=(IND, DEP, IND, DEP), expected_decision=True),
    "fig1b": PresetInfo(
        "fig1b", _wrap(_fig1b, "fig1b: random coefficient on hidden V -> X"),
        dict(b_xz=1.0, b_yx=1.0, b_yz=1.0, c_re=1.5, sd_x=0.5),
        expected_cells=(DEP, DEP, IND, DEP), expected_decision=True),
    "fig1c": PresetInfo(
        "fig1c", _wrap(_fig1c, "fig1c: random coefficient on Z -> Y"),
        dict(b_xz=1.0, b_yx=1.0, c_re=1.5, sd_y=1.0),
        expected_cells=(DEP, DEP, IND, IND), expected_decision=False),
    "fig1d": PresetInfo(
        "fig1d", _wrap(_fig1d, "fig1d: random coefficient on X -> Z"),
        dict(b_yx=1.0, b_zx=1.0, c_re=1.5, sd_z=0.5),
        expected_cells=(IND, IND, IND, DEP), expected_decision=False),
    "gen_ee1": PresetInfo(
        "gen_ee1", _wrap(_gen_ee1, "gen_ee1: linear X, Z effects plus nonlinear hidden noise on Y"),
        dict(b_xz=1.0, b_yx=1.0, b_yz=1.0, c_re=1.5, c_noise=0.3, laplace_scale=0.5),
        expected_cells=(IND, DEP, IND, DEP), expected_decision=True,
        tags=("decisive",)),
    "gen_ee2": PresetInfo(
        "gen_ee2", _wrap(_gen_ee2, "gen_ee2: nonlinear mechanisms on the fig1a graph"),
        dict(a_xz=1.5, a_y1=1.0, a_y2=0.5),
        expected_cells=(None, DEP, IND, DEP), expected_decision=True,
        tags=("decisive",)),
    "gen_ee3": PresetInfo(
        "gen_ee3", _wrap(_gen_ee3, "gen_ee3: nonlinear mechanisms on the fig1b graph"),
        dict(c_re=1.5, a_y1=1.0, b_yz=1.0),
        expected_cells=(DEP, DEP, IND, DEP), expected_decision=True,
        tags=("decisive",)),
    "postnl": PresetInfo(
        "postnl", _wrap(_postnl, "postnl: post-nonlinear CAN generator"),
        dict(a_h2=0.5, a_h3=0.5, a_h4=0.3), pool=("W",)),
    "hoyer_bivariate_an": PresetInfo(
        "hoyer_bivariate_an", _wrap(_hoyer, "hoyer_bivariate_an: Y = X^3 + X + uniform noise"),
        dict(x_range=1.0), pool=(), expected_cells=(IND, DEP), expected_decision=True),
    "linear_gaussian_bivariate": PresetInfo(
        "linear_gaussian_bivariate",
        _wrap(_linear_gaussian, "linear_gaussian_bivariate: Y = bX + eta"),
        dict(b_yx=1.0), pool=(), expected_cells=(IND, IND), expected_decision=False),
}

PRESET_NAMES = tuple(PRESETS)
TABLE1_PRESETS = ("fig1a", "fig1b", "fig1c", "fig1d")


class UnknownPresetError(KeyError):
    def __str__(self):
        return self.args[0]


def preset_info(name: str) -> PresetInfo:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}") from None


def preset(name: str, **overrides) -> ScmModel:
    info = preset_info(name)
    bad = set(overrides) - set(info.defaults)
    if bad:
        raise ValueError(f"preset {name!r} has no parameters {sorted(bad)}; "
                         f"available: {sorted(info.defaults)}")
    return info.build(**{**info.defaults, **overrides})
