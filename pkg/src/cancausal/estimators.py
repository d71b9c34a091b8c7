"""Kernel regression and two-stage conditional variance estimation.

Two smoothers share one interface: local-linear (default) and
Nadaraya-Watson local-constant, both with product Gaussian kernels on
standardized predictors. Small problems are solved exactly in O(n^2);
larger ones with at most three predictors go through linear binning on a
regular grid, separable Gaussian convolution, and linear interpolation of
the fitted surface back to the rows.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .scm.model import Dataset

log = logging.getLogger(__name__)

MIN_ROWS = 50
WEIGHT_FLOOR = 1e-8
DIRECT_MAX_ROWS = 5000
LOO_SUBSAMPLE = 2000
GRID_NODE_CAP = 1_500_000
TRUNCATE = 4.0


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class Bandwidth:
    """Bandwidth policy.

    ``rule``: per predictor, ``factor * median|x_i - x_j| * n**(-1/(4+d))`` on
    the standardized column. ``loo``: the rule scaled by the multiplier in
    ``grid`` with the smallest leave-one-out risk. ``fixed``: ``values`` in
    the predictors' original units.
    """

    kind: str = "rule"
    factor: float = 1.0
    values: tuple | None = None
    grid: tuple = (0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0)

    def __post_init__(self):
        if self.kind not in ("rule", "loo", "fixed"):
            raise ValueError(f"unknown bandwidth policy {self.kind!r}")
        if self.kind == "fixed" and (not self.values or min(self.values) <= 0):
            raise ValueError("fixed bandwidths must be given and positive")

    @classmethod
    def fixed(cls, *values):
        return cls("fixed", values=tuple(float(v) for v in values))


@dataclass
class RegressionFit:
    target: str
    predictors: tuple
    bandwidths: tuple
    fitted: np.ndarray
    residuals: np.ndarray
    loo_risk: float | None
    method: str
    engine: str
    flagged_fraction: float = 0.0
    multiplier: float = 1.0

    def diagnostics(self) -> dict:
        return {
            "predictors": list(self.predictors),
            "bandwidths": [float(h) for h in self.bandwidths],
            "method": self.method,
            "engine": self.engine,
            "flagged_fraction": float(self.flagged_fraction),
            "loo_risk": None if self.loo_risk is None else float(self.loo_risk),
        }


@dataclass
class VarianceProfile:
    values: np.ndarray
    raw: np.ndarray
    first_stage: RegressionFit
    second_stage: RegressionFit = field(repr=False)


def median_heuristic(x: np.ndarray, max_points: int = 1000) -> float:
    """Median absolute pairwise difference, on an evenly spaced subsample."""
    x = np.asarray(x, dtype=float)
    if len(x) > max_points:
        x = np.sort(x)[np.linspace(0, len(x) - 1, max_points).astype(int)]
    d = np.abs(x[:, None] - x[None, :])[np.triu_indices(len(x), 1)]
    med = float(np.median(d))
    if med <= 0:
        pos = d[d > 0]
        med = float(np.median(pos)) if len(pos) else 0.0
    return med


# ---------------------------------------------------------------------------
# exact smoother

def _direct(U: np.ndarray, y: np.ndarray, method: str, loo: bool):
    """Exact fit on bandwidth-scaled predictors ``U`` (kernel exp(-|u|^2/2))."""
    n, d = U.shape
    fitted = np.empty(n)
    loo_fit = np.empty(n) if loo else None
    weight = np.empty(n)
    chunk = max(1, int(4e6 // n))
    sq = np.einsum("ij,ij->i", U, U)
    if method == "ll":
        quad = np.stack([U[:, k] * U[:, l] for k in range(d) for l in range(k, d)], axis=1)
        Q = np.column_stack([np.ones(n), U, quad, y, U * y[:, None]])
    else:
        Q = np.column_stack([np.ones(n), y])
    for start in range(0, n, chunk):
        sl = slice(start, min(n, start + chunk))
        D2 = sq[sl, None] + sq[None, :] - 2.0 * U[sl] @ U.T
        np.maximum(D2, 0.0, out=D2)
        W = np.exp(-0.5 * D2)
        M = W @ Q
        weight[sl] = M[:, 0]
        fitted[sl] = _solve_moments(M, U[sl], y[sl], method, d, drop_self=False)
        if loo:
            loo_fit[sl] = _solve_moments(M, U[sl], y[sl], method, d, drop_self=True)
    return fitted, loo_fit, weight


def _solve_moments(M, Uq, yq, method, d, drop_self):
    """Turn raw kernel moments around query points into fitted values."""
    M = M.copy()
    if drop_self:
        # the query row contributes weight 1 at zero offset
        M[:, 0] -= 1.0
        if method == "ll":
            quad = np.stack([Uq[:, k] * Uq[:, l] for k in range(d) for l in range(k, d)], axis=1)
            self_q = np.column_stack([np.ones(len(yq)), Uq, quad, yq, Uq * yq[:, None]])
        else:
            self_q = np.column_stack([np.ones(len(yq)), yq])
        M -= self_q
        M[:, 0] = np.maximum(M[:, 0], 0.0)
    S0 = M[:, 0]
    if method == "nw":
        T0 = M[:, 1]
        return np.divide(T0, S0, out=np.full_like(S0, np.nan), where=S0 >= WEIGHT_FLOOR)
    m1 = M[:, 1:1 + d]
    nq = d * (d + 1) // 2
    m2 = M[:, 1 + d:1 + d + nq]
    T0 = M[:, 1 + d + nq]
    t1 = M[:, 2 + d + nq:2 + 2 * d + nq]
    # centre moments at the query point
    S1 = m1 - Uq * S0[:, None]
    S2 = np.empty((len(S0), d, d))
    idx = 0
    for k in range(d):
        for l in range(k, d):
            v = m2[:, idx] - Uq[:, k] * m1[:, l] - Uq[:, l] * m1[:, k] + Uq[:, k] * Uq[:, l] * S0
            S2[:, k, l] = v
            S2[:, l, k] = v
            idx += 1
    T1 = t1 - Uq * T0[:, None]
    return _ll_solve(S0, S1, S2, T0, T1)


def _ll_solve(S0, S1, S2, T0, T1):
    """Intercept of the weighted local-linear fit; NW where the slope is unidentified."""
    n, d = S1.shape
    out = np.full(n, np.nan)
    ok = S0 >= WEIGHT_FLOOR
    if not np.any(ok):
        return out
    s0 = S0[ok]
    A = np.empty((ok.sum(), d + 1, d + 1))
    A[:, 0, 0] = s0
    A[:, 0, 1:] = S1[ok]
    A[:, 1:, 0] = S1[ok]
    A[:, 1:, 1:] = S2[ok]
    b = np.concatenate([T0[ok, None], T1[ok]], axis=1)
    # a tiny ridge on the slope block keeps isolated query points solvable
    ridge = 1e-9 * s0
    for k in range(1, d + 1):
        A[:, k, k] += ridge
    nw = T0[ok] / s0
    try:
        coef = np.linalg.solve(A, b[..., None])[..., 0]
        est = coef[:, 0]
    except np.linalg.LinAlgError:
        est = nw.copy()
    # fall back to the local mean where the local design is degenerate
    cond_bad = ~np.isfinite(est)
    det_scale = np.linalg.det(A[:, 1:, 1:] / s0[:, None, None])
    cond_bad |= det_scale < 1e-6 ** d
    est[cond_bad] = nw[cond_bad]
    out[ok] = est
    return out


# ---------------------------------------------------------------------------
# binned smoother

def _binned(U: np.ndarray, y: np.ndarray, method: str):
    n, d = U.shape
    lo = U.min(axis=0)
    span = U.max(axis=0) - lo
    ppb = {1: 10.0, 2: 6.0}.get(d, 4.0)
    sizes = np.maximum(2, np.ceil(span * ppb).astype(int) + 1)
    while np.prod(sizes.astype(float)) > GRID_NODE_CAP and ppb > 2.0:
        ppb -= 0.5
        sizes = np.maximum(2, np.ceil(span * ppb).astype(int) + 1)
    if np.prod(sizes.astype(float)) > GRID_NODE_CAP:
        return None
    delta = np.where(span > 0, span / (sizes - 1), 1.0)
    pos = (U - lo) / delta
    base = np.clip(np.floor(pos).astype(int), 0, sizes - 2)
    frac = pos - base
    shape = tuple(int(s) for s in sizes)
    strides = np.array([int(np.prod(shape[k + 1:])) for k in range(d)])
    total = int(np.prod(shape))

    counts = np.zeros(total)
    ysum = np.zeros(total)
    for corner in itertools.product((0, 1), repeat=d):
        c = np.array(corner)
        w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=1)
        flat = (base + c) @ strides
        counts += np.bincount(flat, weights=w, minlength=total)
        ysum += np.bincount(flat, weights=w * y, minlength=total)
    counts = counts.reshape(shape)
    ysum = ysum.reshape(shape)

    kern = []
    for k in range(d):
        m = int(np.ceil(TRUNCATE / delta[k]))
        off = np.arange(-m, m + 1) * delta[k]
        w0 = np.exp(-0.5 * off**2)
        kern.append((w0, off * w0, off * off * w0))

    def conv(arr, orders):
        out = arr
        for k, r in enumerate(orders):
            out = ndimage.correlate1d(out, kern[k][r], axis=k, mode="constant", cval=0.0)
        return out

    corners = []
    for corner in itertools.product((0, 1), repeat=d):
        c = np.array(corner)
        w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=1)
        corners.append((w, (base + c) @ strides))
    # only nodes at the corners of occupied cells are ever read back
    need = np.unique(np.concatenate([f for _, f in corners]))

    zero = (0,) * d
    S0 = conv(counts, zero).ravel()[need]
    T0 = conv(ysum, zero).ravel()[need]
    if method == "nw":
        surf_need = np.divide(T0, S0, out=np.full(len(need), np.nan), where=S0 >= WEIGHT_FLOOR)
    else:
        def unit(k, r=1):
            o = [0] * d
            o[k] = r
            return tuple(o)

        S1 = np.stack([conv(counts, unit(k)).ravel()[need] for k in range(d)], axis=-1)
        S2 = np.empty((len(need), d, d))
        for k in range(d):
            S2[:, k, k] = conv(counts, unit(k, 2)).ravel()[need]
            for l in range(k + 1, d):
                o = [0] * d
                o[k] = o[l] = 1
                v = conv(counts, tuple(o)).ravel()[need]
                S2[:, k, l] = v
                S2[:, l, k] = v
        T1 = np.stack([conv(ysum, unit(k)).ravel()[need] for k in range(d)], axis=-1)
        surf_need = _ll_solve(S0, S1, S2, T0, T1)

    # interpolate from the cell corners, ignoring corners without support
    num = np.zeros(n)
    den = np.zeros(n)
    weight = np.zeros(n)
    for w, flat in corners:
        pos_need = np.searchsorted(need, flat)
        v = surf_need[pos_need]
        good = np.isfinite(v)
        num += np.where(good, w * np.nan_to_num(v), 0.0)
        den += np.where(good, w, 0.0)
        weight += w * S0[pos_need]
    fitted = np.divide(num, den, out=np.full(n, np.nan), where=den > 0)
    return fitted, weight


# ---------------------------------------------------------------------------
# public API

def _as_matrix(X):
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _standardize(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    if np.any(sd <= 0) or not np.all(np.isfinite(sd)):
        bad = [int(k) for k in np.flatnonzero(~(sd > 0))]
        raise EstimationError(f"degenerate predictor column(s) {bad}: zero variance")
    return (X - mu) / sd, sd


def rule_bandwidths(Z: np.ndarray, factor: float = 1.0) -> np.ndarray:
    """Rule-of-thumb bandwidths for already standardized predictors ``Z``."""
    n, d = Z.shape
    med = np.array([median_heuristic(Z[:, k]) for k in range(d)])
    return factor * med * n ** (-1.0 / (4 + d))


def _smooth(U, y, method, engine):
    n, d = U.shape
    if engine == "auto":
        engine = "direct" if n <= DIRECT_MAX_ROWS or d > 3 else "binned"
    if engine == "binned":
        res = _binned(U, y, method)
        if res is not None:
            fitted, weight = res
            return fitted, weight, "binned"
        log.debug("grid too large for %d predictors; using the exact smoother", d)
    fitted, _, weight = _direct(U, y, method, loo=False)
    return fitted, weight, "direct"


def _loo_risk(U, y, method):
    n = len(y)
    if n > LOO_SUBSAMPLE:
        idx = np.linspace(0, n - 1, LOO_SUBSAMPLE).astype(int)
        U, y = U[idx], y[idx]
    _, loo_fit, _ = _direct(U, y, method, loo=True)
    ok = np.isfinite(loo_fit)
    if not np.any(ok):
        return np.inf
    return float(np.mean((y[ok] - loo_fit[ok]) ** 2))


def regress(X, y, bw: Bandwidth | None = None, method: str = "ll", engine: str = "auto",
            target: str = "y", predictors: Sequence[str] | None = None) -> RegressionFit:
    """Kernel regression of ``y`` on the columns of ``X`` (arrays in, fit out)."""
    bw = bw or Bandwidth()
    if method not in ("ll", "nw"):
        raise ValueError(f"unknown smoother {method!r}")
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if n < MIN_ROWS:
        raise EstimationError(f"need at least {MIN_ROWS} rows, got {n}")
    if d == 0:
        raise EstimationError("at least one predictor is required")
    if len(y) != n:
        raise EstimationError("target and predictors differ in length")
    predictors = tuple(predictors) if predictors else tuple(f"x{k}" for k in range(d))
    Z, sd = _standardize(X)

    multiplier = 1.0
    if bw.kind == "fixed":
        if len(bw.values) != d:
            raise ValueError(f"{len(bw.values)} fixed bandwidths for {d} predictors")
        h = np.asarray(bw.values, dtype=float) / sd
    else:
        h = rule_bandwidths(Z, bw.factor)
        if np.any(h <= 0):
            raise EstimationError("predictor has too few distinct values for a bandwidth")
        if bw.kind == "loo":
            # choose the multiplier on at most LOO_SUBSAMPLE rows, with the rule
            # evaluated at that size, then apply it to the full-size rule
            m = min(n, LOO_SUBSAMPLE)
            h_sub = h * (m / n) ** (-1.0 / (4 + d))
            risks = [_loo_risk(Z / (h_sub * c), y, method) for c in bw.grid]
            multiplier = float(bw.grid[int(np.argmin(risks))])
            h = h * multiplier

    U = Z / h
    fitted, weight, used = _smooth(U, y, method, engine)
    flagged = ~np.isfinite(fitted) | (weight < WEIGHT_FLOOR)
    if np.any(flagged):
        fitted = np.where(flagged, y.mean(), fitted)
    loo = _loo_risk(U, y, method) if used == "direct" and n <= DIRECT_MAX_ROWS else None
    return RegressionFit(target, predictors, tuple(h * sd), fitted, y - fitted, loo, method,
                         used, float(np.mean(flagged)), multiplier)


def kernel_regress(ds: Dataset, target: str, predictors: Sequence[str],
                   bw: Bandwidth | None = None, method: str = "ll",
                   engine: str = "auto") -> RegressionFit:
    predictors = list(predictors)
    if not predictors:
        raise EstimationError("at least one predictor is required")
    if target in predictors:
        raise EstimationError("the target cannot also be a predictor")
    if len(set(predictors)) != len(predictors):
        raise EstimationError("duplicate predictors")
    return regress(ds.matrix(predictors), ds.column(target), bw, method, engine,
                   target=target, predictors=predictors)


def variance_profile(X, y, bw: Bandwidth | None = None, engine: str = "auto",
                     first_method: str = "ll", names=None, target="y") -> VarianceProfile:
    first = regress(X, y, bw, first_method, engine, target=target, predictors=names)
    # second stage is local-constant: a convex combination of squares stays >= 0
    second = regress(X, first.residuals**2, bw, "nw", engine, target=f"{target}_sq_resid",
                     predictors=names)
    raw = second.fitted
    return VarianceProfile(np.maximum(raw, 0.0), raw, first, second)


def conditional_variance_profile(ds: Dataset, y: str, x: str, s: Sequence[str] = (),
                                 bw: Bandwidth | None = None,
                                 engine: str = "auto") -> VarianceProfile:
    """Two-stage estimate of Var(y | x, s) at every row."""
    names = [x, *s]
    if y in names:
        raise EstimationError("the target cannot also be a predictor")
    return variance_profile(ds.matrix(names), ds.column(y), bw, engine, names=names, target=y)
