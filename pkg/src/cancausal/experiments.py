"""Seeded experiment drivers shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .inference import CriterionConfig, infer_potential_cause, pattern_table
from .patterns import CELL_LABELS, majority
from .scm.model import sample
from .scm.presets import TABLE1_PRESETS, preset, preset_info


def _cell_rows(rows):
    return [{"cells": list(r.cells), "decision": r.decision, "p_values": list(r.p_values)}
            for r in rows]


def reproduce_table1(n: int = 20000, seeds: Sequence[int] = range(10), level: float = 0.01,
                     method: str = "cv", n_perm: int = 199, min_agreement: float = 0.9,
                     presets: Sequence[str] = TABLE1_PRESETS, threads: int = 1,
                     progress=None) -> dict:
    """Pattern rows for each grid preset across seeds, voted and compared.

    A cell is ``stable`` when at least ``min_agreement`` of the seeds agree
    with the majority. ``matched`` counts majority cells equal to the
    expected ones.
    """
    seeds = list(seeds)
    out = {"n": n, "seeds": seeds, "level": level, "method": method, "n_perm": n_perm,
           "min_agreement": min_agreement, "presets": {}}
    cells_matched = decisions_matched = cells_total = 0
    for name in presets:
        info = preset_info(name)
        model = preset(name)
        z = info.pool[0] if info.pool else None
        rows = []
        for sd in seeds:
            ds = sample(model, n, sd, threads).observed_view()
            cfg = CriterionConfig(method=method, level=level, n_perm=n_perm, seed=sd,
                                  threads=threads)
            rows.append(pattern_table(ds, info.x, info.y, z, cfg))
            if progress:
                progress(name, sd, rows[-1])
        voted = majority(rows)
        expected = list(info.expected_cells)
        cell_ok = [v == e for v, e in zip(voted.cells, expected)]
        need = min_agreement * len(seeds)
        stable = [a >= need - 1e-9 for a in voted.cell_agreement]
        cells_matched += sum(cell_ok)
        cells_total += len(expected)
        dec_ok = voted.decision == info.expected_decision
        decisions_matched += dec_ok
        out["presets"][name] = {
            "labels": list(CELL_LABELS[:len(expected)]),
            "expected_cells": expected, "expected_decision": info.expected_decision,
            "voted": voted.to_dict(), "cell_matches": cell_ok, "decision_matches": dec_ok,
            "stable_cells": stable,
            "decision_stable": voted.decision_agreement >= need - 1e-9,
            "rows": _cell_rows(rows),
        }
    out["cells_matched"] = cells_matched
    out["cells_total"] = cells_total
    out["decisions_matched"] = decisions_matched
    out["decisions_total"] = len(presets)
    out["all_matched"] = cells_matched == cells_total and decisions_matched == len(presets)
    out["all_stable"] = all(all(p["stable_cells"]) and p["decision_stable"]
                            for p in out["presets"].values())
    return out


def format_table1(result: dict) -> str:
    """Side-by-side text table of voted and expected cells."""
    sym = {"indep": "⊥", "dep": "⊮"}
    lines = [f"method={result['method']} n={result['n']} seeds={len(result['seeds'])} "
             f"level={result['level']}",
             f"{'preset':8} | {'observed (votes)':40} | {'expected':22} | match"]
    for name, p in result["presets"].items():
        v = p["voted"]
        obs = " ".join(f"{sym[c]}({a})" + ("" if st else "!")
                       for c, a, st in zip(v["cells"], v["cell_agreement"], p["stable_cells"]))
        obs += f" {'Yes' if v['decision'] else 'No'}({v['decision_agreement']})"
        exp = " ".join(sym[c] for c in p["expected_cells"])
        exp += f" {'Yes' if p['expected_decision'] else 'No'}"
        ok = all(p["cell_matches"]) and p["decision_matches"]
        lines.append(f"{name:8} | {obs:40} | {exp:22} | {'ok' if ok else 'MISMATCH'}")
    lines.append(f"cells {result['cells_matched']}/{result['cells_total']}, decisions "
                 f"{result['decisions_matched']}/{result['decisions_total']}"
                 " ('!' marks cells below the agreement threshold)")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# benchmark

class BenchmarkConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkConfig:
    presets: tuple
    n: dict
    seeds: int = 10
    methods: tuple = ("cv", "nrr")
    level: float = 0.01
    n_perm: int = 199
    seed_offset: int = 0
    patterns: bool = True
    overrides: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        if not isinstance(d, dict):
            raise BenchmarkConfigError("benchmark config must be a JSON object")
        known = {"presets", "n", "seeds", "methods", "level", "n_perm", "seed_offset",
                 "patterns", "overrides"}
        extra = set(d) - known
        if extra:
            raise BenchmarkConfigError(f"unknown benchmark keys {sorted(extra)}")
        presets = d.get("presets")
        if not presets or not isinstance(presets, list):
            raise BenchmarkConfigError("'presets' must be a non-empty list")
        for p in presets:
            try:
                preset_info(p)
            except KeyError as exc:
                raise BenchmarkConfigError(str(exc)) from None
        n = d.get("n", 20000)
        n = dict(n) if isinstance(n, dict) else {p: n for p in presets}
        for p in presets:
            if not isinstance(n.get(p), int) or n[p] < 50:
                raise BenchmarkConfigError(f"sample size for {p!r} must be an integer >= 50")
        methods = tuple(d.get("methods", ("cv", "nrr")))
        if not methods or any(m not in ("cv", "nrr") for m in methods):
            raise BenchmarkConfigError("'methods' must list 'cv' and/or 'nrr'")
        seeds = d.get("seeds", 10)
        if not isinstance(seeds, int) or seeds < 1:
            raise BenchmarkConfigError("'seeds' must be a positive integer")
        try:
            return cls(tuple(presets), n, seeds, methods, float(d.get("level", 0.01)),
                       int(d.get("n_perm", 199)), int(d.get("seed_offset", 0)),
                       bool(d.get("patterns", True)), dict(d.get("overrides", {})))
        except (TypeError, ValueError) as exc:
            raise BenchmarkConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {"presets": list(self.presets), "n": self.n, "seeds": self.seeds,
                "methods": list(self.methods), "level": self.level, "n_perm": self.n_perm,
                "seed_offset": self.seed_offset, "patterns": self.patterns,
                "overrides": self.overrides}


def run_benchmark(cfg: BenchmarkConfig, threads: int = 1, progress=None) -> dict:
    """Potential-cause rates in both directions per preset and method."""
    table = []
    for name in cfg.presets:
        info = preset_info(name)
        model = preset(name, **cfg.overrides.get(name, {}))
        n = cfg.n[name]
        seeds = [cfg.seed_offset + k for k in range(cfg.seeds)]
        data = {sd: sample(model, n, sd, threads).observed_view() for sd in seeds}
        for method in cfg.methods:
            fwd = rev = cells_agree = cells_known = 0
            per_seed = []
            for sd in seeds:
                ds = data[sd]
                c = CriterionConfig(method=method, level=cfg.level, n_perm=cfg.n_perm, seed=sd,
                                    threads=threads)
                d_f = infer_potential_cause(ds, info.x, info.y, info.pool, c)
                d_r = infer_potential_cause(ds, info.y, info.x, info.pool, c)
                fwd += d_f.is_potential_cause
                rev += d_r.is_potential_cause
                entry = {"seed": sd, "forward": d_f.kind, "reverse": d_r.kind,
                         "witness": None if d_f.witness_set is None else list(d_f.witness_set)}
                if cfg.patterns and len(info.pool) <= 1:
                    row = pattern_table(ds, info.x, info.y,
                                        info.pool[0] if info.pool else None, c)
                    entry["cells"] = list(row.cells)
                    entry["p_values"] = list(row.p_values)
                    if info.expected_cells:
                        for got, exp in zip(row.cells, info.expected_cells):
                            if exp is not None:
                                cells_known += 1
                                cells_agree += got == exp
                per_seed.append(entry)
                if progress:
                    progress(name, method, sd, entry)
            k = len(seeds)
            exp = info.expected_decision
            table.append({
                "preset": name, "method": method, "n": n, "seeds": k,
                "x": info.x, "y": info.y, "pool": list(info.pool),
                "forward_rate": fwd / k, "reverse_rate": rev / k,
                "expected_forward": exp,
                "accuracy": None if exp is None else
                (sum((e["forward"] == "PotentialCause") == exp and e["reverse"] != "PotentialCause"
                     for e in per_seed) / k),
                # the reverse direction is never a potential cause in these models
                "false_potential_cause_rate": {
                    "forward": None if exp is None else (0.0 if exp else fwd / k),
                    "reverse": rev / k},
                "cell_agreement": None if not cells_known else cells_agree / cells_known,
                "per_seed": per_seed,
            })
    return {"config": cfg.to_dict(), "table": table}


def format_benchmark(result: dict) -> str:
    lines = [f"{'preset':26} {'method':6} {'n':>7} {'fwd PC':>7} {'rev PC':>7} "
             f"{'accuracy':>8} {'cells':>6}"]
    for r in result["table"]:
        acc = "-" if r["accuracy"] is None else f"{r['accuracy']:.2f}"
        cells = "-" if r["cell_agreement"] is None else f"{r['cell_agreement']:.2f}"
        lines.append(f"{r['preset']:26} {r['method']:6} {r['n']:>7} {r['forward_rate']:>7.2f} "
                     f"{r['reverse_rate']:>7.2f} {acc:>8} {cells:>6}")
    return "\n".join(lines)
