"""Seeded simulation studies with CSV traces and slope summaries.

Each scenario expands into sweep points (contamination level, separation
or neither). Within a sweep point every replication draws one data stream
and all methods consume it, so method comparisons are paired. Replication
``r`` of data law ``j`` reads from ``make_rng(seed, j, r)``.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .batch import METHODS, NONROBUST_METHODS, draw_streams, method_spec, run_batch

LOG_FLOOR = -745.0


def floor_log(v):
    """Replace ``-inf`` (wealth absorbed at zero) by the double-precision log floor."""
    v = np.asarray(v, dtype=float)
    return np.where(np.isneginf(v), LOG_FLOOR, v)


SCENARIOS = {
    "simple_null_sanity": ("robust_simple", "robust_plugin", "nonrobust_sprt", "nonrobust_plugin"),
    "growth_vs_eps_simple": ("robust_simple", "robust_plugin", "nonrobust_sprt", "nonrobust_plugin"),
    "no_contamination": ("robust_simple", "robust_plugin", "nonrobust_sprt", "nonrobust_plugin"),
    "growth_vs_separation": ("robust_simple", "robust_plugin"),
    "composite_null_sanity": ("robust_ripr", "robust_combined", "nonrobust_ripr", "nonrobust_plugin"),
    "growth_vs_eps_composite": ("robust_ripr", "robust_combined", "nonrobust_ripr", "nonrobust_plugin"),
    "no_contamination_composite": ("robust_ripr", "robust_combined", "nonrobust_ripr", "nonrobust_plugin"),
}
COMPOSITE = {"composite_null_sanity", "growth_vs_eps_composite", "no_contamination_composite"}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    eps_algorithm: float = 0.01
    eps_real: float = 0.01
    horizon: int = 10_000
    replications: int = 10
    seed: int = 0
    methods: tuple = ()
    mu_values: tuple = (0.25, 0.5, 0.75, 1.0)
    eps_values: tuple = (0.1, 0.01, 0.001)
    mu1: float = 1.0
    null_interval: tuple = (-0.5, 0.5)
    contaminant: tuple = (-1.0, 10.0)
    name: str = ""

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown method(s) {', '.join(bad)}")
        if self.replications < 1 or self.horizon < 1:
            raise ValueError("replications and horizon must be >= 1")
        if not 0 <= self.eps_real < 1 or not 0 < self.eps_algorithm < 1:
            raise ValueError("need 0 <= eps_real < 1 and 0 < eps_algorithm < 1")

    @property
    def method_list(self) -> tuple:
        return tuple(self.methods) or SCENARIOS[self.scenario]

    @property
    def label(self) -> str:
        return self.name or self.scenario


@dataclass(frozen=True)
class SweepPoint:
    stream_key: int
    data_tag: str
    alg_tag: str
    eps_algorithm: float
    eps_real: float
    data_mu: float
    mu1: float


def sweep_points(cfg: ExperimentConfig) -> list[SweepPoint]:
    s = cfg.scenario
    if s in ("simple_null_sanity", "composite_null_sanity"):
        return [SweepPoint(0, "", "", cfg.eps_algorithm, cfg.eps_real, 0.0, cfg.mu1)]
    if s in ("growth_vs_eps_simple", "growth_vs_eps_composite"):
        return [SweepPoint(j, f"eps={e:g}", "", e, e, cfg.mu1, cfg.mu1) for j, e in enumerate(cfg.eps_values)]
    if s in ("no_contamination", "no_contamination_composite"):
        return [SweepPoint(0, "", f"eps={e:g}", e, 0.0, cfg.mu1, cfg.mu1) for e in cfg.eps_values]
    # growth_vs_separation
    return [SweepPoint(j, f"mu={m:g}", "", cfg.eps_algorithm, cfg.eps_real, m, m) for j, m in enumerate(cfg.mu_values)]


def checkpoint_grid(horizon: int) -> np.ndarray:
    ck = list(range(1, min(horizon, 100) + 1)) + list(range(200, horizon + 1, 100))
    if ck[-1] != horizon:
        ck.append(horizon)
    return np.array(ck, dtype=np.int64)


@dataclass
class TraceTable:
    checkpoints: np.ndarray
    per_rep: dict = field(default_factory=dict)   # label -> replications x checkpoints
    checksums: dict = field(default_factory=dict)  # (stream_key, label) -> per-replication checksums

    @property
    def methods(self) -> list:
        return list(self.per_rep)

    def mean(self, label: str) -> np.ndarray:
        return self.per_rep[label].mean(axis=0)

    def stderr(self, label: str) -> np.ndarray:
        lw = self.per_rep[label]
        if lw.shape[0] < 2:
            return np.zeros(lw.shape[1])
        return lw.std(axis=0, ddof=1) / math.sqrt(lw.shape[0])

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "n", "mean_log_wealth", "stderr_log_wealth"])
        for label in self.per_rep:
            m = floor_log(self.mean(label))
            se = self.stderr(label)
            for n, a, b in zip(self.checkpoints, m, se):
                w.writerow([label, int(n), repr(float(a)), repr(float(b))])
        return out.getvalue()


def _label(method: str, pt: SweepPoint) -> str:
    tags = [pt.data_tag] if method in NONROBUST_METHODS else [pt.data_tag, pt.alg_tag]
    tags = [t for t in tags if t]
    return method if not tags else f"{method}@{','.join(tags)}"


def run_experiment(cfg: ExperimentConfig) -> TraceTable:
    ck = checkpoint_grid(cfg.horizon)
    table = TraceTable(ck)
    composite = cfg.scenario in COMPOSITE
    for pt in sweep_points(cfg):
        z, U, h = draw_streams(cfg.seed, pt.stream_key, range(cfg.replications), cfg.horizon,
                               pt.data_mu, cfg.contaminant)
        for method in cfg.method_list:
            label = _label(method, pt)
            if label in table.per_rep:
                continue
            spec = method_spec(method, mu1=pt.mu1, null_interval=cfg.null_interval, composite_null=composite)
            res = run_batch(spec, pt.eps_algorithm, z, U, h, mode="iid", eps_real=pt.eps_real, checkpoints=ck)
            table.per_rep[label] = res.log_wealth
            table.checksums[(pt.stream_key, label)] = res.checksum
    check_paired_streams(table)
    return table


def check_paired_streams(table: TraceTable) -> None:
    """All methods fed from one data law must have consumed identical streams."""
    by_key: dict = {}
    for (key, label), sums in table.checksums.items():
        ref = by_key.setdefault(key, (label, sums))
        if not np.array_equal(ref[1], sums):
            raise AssertionError(f"stream mismatch between {ref[0]} and {label}")


@dataclass(frozen=True)
class SlopeEstimate:
    method: str
    slope: float
    stderr: float


def _ls_slope(n: np.ndarray, y: np.ndarray) -> np.ndarray:
    nc = n - n.mean()
    return (nc @ (y - y.mean(axis=-1, keepdims=True)).T) / (nc @ nc)


def summarize_slopes(table: TraceTable, window: tuple | None = None) -> list[SlopeEstimate]:
    """Least-squares slope of log-wealth against ``n`` over ``window`` (default: last half)."""
    n = table.checkpoints.astype(float)
    lo, hi = window if window is not None else (n[-1] / 2, n[-1])
    sel = (n >= lo) & (n <= hi)
    if sel.sum() < 10:
        raise ValueError(f"slope window holds {int(sel.sum())} checkpoints; need at least 10")
    out = []
    for label, lw in table.per_rep.items():
        y = floor_log(lw[:, sel])
        per_rep = np.atleast_1d(_ls_slope(n[sel], y))
        slope = float(_ls_slope(n[sel], y.mean(axis=0)[None, :])[0])
        se = float(per_rep.std(ddof=1) / math.sqrt(len(per_rep))) if len(per_rep) > 1 else 0.0
        out.append(SlopeEstimate(label, slope, se))
    return out


def slopes_to_csv(slopes: list[SlopeEstimate]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["method", "slope", "stderr"])
    for s in slopes:
        w.writerow([s.method, repr(s.slope), repr(s.stderr)])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Qualitative expectations
# ---------------------------------------------------------------------------


def _strictly_increasing(v) -> bool:
    return all(a < b for a, b in zip(v, v[1:]))


def expectation_checks(cfg: ExperimentConfig, table: TraceTable, slopes: list[SlopeEstimate] | None = None) -> list:
    """``(description, passed)`` pairs for the scenario's qualitative claims."""
    slopes = {s.method: s.slope for s in (slopes or summarize_slopes(table))}
    methods = cfg.method_list
    robust = [m for m in methods if m.startswith("robust")]
    checks = []
    s = cfg.scenario
    if s in ("simple_null_sanity", "composite_null_sanity"):
        for m in robust:
            peak = float(table.mean(m).max())
            checks.append((f"{m} mean log-wealth stays <= 0.5 (max {peak:.3f})", peak <= 0.5))
        for m in methods:
            if m in NONROBUST_METHODS:
                tr = table.mean(m)
                spread = float(tr.max() - tr.min())
                checks.append((f"{m} trace is not flat (range {spread:.3g})", spread > 1.0))
    elif s in ("growth_vs_eps_simple", "growth_vs_eps_composite"):
        eps = sorted(cfg.eps_values, reverse=True)
        for m in robust:
            v = [slopes[f"{m}@eps={e:g}"] for e in eps]
            checks.append((f"{m} slope increases as eps decreases {[round(x, 4) for x in v]}", _strictly_increasing(v)))
    elif s in ("no_contamination", "no_contamination_composite"):
        e = min(cfg.eps_values)
        pairs = {"robust_simple": "nonrobust_sprt", "robust_plugin": "nonrobust_plugin",
                 "robust_ripr": "nonrobust_ripr", "robust_combined": "nonrobust_plugin"}
        for m in robust:
            ref = pairs[m]
            if ref not in methods:
                continue
            a, b = slopes[f"{m}@eps={e:g}"], slopes[ref]
            rel = abs(a - b) / abs(b)
            checks.append((f"{m} at eps={e:g} within 5% of {ref} (rel diff {rel:.4f})", rel <= 0.05))
    elif s == "growth_vs_separation":
        mus = sorted(cfg.mu_values)
        for m in robust:
            v = [slopes[f"{m}@mu={u:g}"] for u in mus]
            checks.append((f"{m} slope increases with mu {[round(x, 4) for x in v]}", _strictly_increasing(v)))
        if "robust_simple" in methods and "robust_plugin" in methods:
            for u in mus:
                gap = abs(slopes[f"robust_plugin@mu={u:g}"] - slopes[f"robust_simple@mu={u:g}"])
                checks.append((f"plug-in vs oracle slope gap at mu={u:g} is {gap:.4f} <= 0.01", gap <= 0.01))
    return checks


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def config_from_mapping(name: str, sec) -> ExperimentConfig:
    kw: dict = {"name": name}
    known = {
        "scenario": str, "eps_algorithm": float, "eps_real": float, "horizon": int,
        "replications": int, "seed": int, "mu1": float,
    }
    for key, value in sec.items():
        if key in known:
            kw[key] = known[key](value)
        elif key == "methods":
            kw[key] = tuple(v.strip() for v in value.replace(",", " ").split())
        elif key in ("mu_values", "eps_values", "null_interval", "contaminant"):
            kw[key] = _floats(value)
        else:
            raise ValueError(f"[{name}] unknown key {key!r}")
    if "scenario" not in kw:
        kw["scenario"] = name
    return ExperimentConfig(**kw)


def load_configs(path: str | Path) -> list[ExperimentConfig]:
    """One :class:`ExperimentConfig` per section of an INI-style file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        cp.read_file(fh)
    if not cp.sections():
        raise ValueError(f"{path}: no scenario sections")
    return [config_from_mapping(name, cp[name]) for name in cp.sections()]


def override(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
