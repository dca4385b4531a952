"""Benchmark harness: paired comparisons, approximation study, sensitivity sweep.

Every (k, trial) cell derives its own seed from the master seed, and all
algorithms in a cell start from the same initial partition. Results are
therefore reproducible and independent of execution order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .baselines import DEFAULT_H_GRID, NMI_H, neighborhood_weights, run_kmeans, \
    run_weighted_kmeans, tune_neighborhood
from .core import Dataset, KsilConfig, Partition, RunResult, child_seed, make_rng
from .engine import init_partition, run_ksil
from .errors import TooFewPairs, ZeroBaseline
from .evaluation import nmi, relative_improvement, spearman_rho, t_confidence_interval, \
    wilcoxon_signed_rank
from .silhouette import approx_silhouette_apr, approx_silhouette_aps, cluster_stats, \
    exact_silhouette

log = logging.getLogger(__name__)

ALGOS = ("ksil", "kmeans", "density", "lof")
SIGNIFICANCE = 0.05


def exact_objective(data: Dataset, result: RunResult, objective: str, alpha: float = 0.5) -> float:
    rep = result.exact_report
    if rep is None or rep.alpha != alpha:
        rep = exact_silhouette(data, result.best_partition, alpha=alpha)
    return float(rep.objective(objective))


def run_algo(data: Dataset, algo: str, k: int, seed: int, initial: Partition,
             template: KsilConfig, h_grid: Sequence[int] = DEFAULT_H_GRID,
             fixed_h: Optional[int] = None) -> RunResult:
    """Run one named algorithm from ``initial``.

    Neighbourhood baselines grid-search h unless ``fixed_h`` is given.
    """
    common = dict(tau=template.tau, max_iter=template.max_iter, seed=seed,
                  objective=template.objective, alpha=template.alpha, initial=initial)
    if algo == "ksil":
        return run_ksil(data, replace(template, k=k, seed=seed), initial)
    if algo == "kmeans":
        return run_kmeans(data, k, **common)
    if algo in ("density", "lof"):
        if fixed_h is not None:
            return run_weighted_kmeans(data, k, neighborhood_weights(data, algo, fixed_h),
                                       algo=algo, **common)
        return tune_neighborhood(data, k, algo, grid=h_grid, **common)[1]
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGOS}")


def _compare(subject: np.ndarray, base: np.ndarray, alternative: str) -> dict:
    diffs = subject - base
    out = {"n_pairs": int(diffs.size)}
    try:
        w = wilcoxon_signed_rank(diffs, alternative)
        out.update(n_zero=w.n_zero, statistic=w.statistic, p_value=w.p_value,
                   method=w.method, significant=bool(w.p_value < SIGNIFICANCE))
    except TooFewPairs as exc:
        out.update(n_zero=int((diffs == 0).sum()), statistic=None, p_value=None,
                   method=None, significant=False, note=str(exc))
    try:
        out["mean_relative_improvement_pct"] = relative_improvement(subject, base)
    except ZeroBaseline:
        out["mean_relative_improvement_pct"] = None
    out["mean_difference"] = float(diffs.mean()) if diffs.size else None
    return out


def _names(algos: Sequence[str]) -> list:
    seen: dict = {}
    names = []
    for a in algos:
        seen[a] = seen.get(a, 0) + 1
        names.append(a if seen[a] == 1 else f"{a}#{seen[a]}")
    return names


@dataclass
class ComparisonReport:
    dataset: dict
    settings: dict
    algos: list
    runs: list
    comparisons: list
    nmi: Optional[dict] = None
    # raw RunResults keyed by (algo, k, trial, fixed_h); never serialized
    results: Optional[dict] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = asdict(replace(self, results=None))
        del out["results"]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [f"dataset {self.dataset['name']}  n={self.dataset['n']} d={self.dataset['d']}  "
                 f"objective={self.settings['objective']}  subject={self.algos[0]}"]
        lines.append(f"{'baseline':<10} {'scope':<7} {'pairs':>5} {'zero':>5} "
                     f"{'p_value':<24} {'signif':<6} mean_rel_impr_pct")
        for c in self.comparisons:
            lines.append(f"{c['baseline']:<10} {c['scope']:<7} {c['n_pairs']:>5} {c['n_zero']:>5} "
                         f"{c['p_value']!r:<24} {str(c['significant']):<6} "
                         f"{c['mean_relative_improvement_pct']!r}")
        if self.nmi:
            lines.append(f"NMI at k={self.nmi['k']} over {self.nmi['trials']} trials (95% t-interval)")
            for name, row in self.nmi["algos"].items():
                lines.append(f"  {name:<10} mean={row['mean']!r} lo={row['lo']!r} hi={row['hi']!r}")
        return "\n".join(lines)


def run_comparison_protocol(data: Dataset, k_range: Sequence[int], trials: int = 30,
                            objective: str = "macro",
                            algos: Sequence[str] = ALGOS, seed: int = 0,
                            template: Optional[KsilConfig] = None,
                            k_gt: Optional[int] = None,
                            h_grid: Sequence[int] = DEFAULT_H_GRID,
                            alternative: str = "greater",
                            nmi_trials: Optional[int] = None,
                            keep_results: bool = False) -> ComparisonReport:
    """Paired silhouette comparison of ``algos[0]`` against every other algorithm.

    For each k and trial all algorithms share one initial partition; the
    exact objective of each retained partition is recorded. Wilcoxon tests
    and mean relative improvements are reported over all cells and over the
    cells at ``k_gt``. When the data carry labels and ``k_gt`` is set, NMI
    against the labels is summarised with t-intervals, using fixed
    neighbourhood sizes for the weighted baselines. ``keep_results`` attaches
    every RunResult to the report for inspection.
    """
    if trials < 5:
        raise ValueError("the protocol needs at least 5 trials per k")
    if len(algos) < 2:
        raise ValueError("need a subject algorithm and at least one baseline")
    template = template or KsilConfig(k=2, objective=objective, auto_p=True)
    template = replace(template, objective=objective)
    names = _names(algos)
    cache: dict = {}

    def cell(algo: str, k: int, trial: int, fixed_h=None) -> RunResult:
        key = (algo, k, trial, fixed_h)
        if key not in cache:
            s = child_seed(seed, k, trial)
            initial = cache.setdefault(("init", k, trial), init_partition(
                data, k, template.init, make_rng(s)))
            cache[key] = run_algo(data, algo, k, s, initial, template, h_grid, fixed_h)
        return cache[key]

    runs = []
    for k in k_range:
        for trial in range(trials):
            row = {"k": int(k), "trial": trial, "scores": {}, "params": {}}
            for name, algo in zip(names, algos):
                r = cell(algo, k, trial)
                row["scores"][name] = exact_objective(data, r, objective, template.alpha)
                row["params"][name] = {key: r.params[key] for key in ("p", "h") if key in r.params}
            runs.append(row)
        log.info("k=%d done", k)

    comparisons = []
    scopes = [("all_k", runs)]
    if k_gt is not None:
        scopes.append(("k_gt", [r for r in runs if r["k"] == k_gt]))
    for base in names[1:]:
        for scope, rows in scopes:
            if not rows:
                continue
            subj = np.array([r["scores"][names[0]] for r in rows])
            other = np.array([r["scores"][base] for r in rows])
            comparisons.append({"baseline": base, "scope": scope, **_compare(subj, other, alternative)})

    nmi_block = None
    if data.labels is not None and k_gt is not None:
        nt = nmi_trials or trials
        per = {}
        for name, algo in zip(names, algos):
            vals = []
            for trial in range(nt):
                fixed = NMI_H.get(algo) if algo in ("density", "lof") else None
                r = cell(algo, k_gt, trial, fixed)
                vals.append(nmi(data.labels, r.best_partition.assignments))
            ci = t_confidence_interval(vals)
            per[name] = {"mean": ci.mean, "lo": ci.lo, "hi": ci.hi, "samples": vals}
        nmi_block = {"k": int(k_gt), "trials": nt, "algos": per}

    settings = {
        "objective": objective, "alpha": template.alpha, "trials": trials,
        "k_range": [int(k) for k in k_range], "seed": seed, "k_gt": k_gt,
        "alternative": alternative, "h_grid": [int(h) for h in h_grid],
        "nmi_fixed_h": dict(NMI_H),
        "ksil": {"scheme": template.scheme, "auto_p": template.auto_p, "p": template.p,
                 "p_grid": [float(p) for p in template.p_grid], "approximate": template.approximate,
                 "sample_size": template.sample_size, "init": template.init,
                 "tau": template.tau, "max_iter": template.max_iter},
    }
    meta = {"name": data.name, "n": data.n, "d": data.d}
    kept = {key: r for key, r in cache.items() if key[0] != "init"} if keep_results else None
    return ComparisonReport(meta, settings, names, runs, comparisons, nmi_block, kept)


def reference_partition(data: Dataset, k: int, seed: int = 0) -> Partition:
    """Converged k-means partition with centroids reset to the cluster means."""
    r = run_kmeans(data, k, seed=seed)
    labels = r.final_partition.assignments
    return Partition(labels, cluster_stats(data.points, labels, k).centroids)


@dataclass
class ApproximationStudy:
    name: str
    k: int
    rho_apr: float
    rho_aps: float
    aggregates: dict = field(default_factory=dict)


def approximation_study(data: Dataset, k: int, seed: int = 0,
                        part: Optional[Partition] = None) -> ApproximationStudy:
    """Spearman correlation and aggregate scores of ApR and ApS against exact silhouettes."""
    part = part or reference_partition(data, k, seed)
    ex = exact_silhouette(data, part)
    apr = approx_silhouette_apr(data, None, part)
    aps = approx_silhouette_aps(data, part)
    agg = {rep.mode: {"S_m": rep.micro, "S_M": rep.macro} for rep in (ex, apr, aps)}
    return ApproximationStudy(data.name, k, spearman_rho(apr.per_point, ex.per_point),
                              spearman_rho(aps.per_point, ex.per_point), agg)


def sensitivity_sweep(data: Dataset, template: KsilConfig, grid: Sequence[float],
                      schemes: Sequence[str] = ("power", "exponential")) -> list:
    """Exact objective of the retained partition for each (scheme, p), shared init."""
    initial = init_partition(data, template.k, template.init, make_rng(template.seed))
    rows = []
    for scheme in schemes:
        for p in grid:
            cfg = replace(template, scheme=scheme, p=float(p), auto_p=False)
            r = run_ksil(data, cfg, initial)
            rows.append({"p": float(p), "scheme": scheme,
                         "objective_value": exact_objective(data, r, cfg.objective, cfg.alpha)})
    return rows
