"""Named experiments: parameter schemas and the functions that run them.

Each experiment takes a flat parameter mapping (validated against its
schema, unknown keys rejected) and returns an :class:`ExperimentReport`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dist import DistSpec, Family, draw
from .errors import ConfigError
from .evt import big_jump_counts, mda_hazard_ratio, spacing_experiment
from .logdim import (
    dominance_fraction_rows,
    extremal_amplitude_log2,
    nat_to_log2,
    years_to_seconds,
)
from .mech import MechanismConfig, mechanism_tail_report
from .report import ExperimentReport
from .rng import DEFAULT_SEED, RandomSource, map_chunks
from .tree import DEFAULT_INCREMENT, dominance_contrast, timing_experiment

# -- value parsers ----------------------------------------------------------------------


def _int(value) -> int:
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, (int, np.integer)):
        return int(value)
    f = float(str(value).strip())
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(f)


def _float(value) -> float:
    return float(str(value).strip()) if not isinstance(value, (int, float)) else float(value)


def _list(item):
    def parse(value):
        if isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = [v for v in str(value).replace(" ", "").split(",") if v]
        if not items:
            raise ValueError("empty list")
        return [item(v) for v in items]
    return parse


def _range_or_list(value):
    # "8..14" or "8,10,12"
    if isinstance(value, str) and ".." in value:
        lo, _, hi = value.partition("..")
        return list(range(_int(lo), _int(hi) + 1))
    return _list(_int)(value)


def _choice(*options):
    def parse(value):
        v = str(value).strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return v
    return parse


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _fragment(value) -> str:
    return str(DistSpec.parse(str(value)))


def _opt_float(value):
    return None if value is None or str(value).strip().lower() in ("", "none") else _float(value)


@dataclass(frozen=True)
class Param:
    parse: Callable
    default: object
    help: str = ""


@dataclass(frozen=True)
class Experiment:
    name: str
    params: dict
    runner: Callable
    help: str = ""


def _dist_params(family="pareto", alpha=None):
    return {
        "family": Param(_choice(*[f.value for f in Family]), family, "distribution family"),
        "alpha": Param(_opt_float, alpha, "tail index (pareto, frechet, exppowerlaw)"),
        "beta": Param(_opt_float, None, "scale of the exponentiated power law"),
        "mu": Param(_opt_float, None, "log-normal location"),
        "sigma": Param(_opt_float, None, "log-normal scale"),
    }


def _dist_from(params) -> DistSpec:
    kw = {k: params[k] for k in ("alpha", "beta", "mu", "sigma") if params.get(k) is not None}
    return DistSpec(params["family"], **kw)


# -- runners ----------------------------------------------------------------------------------


def run_spacing(p, rng, threads):
    dist = _dist_from(p)
    rep = spacing_experiment(dist, p["sizes"], p["replicates"], rng, method=p["method"],
                             bootstrap=p["bootstrap"], threads=threads)
    summary = {"slope": rep.slope, "slope_stderr": rep.slope_stderr}
    if rep.predicted_slope is not None:
        summary["predicted_slope"] = rep.predicted_slope
    return ["N", "median_spacing", "median_stderr"], rep.rows(), summary, []


def _dominance_chunk(alpha, n, size, gen):
    bits = draw(DistSpec.pareto(alpha), (size, n), gen)
    srt = -np.sort(-bits, axis=1)
    dom = dominance_fraction_rows(srt)
    bound = (srt[:, 1] - srt[:, 0]) + math.log2(n - 1)
    return dom, bound, srt[:, 0] - srt[:, 1]


def run_dominance(p, rng, threads):
    alpha = p["alpha"]
    rows = []
    for i, n in enumerate(p["sizes"]):
        if n < 2:
            raise ConfigError("sizes must be >= 2")
        parts = map_chunks(lambda size, gen, n=n: _dominance_chunk(alpha, n, size, gen),
                           p["replicates"], rng.spawn(i), chunk=max(1, 2_000_000 // n), threads=threads)
        dom, bound, gap = (np.concatenate([q[j] for q in parts]) for j in range(3))
        threshold = -(n ** (1.0 / alpha)) / 2
        rows.append({
            "N": n,
            "log2:median_dominance": float(np.median(dom)),
            "log2:median_bound": float(np.median(bound)),
            "median_spacing": float(np.median(gap)),
            "log2:threshold": threshold,
            "below_threshold": bool(np.median(dom) < threshold),
            "bound_violations": int(np.sum(dom > bound)),
        })
    cols = list(rows[0])
    summary = {"all_below_threshold": all(r["below_threshold"] for r in rows)}
    return cols, rows, summary, ["threshold is -N**(1/alpha)/2; bits X are Pareto, magnitudes 2**X"]


def run_mda(p, rng, threads):
    dist = _dist_from(p)
    limit = dist.alpha if dist.family is not Family.LOGNORMAL else 0.0
    rows = []
    for lx in p["log_x"]:
        x = math.exp(lx)
        rows.append({"ln_x": lx, "hazard_ratio": mda_hazard_ratio(dist, x), "frechet_limit": limit})
    ratios = [r["hazard_ratio"] for r in rows]
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    summary = {"strictly_decreasing": decreasing}
    notes = []
    if dist.family is Family.EXPPOWERLAW:
        notes.append("ratio decays like alpha/ln x: not in the Frechet domain of attraction")
    return ["ln_x", "hazard_ratio", "frechet_limit"], rows, summary, notes


def run_bigjump(p, rng, threads):
    dists = [("primary", _dist_from(p))]
    if p["contrast"] == "lognormal":
        dists.append(("contrast", DistSpec.lognormal(0.0, 1.0)))
    rows = []
    for label, dist in dists:
        hits, events = big_jump_counts(dist, p["summands"], p["quantile"], p["replicates"],
                                       rng.named(label), threads=threads)
        rows.append({
            "role": label, "distribution": str(dist), "summands": p["summands"],
            "events": events, "hits": hits, "conditional_frequency": hits / events,
        })
    summary = {"ratio_threshold": 0.9}
    return list(rows[0]), rows, summary, ["frequency of max/sum > 0.9 given sum above its empirical quantile"]


def run_tree_contrast(p, rng, threads):
    leaf = DistSpec.parse(p["leaf"])
    inc = DistSpec.parse(p["increment"])
    rows = dominance_contrast(p["b"], p["generations"], leaf, inc, p["replicates"], rng, threads=threads,
                              keep_raw=p["per_replicate"])
    summary = contrast_summary(rows)
    if p["per_replicate"]:
        out = [
            {"mode": r.mode, "b": r.b, "G": r.G, "replicate": i,
             "gap_ratio": float(g), "log2:dominance": float(d)}
            for r in rows for i, (g, d) in enumerate(zip(r.gap_ratios, r.log2_dominance))
        ]
        return list(out[0]), out, summary, ["per-replicate dump"]
    out = [{
        "mode": r.mode, "b": r.b, "G": r.G, "leaf_count": r.leaf_count,
        "median_gap_ratio": r.median_gap_ratio,
        "log2:median_dominance": r.median_log2_dominance,
        "log2:median_dominance_se": r.median_log2_dominance_se,
    } for r in rows]
    return list(out[0]), out, summary, []


def contrast_summary(rows) -> dict:
    final = [r for r in rows if r.mode == "final"]
    inh = [r for r in rows if r.mode == "inherited"]
    fm = [r.median_log2_dominance for r in final]
    drop = inh[0].median_log2_dominance - inh[-1].median_log2_dominance
    sigma = math.hypot(inh[0].median_log2_dominance_se, inh[-1].median_log2_dominance_se)
    return {
        "final_strictly_decreasing": all(b < a for a, b in zip(fm, fm[1:])),
        "inherited_drop": drop,
        "inherited_drop_sigma": sigma,
        "inherited_bounded": bool(drop <= 3 * sigma),
    }


def run_timing(p, rng, threads):
    dist = _dist_from(p)
    res = timing_experiment(p["b"], p["generations"], dist, p["replicates"], rng,
                            method=p["method"], threads=threads)
    rows = res.rows(p["n"])
    for r in rows:
        r["z"] = (r["frequency"] - r["exact_prediction"]) / r["binomial_sigma"]
    summary = {"max_abs_z": max(abs(r["z"]) for r in rows),
               "generation_counts": res.generation_counts}
    notes = ["frequency: share of replicates whose maximum lies n or more generations before the leaves",
             "exact_prediction = (b**(G-n+1)-1)/(b**(G+1)-1); branching_estimate = b**-n; exp_estimate = e**-n"]
    return list(rows[0]), rows, summary, notes


def run_mechanism(p, rng, threads):
    cfg = MechanismConfig(p["kind"], beta=p["beta"], gamma=p["gamma"], offspring_mean=p["offspring_mean"],
                          nodes=p["nodes"], m=p["m"])
    samples = p["samples"] if p["samples"] is not None else (50 if cfg.kind.value == "pa" else 1_000_000)
    rep = mechanism_tail_report(cfg, samples, rng, threads=threads, estimate=not p["export"])
    if p["export"]:
        if rep.values.ndim == 2:
            rows = [{"replicate": r, "degree": int(d)} for r, deg in enumerate(rep.values) for d in deg]
            return ["replicate", "degree"], rows, {"networks": samples}, ["degree sequences"]
        col = "total_progeny" if cfg.kind.value == "gw" else "k"
        rows = [{col: int(v)} for v in rep.values]
        return [col], rows, {"capped": rep.n_capped}, ["raw samples; capped draws hold the cap value"]
    rows = [{"k": e["k"], "alpha_hat": e["alpha_hat"], "predicted": rep.predicted,
             "deviation": e["deviation"]} for e in rep.estimates]
    summary = {
        "predicted": rep.predicted,
        "primary_k": rep.primary["k"],
        "primary_alpha_hat": rep.primary["alpha_hat"],
        "capped": rep.n_capped,
        "capped_fraction": rep.n_capped / rep.n_total if rep.n_total else 0.0,
    }
    if rep.borel_checks:
        for b in rep.borel_checks:
            summary[f"borel_k{b['k']}_empirical"] = b["empirical"]
            summary[f"borel_k{b['k']}_exact"] = b["borel"]
            summary[f"borel_k{b['k']}_z"] = b["z"]
    notes = list(rep.warnings)
    if rep.top_two:
        summary.update(rep.top_two)
        notes.append("measured top-two degree gap reported as is; no claim that the runner-up is k_max - 1")
    return list(rows[0]), rows, summary, notes


def run_amplitude(p, rng, threads):
    seconds = years_to_seconds(p["lifetime_years"])
    measured = extremal_amplitude_log2(p["rate"], seconds, p["branches"])
    tunnel = nat_to_log2(p["tunnel_ln"])
    rows = [
        {"quantity": "extremal_branch_amplitude", "log2:value": measured.log2_value},
        {"quantity": "tunnel_amplitude", "log2:value": tunnel.log2_value},
    ]
    bigger = measured > tunnel
    summary = {
        "events": p["rate"] * seconds,
        "measurement_exceeds_tunnel": bigger,
        "verdict": "measurement amplitude >> tunnel amplitude" if bigger
        else "measurement amplitude <= tunnel amplitude",
        "log10_exponent_ratio": math.log10(tunnel.log2_value / measured.log2_value),
    }
    return ["quantity", "log2:value"], rows, summary, ["log10_exponent_ratio = log10(tunnel log2 amplitude / measured log2 amplitude)"]


EXPERIMENTS: dict[str, Experiment] = {
    "spacing": Experiment("spacing", {
        **_dist_params("pareto", 2.0),
        "sizes": Param(_list(_int), [100, 1000, 10000, 100000], "ensemble sizes N"),
        "replicates": Param(_int, 2000, "replicates per N"),
        "method": Param(_choice("order", "full"), "order", "exact top-two draws or full ensembles"),
        "bootstrap": Param(_int, 200, "bootstrap resamples for standard errors"),
    }, run_spacing, "median top-two spacing versus ensemble size"),
    "dominance": Experiment("dominance", {
        "alpha": Param(_float, 1.0, "tail index of the exponent X"),
        "sizes": Param(_list(_int), [100, 1000, 10000], "ensemble sizes N"),
        "replicates": Param(_int, 1000, "replicates per N"),
    }, run_dominance, "share of sum 2**X outside the largest term"),
    "mda": Experiment("mda", {
        **_dist_params("exppowerlaw", 2.0),
        "log_x": Param(_list(_float), [10.0, 20.0, 40.0], "evaluation points as ln x"),
    }, run_mda, "hazard ratio x f(x)/(1-F(x))"),
    "bigjump": Experiment("bigjump", {
        **_dist_params("pareto", 1.0),
        "summands": Param(_int, 10, "summands per sum"),
        "quantile": Param(_float, 0.999, "conditioning quantile of the sum"),
        "replicates": Param(_int, 1_000_000, "number of sums"),
        "contrast": Param(_choice("lognormal", "none"), "lognormal", "also run a log-normal contrast"),
    }, run_bigjump, "single-big-jump conditional frequency"),
    "tree-contrast": Experiment("tree-contrast", {
        "b": Param(_int, 2, "branching factor"),
        "generations": Param(_range_or_list, list(range(8, 15)), "generation counts, e.g. 8..14"),
        "leaf": Param(_fragment, "family=pareto alpha=1.0", "leaf / root distribution"),
        "increment": Param(_fragment, str(DEFAULT_INCREMENT), "inherited-mode increments"),
        "replicates": Param(_int, 500, "trees per configuration"),
        "per_replicate": Param(_bool, False, "emit one row per replicate instead of medians"),
    }, run_tree_contrast, "final-draw versus inherited-draw dominance"),
    "timing": Experiment("timing", {
        **_dist_params("pareto", 1.0),
        "b": Param(_int, 2, "branching factor"),
        "generations": Param(_int, 16, "generations G"),
        "replicates": Param(_int, 10_000, "trees"),
        "n": Param(_list(_int), [1, 2, 3], "generations before the end"),
        "method": Param(_choice("auto", "full", "stream"), "auto", "draw every node or only generation maxima"),
    }, run_timing, "generation of the global maximum"),
    "mechanism": Experiment("mechanism", {
        "kind": Param(_choice("chain", "gw", "pa"), "chain", "chain reaction, Galton-Watson or preferential attachment"),
        "beta": Param(_float, 0.5, "chain growth rate"),
        "gamma": Param(_float, 1.0, "chain termination rate"),
        "offspring_mean": Param(_float, 1.0, "Galton-Watson Poisson mean"),
        "nodes": Param(_int, 100_000, "network size"),
        "m": Param(_int, 1, "edges per new node"),
        "samples": Param(lambda v: None if v in (None, "", "none") else _int(v), None,
                         "draws (chain, gw) or networks (pa); default 1e6 or 50"),
        "export": Param(_bool, False, "emit the raw samples / degree sequences instead of estimates"),
    }, run_mechanism, "tail index of a generating mechanism"),
    "amplitude": Experiment("amplitude", {
        "rate": Param(_float, 300.0, "measurements per second"),
        "lifetime_years": Param(_float, 100.0, "lifetime in 365-day years"),
        "branches": Param(_int, 2, "equal-amplitude branches per measurement"),
        "tunnel_ln": Param(_float, -1e34, "natural log of the tunnel amplitude"),
    }, run_amplitude, "extremal-branch amplitude versus tunnel amplitude"),
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = DEFAULT_SEED
    params: dict = field(default_factory=dict)
    format: str = "csv"
    output_path: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        try:
            self.seed = _int(self.seed)
        except ValueError as exc:
            raise ConfigError(f"seed: {exc}") from None
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        self.params = resolve_params(self.experiment, self.params)

    def echo(self) -> dict:
        params = {k: v for k, v in self.params.items() if v is not None}
        return {"seed": self.seed, "format": self.format, **params}


def resolve_params(experiment: str, given: dict) -> dict:
    """Apply defaults and parse values; reject unknown keys."""
    schema = EXPERIMENTS[experiment].params
    unknown = set(given) - set(schema)
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {experiment}: {', '.join(sorted(unknown))}")
    out = {}
    for name, param in schema.items():
        value = given.get(name, param.default)
        if value is None:
            out[name] = None
            continue
        try:
            out[name] = param.parse(value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{name}: {exc}") from None
    return out


def run(config: ExperimentConfig) -> ExperimentReport:
    """Execute ``config`` and return its report (nothing is written)."""
    exp = EXPERIMENTS[config.experiment]
    rng = RandomSource(config.seed).named(config.experiment)
    start = time.perf_counter()
    columns, rows, summary, notes = exp.runner(config.params, rng, config.threads)
    return ExperimentReport(
        config.experiment, config.echo(), columns, rows, summary, notes,
        duration_s=time.perf_counter() - start,
    )
