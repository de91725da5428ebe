"""Three generators of power-law variates.

* Chain reaction: runtime ``t ~ Exp(gamma)``, output ``ceil(exp(beta t))``;
  tail index ``gamma / beta``.
* Critical Galton-Watson: total progeny with Poisson offspring (Borel law at
  mean 1); survival ``~ k**(-1/2)``.
* Preferential attachment: linear (Barabasi-Albert) growth from an
  ``(m+1)``-clique; degree tail index 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .dist import open_uniform
from .errors import ArgumentError, ConfigError
from .evt import default_hill_k, fit_loglog_slope, hill_estimator, top_k
from .rng import RandomSource, map_chunks

MAX_EXPONENT = 700.0
GW_CAP = 10**7


class Kind(str, Enum):
    CHAIN_REACTION = "chain"
    GALTON_WATSON = "gw"
    PREF_ATTACH = "pa"


_KIND_ALIASES = {
    "chain": Kind.CHAIN_REACTION, "chainreaction": Kind.CHAIN_REACTION, "chain-reaction": Kind.CHAIN_REACTION,
    "gw": Kind.GALTON_WATSON, "galtonwatson": Kind.GALTON_WATSON, "galton-watson": Kind.GALTON_WATSON,
    "pa": Kind.PREF_ATTACH, "prefattach": Kind.PREF_ATTACH, "pref-attach": Kind.PREF_ATTACH,
    "ba": Kind.PREF_ATTACH,
}


@dataclass(frozen=True)
class MechanismConfig:
    kind: Kind
    beta: float = 0.5
    gamma: float = 1.0
    offspring_mean: float = 1.0
    nodes: int = 100_000
    m: int = 1

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, Kind):
            key = str(kind).strip().lower()
            if key not in _KIND_ALIASES:
                raise ConfigError(f"unknown mechanism {kind!r}")
            object.__setattr__(self, "kind", _KIND_ALIASES[key])
        if not (self.beta > 0 and self.gamma > 0):
            raise ConfigError("beta and gamma must be > 0")
        if not self.offspring_mean > 0:
            raise ConfigError("offspring_mean must be > 0")
        if self.kind is Kind.GALTON_WATSON and self.offspring_mean > 1.2:
            raise ConfigError("offspring_mean must lie in (0, 1.2]")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError("m must be an integer >= 1")
        if int(self.nodes) != self.nodes or self.nodes < self.m + 1:
            raise ConfigError("nodes must be an integer >= m + 1")

    def predicted_tail_index(self) -> float:
        if self.kind is Kind.CHAIN_REACTION:
            return self.gamma / self.beta
        if self.kind is Kind.GALTON_WATSON:
            return 0.5
        return 2.0


@dataclass
class MechanismDraws:
    """Samples from a mechanism; ``capped`` marks draws that hit a guard."""

    values: np.ndarray
    capped: np.ndarray

    @property
    def n_capped(self) -> int:
        return int(self.capped.sum())

    def usable(self) -> np.ndarray:
        return self.values[~self.capped]


# -- chain reaction --------------------------------------------------------------------


def chain_reaction_from_times(beta: float, t):
    """``ceil(exp(beta * t))`` with ``beta * t`` capped at 700."""
    t = np.asarray(t, dtype=float)
    expo = np.minimum(beta * t, MAX_EXPONENT)
    return np.ceil(np.exp(expo))


def chain_reaction_batch(beta: float, gamma: float, n: int, gen: np.random.Generator) -> MechanismDraws:
    if not (beta > 0 and gamma > 0):
        raise ArgumentError("beta and gamma must be > 0")
    t = -np.log(open_uniform(gen, n)) / gamma
    capped = beta * t > MAX_EXPONENT
    return MechanismDraws(chain_reaction_from_times(beta, t), capped)


def chain_reaction_sample(beta: float, gamma: float, rng: RandomSource) -> int:
    """One chain-reaction output ``k >= 1``."""
    return int(chain_reaction_batch(beta, gamma, 1, rng.generator()).values[0])


# -- Galton-Watson -------------------------------------------------------------------------


def gw_batch(offspring_mean: float, n: int, gen: np.random.Generator, cap: int = GW_CAP) -> MechanismDraws:
    """Total progeny of ``n`` independent Poisson Galton-Watson trees.

    All trees advance one generation at a time together; a generation of
    ``z`` individuals has ``Poisson(offspring_mean * z)`` children. Trees
    whose running total reaches ``cap`` are stopped and flagged.
    """
    if not 0 < offspring_mean <= 1.2:
        raise ArgumentError("offspring_mean must lie in (0, 1.2]")
    size = np.ones(n, dtype=np.int64)
    total = np.ones(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        children = gen.poisson(offspring_mean * size[active])
        size[active] = children
        total[active] += children
        active = active[(children > 0) & (total[active] < cap)]
    return MechanismDraws(total, total >= cap)


def gw_total_progeny(offspring_mean: float, rng: RandomSource, cap: int = GW_CAP) -> int | None:
    """Total progeny of one tree including the root; ``None`` when capped."""
    out = gw_batch(offspring_mean, 1, rng.generator(), cap)
    return None if out.capped[0] else int(out.values[0])


def borel_pmf(k, mu: float = 1.0):
    """``P(total = k) = exp(-mu k) (mu k)**(k-1) / k!``."""
    k = np.asarray(k, dtype=float)
    return np.exp(-mu * k + (k - 1) * np.log(mu * k) - special.gammaln(k + 1))


# -- preferential attachment ------------------------------------------------------------


def pref_attach_degrees(nodes: int, m: int, rng: RandomSource | np.random.Generator) -> np.ndarray:
    """Degree sequence of a linear preferential-attachment graph.

    Starts from a complete graph on ``m + 1`` nodes; each later node attaches
    ``m`` edges to distinct existing nodes chosen with probability
    proportional to degree. Sampling uniformly from the list of edge
    endpoints gives exactly degree-proportional choice.
    """
    if m < 1 or nodes < m + 1:
        raise ArgumentError("need m >= 1 and nodes >= m + 1")
    gen = rng.generator() if isinstance(rng, RandomSource) else rng
    seed_edges = m * (m + 1) // 2
    n_edges = seed_edges + m * (nodes - m - 1)
    ends = np.empty(2 * n_edges, dtype=np.int64)
    pos = 0
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            ends[pos], ends[pos + 1] = i, j
            pos += 2
    if m == 1:
        u = gen.random(nodes)
        for v in range(m + 1, nodes):
            target = ends[int(u[v] * pos)]
            ends[pos] = v
            ends[pos + 1] = target
            pos += 2
    else:
        for v in range(m + 1, nodes):
            chosen = set()
            while len(chosen) < m:
                chosen.add(int(ends[gen.integers(0, pos)]))
            for target in chosen:
                ends[pos] = v
                ends[pos + 1] = target
                pos += 2
    return np.bincount(ends, minlength=nodes)


def degree_gap_comparison(node_counts, m: int, replicates: int, rng: RandomSource) -> dict:
    """Top-two degree gap of the network vs i.i.d. Pareto(2) ensembles of equal size.

    Returns per-size medians of ``k_1 - k_2`` and ``(k_1 - k_2) / k_1`` for
    both, and log-log slopes of the absolute gaps against ``N``.
    """
    sizes = [int(n) for n in node_counts]
    out = {"N": sizes, "network_gap": [], "network_rel_gap": [], "iid_gap": [], "iid_rel_gap": []}
    for i, n in enumerate(sizes):
        net_gen = rng.named(f"net/{n}").generator()
        iid_gen = rng.named(f"iid/{n}").generator()
        net, iid = [], []
        for _ in range(replicates):
            net.append(top_k(pref_attach_degrees(n, m, net_gen), 2))
            iid.append(top_k(open_uniform(iid_gen, n) ** -0.5, 2))
        for label, pairs in (("network", np.array(net, float)), ("iid", np.array(iid))):
            gap = pairs[:, 0] - pairs[:, 1]
            out[f"{label}_gap"].append(float(np.median(gap)))
            out[f"{label}_rel_gap"].append(float(np.median(gap / pairs[:, 0])))
    if len(sizes) > 1:
        out["network_slope"] = fit_loglog_slope(sizes, np.maximum(out["network_gap"], 0.5))[0]
        out["iid_slope"] = fit_loglog_slope(sizes, out["iid_gap"])[0]
    return out


# -- orchestration -------------------------------------------------------------------------


@dataclass
class MechanismReport:
    config: MechanismConfig
    samples: int
    predicted: float
    estimates: list[dict]
    n_capped: int
    n_total: int
    warnings: list[str]
    borel_checks: list[dict] | None = None
    top_two: dict | None = None
    values: np.ndarray | None = None

    @property
    def primary(self) -> dict:
        """The estimate at the middle k choice (1% of the sample)."""
        return self.estimates[1]


def hill_k_choices(n: int) -> list[int]:
    """0.1%, 1% and ``min(n**0.8, n/10)`` of the sample."""
    return [max(2, n // 1000), max(2, n // 100), default_hill_k(n)]


def _hill_rows(values: np.ndarray, predicted: float) -> list[dict]:
    rows = []
    for k in hill_k_choices(values.size):
        est = hill_estimator(values.astype(float), k)
        rows.append({"k": k, "alpha_hat": est.alpha_hat, "deviation": est.alpha_hat - predicted})
    return rows


def mechanism_tail_report(config: MechanismConfig, samples: int, rng: RandomSource, threads: int = 1,
                          estimate: bool = True) -> MechanismReport:
    """Generate mechanism samples and compare Hill estimates with the predicted index.

    ``samples`` is the number of draws for chain reaction and Galton-Watson,
    and the number of independent networks for preferential attachment (whose
    Hill estimates are averaged). ``estimate=False`` only draws the samples
    (kept in ``values``) and leaves ``estimates`` empty.
    """
    predicted = config.predicted_tail_index()
    warnings = []
    borel = top_two = None
    if config.kind is Kind.PREF_ATTACH:
        per_rep, tops, degrees = [], [], []
        for r in range(samples):
            deg = pref_attach_degrees(config.nodes, config.m, rng.spawn(r))
            degrees.append(deg)
            if estimate:
                per_rep.append(_hill_rows(deg, predicted))
                tops.append(top_k(deg, 2))
        values = np.stack(degrees)
        if not estimate:
            return MechanismReport(config, samples, predicted, [], 0, samples, warnings, values=values)
        tops = np.array(tops, dtype=float)
        gap = tops[:, 0] - tops[:, 1]
        top_two = {
            "median_k1": float(np.median(tops[:, 0])),
            "median_k2": float(np.median(tops[:, 1])),
            "median_gap": float(np.median(gap)),
            "median_rel_gap": float(np.median(gap / tops[:, 0])),
        }
        estimates = []
        for j, k in enumerate(hill_k_choices(config.nodes)):
            a = np.array([rows[j]["alpha_hat"] for rows in per_rep])
            estimates.append({
                "k": k, "alpha_hat": float(a.mean()), "deviation": float(a.mean() - predicted),
                "stderr": float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else math.nan,
            })
        n_capped, n_total = 0, samples
    else:
        if config.kind is Kind.CHAIN_REACTION:
            fn = lambda size, gen: chain_reaction_batch(config.beta, config.gamma, size, gen)
        else:
            fn = lambda size, gen: gw_batch(config.offspring_mean, size, gen)
        parts = map_chunks(fn, samples, rng, chunk=250_000, threads=threads)
        values = np.concatenate([p.values for p in parts])
        capped = np.concatenate([p.capped for p in parts])
        n_capped, n_total = int(capped.sum()), values.size
        usable = values[~capped] if config.kind is Kind.GALTON_WATSON else values
        estimates = _hill_rows(usable, predicted) if estimate else []
        if estimate and config.kind is Kind.GALTON_WATSON:
            borel = borel_table(values, config.offspring_mean)
    if n_total and n_capped / n_total > 0.10:
        warnings.append(f"unreliable: {n_capped}/{n_total} samples capped (> 10%)")
    return MechanismReport(config, samples, predicted, estimates, n_capped, n_total, warnings, borel, top_two, values)


def borel_table(totals: np.ndarray, mu: float, ks=(1, 2, 3, 4, 5)) -> list[dict]:
    """Empirical vs Borel point masses with binomial standard errors."""
    n = totals.size
    rows = []
    for k in ks:
        p = float(borel_pmf(k, mu))
        freq = float(np.mean(totals == k))
        sigma = math.sqrt(p * (1 - p) / n)
        rows.append({"k": k, "empirical": freq, "borel": p, "sigma": sigma, "z": (freq - p) / sigma})
    return rows
