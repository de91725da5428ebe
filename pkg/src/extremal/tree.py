"""Complete b-ary branching trees with a real-valued draw on every node.

A tree of ``G`` generations has ``b**g`` nodes in generation ``g`` (the root
is generation 0) and ``b**G`` leaves, so ``ln(leaves) = G ln b`` plays the
role of ``T / Delta`` in exponential branch growth. Node ``j`` of generation
``g`` is the child of node ``j // b`` in generation ``g - 1``.

Two draw schemes are supported:

* ``FinalDraw``: every node gets an independent draw.
* ``Inherited``: every node gets its parent's value plus an independent
  increment, so leaf values are path sums and share their common history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .dist import DistSpec, draw, open_uniform
from .errors import ArgumentError, ResourceGuardError
from .logdim import dominance_fraction_rows
from .rng import RandomSource, map_chunks

# enough for b=2, G=24; bigger trees go through the streaming paths
MAX_NODES = 2**25 - 1

# near-constant accumulation per generation (25% log-scale jitter)
DEFAULT_INCREMENT = DistSpec.lognormal(0.0, 0.25)


def node_count(b: int, G: int) -> int:
    """Total nodes ``sum_{g=0..G} b**g``."""
    return (b ** (G + 1) - 1) // (b - 1)


def generation_bounds(b: int, G: int) -> np.ndarray:
    """Exclusive end offset of each generation in the flat node ordering."""
    return np.cumsum([b**g for g in range(G + 1)])


def _check_shape(b: int, G: int, guard: bool = True):
    if int(b) != b or b < 2:
        raise ArgumentError(f"branching factor must be an integer >= 2, got {b!r}")
    if int(G) != G or G < 1:
        raise ArgumentError(f"generations must be an integer >= 1, got {G!r}")
    if guard and node_count(b, G) > MAX_NODES:
        raise ResourceGuardError(
            f"tree with b={b}, G={G} has {node_count(b, G)} nodes (guard {MAX_NODES})"
        )


class Mode(str, Enum):
    FINAL_DRAW = "final"
    INHERITED = "inherited"


@dataclass(frozen=True)
class DrawMode:
    mode: Mode
    increment_dist: DistSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if (self.mode is Mode.INHERITED) != (self.increment_dist is not None):
            raise ArgumentError("increment_dist is required for, and only for, inherited mode")

    @classmethod
    def final_draw(cls):
        return cls(Mode.FINAL_DRAW)

    @classmethod
    def inherited(cls, increment_dist: DistSpec):
        return cls(Mode.INHERITED, increment_dist)


@dataclass
class BranchTree:
    branching_factor: int
    generations: int
    node_values: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def leaf_count(self) -> int:
        return self.branching_factor**self.generations

    @property
    def total_nodes(self) -> int:
        return node_count(self.branching_factor, self.generations)

    @property
    def leaves(self) -> np.ndarray:
        if self.node_values is None:
            raise ArgumentError("tree has no draws assigned")
        return self.node_values[-1]

    def log_leaf_count(self) -> float:
        """``ln(leaf_count) = G ln b``, the exponent of the growth law."""
        return self.generations * math.log(self.branching_factor)


def grow_tree(b: int, G: int) -> BranchTree:
    """Skeleton of a complete ``b``-ary tree with ``G`` generations (zero-valued)."""
    _check_shape(b, G)
    values = [np.zeros(b**g) for g in range(G + 1)]
    return BranchTree(b, G, values)


def inherited_values(b: int, G: int, root, increments: Callable[[tuple], np.ndarray]) -> list[np.ndarray]:
    """Per-generation values of an inherited-draw tree.

    ``root`` has shape ``(R,)`` (``R`` independent trees) or is a scalar;
    ``increments(shape)`` supplies the i.i.d. increments for one generation.
    """
    current = np.atleast_1d(np.asarray(root, dtype=float))[:, None]
    out = [current]
    for _ in range(G):
        current = np.repeat(current, b, axis=1)
        current = current + increments(current.shape)
        out.append(current)
    if np.ndim(root) == 0:
        return [level[0] for level in out]
    return out


def assign_draws(tree: BranchTree, mode: DrawMode, leaf_dist: DistSpec, rng: RandomSource) -> BranchTree:
    """Attach a draw to every node of ``tree`` according to ``mode``.

    FinalDraw: each node independently from ``leaf_dist``. Inherited: the
    root draws from ``leaf_dist``; every other node adds an increment from
    ``mode.increment_dist`` to its parent's value.
    """
    b, G = tree.branching_factor, tree.generations
    gen = rng.generator()
    if mode.mode is Mode.FINAL_DRAW:
        values = [np.atleast_1d(draw(leaf_dist, b**g, gen)) for g in range(G + 1)]
    else:
        root = float(draw(leaf_dist, (), gen))
        values = inherited_values(b, G, root, lambda shape: draw(mode.increment_dist, shape, gen))
    return replace(tree, node_values=values)


def _leaf_matrix(mode: DrawMode, leaf_dist: DistSpec, b: int, G: int, size: int, gen) -> np.ndarray:
    if mode.mode is Mode.FINAL_DRAW:
        return draw(leaf_dist, (size, b**G), gen)
    root = draw(leaf_dist, size, gen)
    return inherited_values(b, G, root, lambda shape: draw(mode.increment_dist, shape, gen))[-1]


def _contrast_chunk(mode, leaf_dist, b, G, size, gen):
    leaves = _leaf_matrix(mode, leaf_dist, b, G, size, gen)
    srt = -np.sort(-leaves, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = (srt[:, 0] - srt[:, 1]) / srt[:, 0]
    return gap, dominance_fraction_rows(srt)


@dataclass
class ContrastRow:
    mode: str
    b: int
    G: int
    leaf_count: int
    median_gap_ratio: float
    median_log2_dominance: float
    median_log2_dominance_se: float
    gap_ratios: np.ndarray | None = field(default=None, repr=False)
    log2_dominance: np.ndarray | None = field(default=None, repr=False)


def dominance_contrast(
    b: int,
    generations: Sequence[int],
    leaf_dist: DistSpec,
    increment_dist: DistSpec,
    replicates: int,
    rng: RandomSource,
    bootstrap: int = 200,
    threads: int = 1,
    keep_raw: bool = False,
) -> list[ContrastRow]:
    """FinalDraw vs Inherited: how strongly the top leaf dominates ``sum 2**value``.

    For every generation count and both modes, reports the medians over
    replicates of ``(X_1 - X_2) / X_1`` and of the log2 dominance fraction of
    ``2**leaf_value``, plus a bootstrap standard error of the latter median.
    """
    gens = [int(g) for g in generations]
    if not gens:
        raise ArgumentError("generations is empty")
    for G in gens:
        _check_shape(b, G)
    modes = [DrawMode.final_draw(), DrawMode.inherited(increment_dist)]
    rows = []
    for mode in modes:
        for G in gens:
            src = rng.named(f"{mode.mode.value}/{G}")
            chunk = max(1, 4_000_000 // b**G)
            parts = map_chunks(
                lambda size, gen, mode=mode, G=G: _contrast_chunk(mode, leaf_dist, b, G, size, gen),
                replicates, src, chunk=chunk, threads=threads,
            )
            gap = np.concatenate([p[0] for p in parts])
            dom = np.concatenate([p[1] for p in parts])
            se = _bootstrap_median_se(dom, bootstrap, src.named("bootstrap"))
            rows.append(ContrastRow(
                mode.mode.value, b, G, b**G,
                float(np.median(gap)), float(np.median(dom)), se,
                gap if keep_raw else None, dom if keep_raw else None,
            ))
    return rows


def _bootstrap_median_se(x: np.ndarray, resamples: int, rng: RandomSource) -> float:
    if resamples < 2:
        return math.nan
    idx = rng.generator().integers(0, x.size, size=(resamples, x.size))
    return float(np.median(x[idx], axis=1).std(ddof=1))


# -- extremum timing -------------------------------------------------------------------


def exact_timing_probability(b: int, G: int, n: int) -> float:
    """P(argmax over all nodes lies in a generation ``<= G - n``), i.i.d. continuous draws.

    Equals the share of nodes in generations ``0..G-n``:
    ``(b**(G-n+1) - 1) / (b**(G+1) - 1)``.
    """
    if n < 0 or n > G + 1:
        raise ArgumentError(f"n must lie in [0, G+1], got {n}")
    return (b ** (G - n + 1) - 1) / (b ** (G + 1) - 1)


def _argmax_generation_full(dist, b, G, size, gen):
    bounds = generation_bounds(b, G)
    total = int(bounds[-1])
    block = max(1, min(size, 4_000_000 // total))
    counts = np.zeros(G + 1, dtype=np.int64)
    for start in range(0, size, block):
        m = min(block, size - start)
        values = draw(dist, (m, total), gen)
        g = np.searchsorted(bounds, np.argmax(values, axis=1), side="right")
        counts += np.bincount(g, minlength=G + 1)
    return counts


def _argmax_generation_stream(dist, b, G, size, gen):
    # per-generation maxima drawn directly: max of m i.i.d. has survival 1 - U**(1/m)
    maxima = np.empty((size, G + 1))
    for g in range(G + 1):
        s = -np.expm1(np.log(open_uniform(gen, size)) / b**g)
        maxima[:, g] = dist.log_isf(s)
    return np.bincount(np.argmax(maxima, axis=1), minlength=G + 1)


@dataclass
class TimingResult:
    b: int
    G: int
    replicates: int
    generation_counts: list[int]

    def frequency(self, n: int) -> float:
        """Observed share of replicates whose maximum sits in a generation ``<= G - n``."""
        return sum(self.generation_counts[: self.G - n + 1]) / self.replicates

    def rows(self, ns: Sequence[int]) -> list[dict]:
        out = []
        for n in ns:
            p = exact_timing_probability(self.b, self.G, n)
            out.append({
                "n": n,
                "frequency": self.frequency(n),
                "exact_prediction": p,
                "branching_estimate": float(self.b) ** -n,
                "exp_estimate": math.exp(-n),
                "binomial_sigma": math.sqrt(p * (1 - p) / self.replicates),
            })
        return out


def extremum_timing(
    b: int,
    G: int,
    node_dist: DistSpec,
    replicates: int,
    rng: RandomSource,
    ns: Sequence[int] = (1, 2, 3),
    method: str = "auto",
    threads: int = 1,
) -> list[tuple[int, float]]:
    """Frequency that the global maximum sits ``n`` or more generations before the leaves.

    See :func:`timing_experiment` for the full per-generation result.
    """
    res = timing_experiment(b, G, node_dist, replicates, rng, method=method, threads=threads)
    return [(n, res.frequency(n)) for n in ns]


def timing_experiment(
    b: int,
    G: int,
    node_dist: DistSpec,
    replicates: int,
    rng: RandomSource,
    method: str = "auto",
    threads: int = 1,
) -> TimingResult:
    """Count, over replicates, the generation holding the maximum of all node draws.

    ``method="full"`` draws every node of every tree; ``"stream"`` draws only
    each generation's maximum (exact in law, and not subject to the memory
    guard). ``"auto"`` uses ``full`` when the tree fits under the guard.
    """
    _check_shape(b, G, guard=False)
    if method == "auto":
        method = "full" if node_count(b, G) <= MAX_NODES else "stream"
    if method == "full":
        _check_shape(b, G)
        fn = _argmax_generation_full
        chunk = max(1, 4_000_000 // node_count(b, G))
    elif method == "stream":
        fn = _argmax_generation_stream
        chunk = 10_000
    else:
        raise ArgumentError(f"unknown method {method!r}")
    parts = map_chunks(
        lambda size, gen: fn(node_dist, b, G, size, gen),
        replicates, rng, chunk=chunk, threads=threads,
    )
    counts = np.sum(parts, axis=0)
    return TimingResult(b, G, replicates, [int(c) for c in counts])
