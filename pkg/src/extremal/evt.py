"""Order statistics, spacing scaling, tail-index estimation and big-jump checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .dist import DistSpec, Family, TailSample, draw, open_uniform
from .errors import ArgumentError, DomainError, InsufficientDataError
from .rng import RandomSource, map_chunks

MIN_CONDITIONING_EVENTS = 30
BIG_JUMP_RATIO = 0.9


def _values(samples) -> np.ndarray:
    if isinstance(samples, TailSample):
        return samples.values
    return np.asarray(samples, dtype=float).ravel()


def top_k(samples, k: int) -> np.ndarray:
    """The ``k`` largest values, in descending order (duplicates retained)."""
    x = _values(samples)
    k = int(k)
    if k < 0 or k > x.size:
        raise ArgumentError(f"k={k} out of range for {x.size} samples")
    if k == 0:
        return x[:0].copy()
    part = np.partition(x, x.size - k)[x.size - k:]
    return np.sort(part)[::-1]


# -- spacing ---------------------------------------------------------------------


def top_two(spec: DistSpec, n: int, size: int, gen: np.random.Generator):
    """Exact joint draws of the largest and second-largest of ``n`` i.i.d. variates.

    Uses the order-statistic representation of uniforms, ``U_(n) = V1**(1/n)``
    and ``U_(n-1) = U_(n) * V2**(1/(n-1))``, mapped through the inverse survival
    function. Costs O(1) per replicate regardless of ``n``.
    """
    if n < 2:
        raise ArgumentError("ensemble size must be >= 2")
    v = open_uniform(gen, (2, size))
    log_u1 = np.log(v[0]) / n
    log_u2 = log_u1 + np.log(v[1]) / (n - 1)
    s1 = -np.expm1(log_u1)
    s2 = -np.expm1(log_u2)
    return np.atleast_1d(spec.isf(s1)), np.atleast_1d(spec.isf(s2))


def _top_two_full(spec: DistSpec, n: int, size: int, gen: np.random.Generator):
    # memory per block bounded to ~2e6 draws
    block = max(1, min(size, 2_000_000 // n))
    x1, x2 = np.empty(size), np.empty(size)
    for start in range(0, size, block):
        m = min(block, size - start)
        x = draw(spec, (m, n), gen)
        part = np.partition(x, n - 2, axis=1)
        x1[start:start + m] = part[:, n - 1]
        x2[start:start + m] = part[:, n - 2]
    return x1, x2


def fit_loglog_slope(x, y) -> tuple[float, float]:
    """OLS slope and intercept of ``ln y`` against ``ln x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


@dataclass
class SpacingReport:
    dist: DistSpec
    ensemble_sizes: list[int]
    replicates: int
    median_spacing: list[float]
    slope: float
    slope_stderr: float
    median_stderr: list[float]

    @property
    def predicted_slope(self) -> float | None:
        if self.dist.family in (Family.PARETO, Family.FRECHET):
            return 1.0 / self.dist.alpha
        return None

    def rows(self) -> list[dict]:
        return [
            {"N": n, "median_spacing": m, "median_stderr": se}
            for n, m, se in zip(self.ensemble_sizes, self.median_spacing, self.median_stderr)
        ]


def spacing_experiment(
    dist: DistSpec,
    ensemble_sizes,
    replicates: int,
    rng: RandomSource,
    method: str = "order",
    bootstrap: int = 200,
    threads: int = 1,
) -> SpacingReport:
    """Median top-two spacing ``X_1 - X_2`` per ensemble size and its log-log slope.

    For a tail index ``alpha`` the medians grow like ``N**(1/alpha)``.

    Parameters
    ----------
    method : {"order", "full"}
        ``"order"`` draws the two top order statistics exactly;
        ``"full"`` materialises all ``N`` draws of every replicate.
    bootstrap : int
        Resamples used for the slope standard error and the per-point
        standard errors of the medians.
    """
    sizes = [int(n) for n in ensemble_sizes]
    if not sizes:
        raise ArgumentError("ensemble_sizes is empty")
    if any(n < 2 for n in sizes):
        raise ArgumentError("every ensemble size must be >= 2")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ArgumentError("ensemble sizes must be strictly increasing")
    if replicates < 1:
        raise ArgumentError("replicates must be >= 1")
    if method not in ("order", "full"):
        raise ArgumentError(f"unknown method {method!r}")

    spacings = []
    for i, n in enumerate(sizes):
        src = rng.spawn(i)
        if method == "order":
            x1, x2 = top_two(dist, n, replicates, src.generator())
            spacings.append(x1 - x2)
        else:
            parts = map_chunks(
                lambda size, gen, n=n: _top_two_full(dist, n, size, gen),
                replicates, src, chunk=max(1, 2_000_000 // n), threads=threads,
            )
            spacings.append(np.concatenate([a - b for a, b in parts]))
    spacings = np.array(spacings)
    medians = np.median(spacings, axis=1)
    slope, _ = fit_loglog_slope(sizes, medians) if len(sizes) > 1 else (math.nan, 0.0)

    slope_se, point_se = math.nan, [math.nan] * len(sizes)
    if bootstrap > 1:
        gen = rng.named("bootstrap").generator()
        idx = gen.integers(0, replicates, size=(bootstrap, replicates))
        boot = np.median(spacings[:, idx], axis=2)  # (sizes, bootstrap)
        point_se = boot.std(axis=1, ddof=1).tolist()
        if len(sizes) > 1:
            lx = np.log(sizes)
            lxc = lx - lx.mean()
            slopes = (lxc @ np.log(boot)) / (lxc @ lxc)
            slope_se = float(slopes.std(ddof=1))
    return SpacingReport(dist, sizes, replicates, medians.tolist(), slope, slope_se, point_se)


# -- tail index --------------------------------------------------------------------


@dataclass(frozen=True)
class TailEstimate:
    alpha_hat: float
    k_used: int
    n: int


def default_hill_k(n: int) -> int:
    """``n**0.8`` capped at ``n/10`` (and kept within ``[2, n-1]``)."""
    k = min(int(round(n**0.8)), n // 10)
    return max(2, min(k, n - 1))


def hill_estimator(samples, k: int | None = None, ties: str = "exclude") -> TailEstimate:
    """Hill estimate of the tail index from the ``k + 1`` largest values.

    ``alpha_hat = k / sum_{i<=k} ln(X_(i) / X_(k+1))``.

    Parameters
    ----------
    k : int, optional
        Number of upper order statistics; defaults to :func:`default_hill_k`.
    ties : {"exclude", "keep"}
        With integer-valued data several of the top ``k`` values can equal the
        threshold ``X_(k+1)``; they add zero to the sum while still counting in
        ``k``, which inflates the estimate by an amount that depends on where
        the threshold lands. ``"exclude"`` lowers ``k`` to the number of values
        strictly above the threshold (reported as ``k_used``). For continuous
        data both settings agree almost surely.
    """
    x = _values(samples)
    n = x.size
    if n < 3:
        raise ArgumentError("need at least 3 samples")
    if np.any(~(x > 0)):
        raise DomainError("Hill estimator requires strictly positive samples")
    k = default_hill_k(n) if k is None else int(k)
    if not 2 <= k < n:
        raise ArgumentError(f"k must satisfy 2 <= k < n, got k={k}, n={n}")
    if ties not in ("exclude", "keep"):
        raise ArgumentError(f"unknown ties policy {ties!r}")
    top = top_k(x, k + 1)
    if ties == "exclude":
        # top is descending, so the values strictly above the threshold form a prefix
        k = int(np.searchsorted(-top[:k], -top[k], side="left"))
        if k < 2:
            raise ArgumentError("fewer than two values lie strictly above the threshold")
    total = float(np.sum(np.log(top[:k] / top[k])))
    if not total > 0:
        raise ArgumentError("upper order statistics are all tied; tail index undefined")
    return TailEstimate(k / total, k, n)


# -- domain of attraction ----------------------------------------------------------


def _tail_ratio(t: float) -> float:
    """``t * exp(-t) / (1 - exp(-t))``, stable for small and large ``t``."""
    if t == 0:
        return 1.0
    return t * math.exp(-t) / -math.expm1(-t)


def mda_hazard_ratio(spec: DistSpec, x: float) -> float:
    """The ratio ``x f(x) / (1 - F(x))``.

    A distribution is in the Frechet domain of attraction with index
    ``alpha`` when this ratio tends to ``alpha``. It is exactly ``alpha``
    for Pareto, tends to ``alpha`` for Frechet, and decays like
    ``alpha / ln x`` for the exponentiated power law.
    """
    x = float(x)
    fam, a = spec.family, spec.alpha
    if fam is Family.PARETO:
        if not x >= 1:
            raise DomainError("pareto: x must be >= 1")
        return float(a)
    if not x > spec.support_min() or not math.isfinite(x):
        raise DomainError(f"{fam.value}: x={x!r} is outside the support")
    if fam is Family.FRECHET:
        return a * _tail_ratio(x**-a)
    if fam is Family.EXPPOWERLAW:
        lz = math.log(x)
        return a * _tail_ratio(spec.beta * lz**-a) / lz
    w = (math.log(x) - spec.mu) / spec.sigma
    log_pdf = -0.5 * w * w - 0.5 * math.log(2 * math.pi)
    return math.exp(log_pdf - float(special.log_ndtr(-w))) / spec.sigma


# -- single big jump -----------------------------------------------------------------


def _sum_and_max(dist: DistSpec, n_summands: int, size: int, gen):
    x = draw(dist, (size, n_summands), gen)
    return x.sum(axis=1), x.max(axis=1)


def big_jump_counts(
    dist: DistSpec,
    n_summands: int,
    threshold_quantile: float,
    replicates: int,
    rng: RandomSource,
    ratio: float = BIG_JUMP_RATIO,
    threads: int = 1,
) -> tuple[int, int]:
    """``(hits, events)``: sums above the empirical quantile, and those with max/sum > ratio."""
    if n_summands < 1:
        raise ArgumentError("n_summands must be >= 1")
    if not 0 < threshold_quantile < 1:
        raise ArgumentError("threshold_quantile must lie in (0, 1)")
    chunk = max(1, 2_000_000 // n_summands)
    parts = map_chunks(
        lambda size, gen: _sum_and_max(dist, n_summands, size, gen),
        replicates, rng, chunk=chunk, threads=threads,
    )
    sums = np.concatenate([p[0] for p in parts])
    maxes = np.concatenate([p[1] for p in parts])
    threshold = np.quantile(sums, threshold_quantile)
    cond = sums > threshold
    events = int(cond.sum())
    if events < MIN_CONDITIONING_EVENTS:
        raise InsufficientDataError("too few conditioning events", events, MIN_CONDITIONING_EVENTS)
    hits = int(np.sum(maxes[cond] > ratio * sums[cond]))
    return hits, events


def single_big_jump(
    dist: DistSpec,
    n_summands: int,
    threshold_quantile: float,
    replicates: int,
    rng: RandomSource,
    threads: int = 1,
) -> float:
    """Estimate ``P(max/sum > 0.9 | sum > s)``, ``s`` the empirical sum quantile.

    Raises :class:`InsufficientDataError` when fewer than 30 replicates exceed
    the threshold.
    """
    hits, events = big_jump_counts(dist, n_summands, threshold_quantile, replicates, rng, threads=threads)
    return hits / events
