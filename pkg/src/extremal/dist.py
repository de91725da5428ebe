"""Heavy-tailed distribution families: densities, CDFs, quantiles and samplers.

Four families are supported:

``pareto``
    Standard Pareto on ``[1, inf)``, density ``alpha * x**(-1 - alpha)``.
``frechet``
    CDF ``exp(-x**(-alpha))`` on ``(0, inf)``.
``exppowerlaw``
    Exponentiated power law ``Z = exp(X)`` with CDF
    ``exp(-beta * (ln z)**(-alpha))`` on ``(1, inf)``. ``X`` itself has the
    Frechet-type CDF ``exp(-beta * x**(-alpha))``.
``lognormal``
    ``exp(mu + sigma * N(0, 1))``, used only as a light(er)-tailed contrast.

Sampling is inverse-CDF throughout, driven by an explicit
:class:`~extremal.rng.RandomSource`. Tails are evaluated through the
survival function so that extreme draws keep full relative precision.
"""

from __future__ import annotations

import math
import shlex
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError
from .rng import RandomSource

LN2 = math.log(2.0)


class Family(str, Enum):
    PARETO = "pareto"
    FRECHET = "frechet"
    EXPPOWERLAW = "exppowerlaw"
    LOGNORMAL = "lognormal"


_ALIASES = {
    "pareto": Family.PARETO,
    "frechet": Family.FRECHET,
    "fréchet": Family.FRECHET,
    "exppowerlaw": Family.EXPPOWERLAW,
    "exp-powerlaw": Family.EXPPOWERLAW,
    "exp_powerlaw": Family.EXPPOWERLAW,
    "lognormal": Family.LOGNORMAL,
    "log-normal": Family.LOGNORMAL,
}

# parameters each family accepts; anything else is a configuration error
_PARAMS = {
    Family.PARETO: ("alpha",),
    Family.FRECHET: ("alpha",),
    Family.EXPPOWERLAW: ("alpha", "beta"),
    Family.LOGNORMAL: ("mu", "sigma"),
}


def check_tail_index(alpha) -> float:
    """Validate a tail exponent: finite and strictly positive."""
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise ConfigError(f"tail index must be a number, got {alpha!r}") from None
    if not math.isfinite(a) or a <= 0:
        raise ConfigError(f"tail index must be finite and > 0, got {alpha!r}")
    return a


@dataclass(frozen=True)
class DistSpec:
    """A fully parameterised distribution family.

    Only the parameters relevant to ``family`` may be set; the others must
    stay ``None``. Missing parameters take family defaults (``alpha=1``,
    ``beta=1``, ``mu=0``, ``sigma=1``).
    """

    family: Family
    alpha: float | None = None
    beta: float | None = None
    mu: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        fam = self.family
        if not isinstance(fam, Family):
            key = str(fam).strip().lower()
            if key not in _ALIASES:
                raise ConfigError(f"unknown distribution family {fam!r}")
            object.__setattr__(self, "family", _ALIASES[key])
            fam = self.family
        allowed = _PARAMS[fam]
        for name in ("alpha", "beta", "mu", "sigma"):
            if getattr(self, name) is not None and name not in allowed:
                raise ConfigError(f"parameter {name!r} does not apply to family {fam.value!r}")
        defaults = {"alpha": 1.0, "beta": 1.0, "mu": 0.0, "sigma": 1.0}
        for name in allowed:
            if getattr(self, name) is None:
                object.__setattr__(self, name, defaults[name])
        if "alpha" in allowed:
            object.__setattr__(self, "alpha", check_tail_index(self.alpha))
        if fam is Family.EXPPOWERLAW:
            beta = float(self.beta)
            if not math.isfinite(beta) or beta <= 0:
                raise ConfigError(f"beta must be finite and > 0, got {self.beta!r}")
            object.__setattr__(self, "beta", beta)
        if fam is Family.LOGNORMAL:
            mu, sigma = float(self.mu), float(self.sigma)
            if not math.isfinite(mu):
                raise ConfigError(f"mu must be finite, got {self.mu!r}")
            if not math.isfinite(sigma) or sigma <= 0:
                raise ConfigError(f"sigma must be finite and > 0, got {self.sigma!r}")
            object.__setattr__(self, "mu", mu)
            object.__setattr__(self, "sigma", sigma)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def pareto(cls, alpha=1.0):
        return cls(Family.PARETO, alpha=alpha)

    @classmethod
    def frechet(cls, alpha=1.0):
        return cls(Family.FRECHET, alpha=alpha)

    @classmethod
    def exp_powerlaw(cls, alpha=1.0, beta=1.0):
        return cls(Family.EXPPOWERLAW, alpha=alpha, beta=beta)

    @classmethod
    def lognormal(cls, mu=0.0, sigma=1.0):
        return cls(Family.LOGNORMAL, mu=mu, sigma=sigma)

    @classmethod
    def from_mapping(cls, params: dict) -> "DistSpec":
        params = dict(params)
        if "family" not in params:
            raise ConfigError("missing 'family'")
        family = params.pop("family")
        unknown = set(params) - {"alpha", "beta", "mu", "sigma"}
        if unknown:
            raise ConfigError(f"unknown distribution parameter(s): {', '.join(sorted(unknown))}")
        try:
            values = {k: float(v) for k, v in params.items()}
        except ValueError as exc:
            raise ConfigError(f"non-numeric distribution parameter: {exc}") from None
        return cls(family, **values)

    @classmethod
    def parse(cls, text: str) -> "DistSpec":
        """Parse a fragment such as ``"family=pareto alpha=2.0"``."""
        params = {}
        for token in shlex.split(text.replace(",", " ")):
            key, sep, value = token.partition("=")
            if not sep or not key:
                raise ConfigError(f"expected key=value, got {token!r}")
            key = key.strip().lower()
            if key in params:
                raise ConfigError(f"duplicate key {key!r}")
            params[key] = value.strip()
        return cls.from_mapping(params)

    def params(self) -> dict:
        """The family and its active parameters, in a stable order."""
        out = {"family": self.family.value}
        for name in _PARAMS[self.family]:
            out[name] = getattr(self, name)
        return out

    def __str__(self):
        return " ".join(f"{k}={v}" for k, v in self.params().items())

    # -- analytic functions -----------------------------------------------------

    def support_min(self) -> float:
        return {Family.PARETO: 1.0, Family.EXPPOWERLAW: 1.0}.get(self.family, 0.0)

    def _check_support(self, x):
        x = np.asarray(x, dtype=float)
        lo = self.support_min()
        bad = (x <= lo) if self.family is not Family.PARETO else (x < lo)
        if np.any(bad | np.isnan(x)):
            op = ">=" if self.family is Family.PARETO else ">"
            raise DomainError(f"{self.family.value}: x must be {op} {lo}")
        return x

    def cdf(self, x):
        x = self._check_support(x)
        fam = self.family
        with np.errstate(divide="ignore", over="ignore"):
            if fam is Family.PARETO:
                out = -np.expm1(-self.alpha * np.log(x))
            elif fam is Family.FRECHET:
                out = np.exp(-(x ** -self.alpha))
            elif fam is Family.EXPPOWERLAW:
                out = np.exp(-self.beta * np.log(x) ** -self.alpha)
            else:
                out = special.ndtr((np.log(x) - self.mu) / self.sigma)
        return _scalar(out)

    def sf(self, x):
        """Survival function ``1 - F(x)``, accurate when ``F`` is close to 1."""
        x = self._check_support(x)
        fam = self.family
        with np.errstate(divide="ignore", over="ignore"):
            if fam is Family.PARETO:
                out = x ** -self.alpha
            elif fam is Family.FRECHET:
                out = -np.expm1(-(x ** -self.alpha))
            elif fam is Family.EXPPOWERLAW:
                out = -np.expm1(-self.beta * np.log(x) ** -self.alpha)
            else:
                out = special.ndtr(-(np.log(x) - self.mu) / self.sigma)
        return _scalar(out)

    def pdf(self, x):
        x = self._check_support(x)
        fam, a = self.family, self.alpha
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if fam is Family.PARETO:
                out = a * x ** (-1.0 - a)
            elif fam is Family.FRECHET:
                t = x**-a
                out = a * t / x * np.exp(-t)
            elif fam is Family.EXPPOWERLAW:
                lz = np.log(x)
                t = self.beta * lz**-a
                out = a * t / (lz * x) * np.exp(-t)
            else:
                w = (np.log(x) - self.mu) / self.sigma
                out = np.exp(-0.5 * w * w) / (x * self.sigma * math.sqrt(2 * math.pi))
        return _scalar(out)

    def quantile(self, u):
        """Inverse CDF on ``[0, 1)``."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u >= 1) | np.isnan(u)):
            raise DomainError("quantile level must lie in [0, 1)")
        if self.family is Family.PARETO:
            return _scalar((1.0 - u) ** (-1.0 / self.alpha))
        with np.errstate(divide="ignore"):
            return self._from_cdf_level(u)

    def isf(self, s):
        """Inverse survival function on ``(0, 1]``; precise deep in the tail."""
        s = np.asarray(s, dtype=float)
        if np.any((s <= 0) | (s > 1) | np.isnan(s)):
            raise DomainError("survival level must lie in (0, 1]")
        fam, a = self.family, self.alpha
        with np.errstate(divide="ignore", over="ignore"):
            if fam is Family.PARETO:
                out = s ** (-1.0 / a)
            elif fam is Family.FRECHET:
                out = (-np.log1p(-s)) ** (-1.0 / a)
            elif fam is Family.EXPPOWERLAW:
                out = np.exp((-np.log1p(-s) / self.beta) ** (-1.0 / a))
            else:
                out = np.exp(self.mu - self.sigma * special.ndtri(s))
        return _scalar(out)

    def _from_cdf_level(self, u):
        fam, a = self.family, self.alpha
        if fam is Family.FRECHET:
            return _scalar((-np.log(u)) ** (-1.0 / a))
        if fam is Family.EXPPOWERLAW:
            return _scalar(np.exp((-np.log(u) / self.beta) ** (-1.0 / a)))
        return _scalar(np.exp(self.mu + self.sigma * special.ndtri(u)))

    def log_isf(self, s):
        """Natural log of :meth:`isf`, finite even where ``isf`` overflows."""
        s = np.asarray(s, dtype=float)
        if np.any((s <= 0) | (s > 1) | np.isnan(s)):
            raise DomainError("survival level must lie in (0, 1]")
        fam, a = self.family, self.alpha
        with np.errstate(divide="ignore"):
            if fam is Family.PARETO:
                out = -np.log(s) / a
            elif fam is Family.FRECHET:
                out = -np.log(-np.log1p(-s)) / a
            elif fam is Family.EXPPOWERLAW:
                out = (-np.log1p(-s) / self.beta) ** (-1.0 / a)
            else:
                out = self.mu - self.sigma * special.ndtri(s)
        return _scalar(out)


def _scalar(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr


# -- scalar entry points ---------------------------------------------------------


def pareto_quantile(u: float, alpha: float) -> float:
    """``(1 - u)**(-1/alpha)``, the standard Pareto quantile on ``[0, 1)``."""
    return DistSpec.pareto(alpha).quantile(u)


def frechet_cdf(x: float, alpha: float) -> float:
    """``exp(-x**(-alpha))`` for ``x > 0``; the limit at ``0+`` is 0."""
    return DistSpec.frechet(alpha).cdf(x)


def exp_powerlaw_cdf(z: float, alpha: float, beta: float) -> float:
    """``exp(-beta * (ln z)**(-alpha))`` for ``z > 1``."""
    return DistSpec.exp_powerlaw(alpha, beta).cdf(z)


# -- sampling --------------------------------------------------------------------


def open_uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1) with 53-bit resolution."""
    return (gen.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class TailSample:
    """A batch of i.i.d. draws together with the parameters that produced it.

    For ``exppowerlaw`` the linear-scale values overflow to ``inf`` once
    ``ln z`` exceeds ~709; ``log_values`` always holds the finite natural logs.
    """

    spec: DistSpec
    values: np.ndarray
    seed: int
    stream: int
    log_values: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values)


def draw(spec: DistSpec, size, gen: np.random.Generator) -> np.ndarray:
    """Raw inverse-CDF draws from an already-constructed generator."""
    return spec.isf(open_uniform(gen, size))


def draw_log(spec: DistSpec, size, gen: np.random.Generator) -> np.ndarray:
    """Natural logs of draws; identical underlying uniforms as :func:`draw`."""
    return spec.log_isf(open_uniform(gen, size))


def sample(spec: DistSpec, n: int, rng: RandomSource) -> TailSample:
    """Draw ``n`` i.i.d. variates from ``spec``; deterministic given ``rng``."""
    if not isinstance(spec, DistSpec):
        raise ConfigError("spec must be a DistSpec")
    n = int(n)
    if n < 1:
        raise ConfigError(f"sample size must be >= 1, got {n}")
    u = open_uniform(rng.generator(), n)
    values = np.atleast_1d(spec.isf(u))
    logs = np.atleast_1d(spec.log_isf(u)) if spec.family is Family.EXPPOWERLAW else None
    return TailSample(spec, values, rng.seed, rng.stream, logs)


def log2_sample(spec: DistSpec, n: int, rng: RandomSource, base: float = 2.0):
    """Sample ``Z = base**X`` with ``X ~ spec`` directly in base-2 log form.

    Returns a :class:`~extremal.logdim.LogDimArray` whose ``log2`` entries are
    ``X * log2(base)``; for the default base 2 they are the draws of ``X``
    themselves, so no magnitude is ever materialised.
    """
    from .logdim import LogDimArray

    if spec.family not in (Family.PARETO, Family.FRECHET):
        raise ConfigError("log2_sample needs the exponent family to be pareto or frechet")
    x = sample(spec, n, rng).values
    if base == 2.0:
        return LogDimArray(x)
    if base <= 0 or base == 1:
        raise ConfigError(f"invalid exponentiation base {base!r}")
    return LogDimArray(x * (math.log(base) / LN2))
