import math

import numpy as np
import pytest
from scipy import stats

from extremal.dist import (
    DistSpec,
    Family,
    exp_powerlaw_cdf,
    frechet_cdf,
    log2_sample,
    open_uniform,
    pareto_quantile,
    sample,
)
from extremal.errors import ConfigError, DomainError
from extremal.rng import RandomSource

# scipy parameterisations used as independent references
def scipy_ref(spec):
    if spec.family is Family.PARETO:
        return stats.pareto(b=spec.alpha)
    if spec.family is Family.FRECHET:
        return stats.invweibull(c=spec.alpha)
    if spec.family is Family.LOGNORMAL:
        return stats.lognorm(s=spec.sigma, scale=math.exp(spec.mu))
    raise ValueError(spec)


SPECS = [
    DistSpec.pareto(0.5), DistSpec.pareto(2.0),
    DistSpec.frechet(1.0), DistSpec.frechet(3.0),
    DistSpec.exp_powerlaw(2.0, 1.0), DistSpec.exp_powerlaw(1.5, 0.3),
    DistSpec.lognormal(0.0, 1.0), DistSpec.lognormal(1.0, 0.25),
]


@pytest.mark.parametrize("u, alpha, expected", [(0.0, 2.0, 1.0), (0.75, 1.0, 4.0), (0.99, 2.0, 10.0)])
def test_pareto_quantile_examples(u, alpha, expected):
    assert pareto_quantile(u, alpha) == pytest.approx(expected, rel=1e-12)


def test_frechet_cdf_examples():
    assert frechet_cdf(1.0, 3.0) == pytest.approx(math.exp(-1), rel=1e-12)
    assert frechet_cdf(10.0, 2.0) == pytest.approx(0.9900498337491681, rel=1e-12)


def test_exp_powerlaw_cdf_examples():
    assert exp_powerlaw_cdf(math.e, 1.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)
    assert exp_powerlaw_cdf(math.exp(10), 2.0, 1.0) == pytest.approx(math.exp(-0.01), rel=1e-12)


def test_exp_powerlaw_tail_probability():
    # P(Z > e^10) = 1 - exp(-0.01)
    spec = DistSpec.exp_powerlaw(2.0, 1.0)
    assert spec.sf(math.exp(10)) == pytest.approx(-math.expm1(-0.01), rel=1e-12)
    assert spec.sf(math.exp(10)) == pytest.approx(0.00995, abs=1e-5)


@pytest.mark.parametrize("spec", [s for s in SPECS if s.family is not Family.EXPPOWERLAW], ids=str)
def test_cdf_pdf_match_scipy(spec):
    ref = scipy_ref(spec)
    x = ref.ppf(np.linspace(0.01, 0.999, 57))
    np.testing.assert_allclose(spec.cdf(x), ref.cdf(x), rtol=1e-10)
    np.testing.assert_allclose(spec.sf(x), ref.sf(x), rtol=1e-9)
    np.testing.assert_allclose(spec.pdf(x), ref.pdf(x), rtol=1e-9)


def test_exp_powerlaw_log_is_scaled_frechet():
    # ln Z has CDF exp(-beta l^-alpha): a Frechet with scale beta**(1/alpha)
    spec = DistSpec.exp_powerlaw(1.5, 0.3)
    ref = stats.invweibull(c=1.5, scale=0.3 ** (1 / 1.5))
    ell = ref.ppf(np.linspace(0.02, 0.98, 25))
    np.testing.assert_allclose(spec.cdf(np.exp(ell)), ref.cdf(ell), rtol=1e-10)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_quantile_cdf_round_trip(spec):
    u = np.linspace(0.001, 0.999, 101)
    np.testing.assert_allclose(spec.cdf(spec.quantile(u)), u, rtol=1e-12, atol=1e-12)
    s = np.logspace(-12, -1, 23)
    z = spec.isf(s)
    finite = np.isfinite(z)  # exppowerlaw overflows past ln z ~ 709
    np.testing.assert_allclose(spec.sf(z[finite]), s[finite], rtol=1e-9)
    if spec.family is Family.EXPPOWERLAW:
        # ln z = (beta / -ln(1 - s))**(1/alpha)
        expected = (spec.beta / -np.log1p(-s)) ** (1 / spec.alpha)
        np.testing.assert_allclose(spec.log_isf(s), expected, rtol=1e-12)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_cdf_monotone(spec):
    x = spec.quantile(np.linspace(0.0 if spec.family is Family.PARETO else 1e-6, 0.9999, 500))
    assert np.all(np.diff(spec.cdf(x)) >= 0)


def test_quantile_domain():
    spec = DistSpec.pareto(1.0)
    with pytest.raises(DomainError):
        spec.quantile(1.0)
    with pytest.raises(DomainError):
        spec.isf(0.0)
    with pytest.raises(DomainError):
        spec.cdf(0.5)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_sample_ks(spec):
    s = sample(spec, 100_000, RandomSource(11).named(str(spec)))
    if spec.family is Family.EXPPOWERLAW:
        ref = stats.invweibull(c=spec.alpha, scale=spec.beta ** (1 / spec.alpha))
        d = stats.kstest(s.log_values, ref.cdf).statistic
    else:
        d = stats.kstest(s.values, scipy_ref(spec).cdf).statistic
    assert d < 0.01


def test_sample_deterministic():
    spec = DistSpec.frechet(2.0)
    a = sample(spec, 1000, RandomSource(5, 3))
    b = sample(spec, 1000, RandomSource(5, 3))
    c = sample(spec, 1000, RandomSource(5, 4))
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert (a.seed, a.stream, a.n) == (5, 3, 1000)


def test_exp_powerlaw_overflow_keeps_logs():
    s = sample(DistSpec.exp_powerlaw(0.5, 1.0), 20_000, RandomSource(1))
    assert np.all(np.isfinite(s.log_values))
    assert np.isinf(s.values).any()
    finite = np.isfinite(s.values)
    np.testing.assert_allclose(np.log(s.values[finite]), s.log_values[finite], rtol=1e-12)


def test_open_uniform_strictly_inside(gen):
    u = open_uniform(gen, 100_000)
    assert u.min() > 0 and u.max() < 1


def test_log2_sample_is_exponent():
    rng = RandomSource(9)
    arr = log2_sample(DistSpec.pareto(1.0), 50, rng)
    np.testing.assert_array_equal(arr.log2, sample(DistSpec.pareto(1.0), 50, rng).values)
    arr10 = log2_sample(DistSpec.pareto(1.0), 50, rng, base=10.0)
    np.testing.assert_allclose(arr10.log2, arr.log2 * math.log2(10), rtol=1e-14)
    with pytest.raises(ConfigError):
        log2_sample(DistSpec.lognormal(), 5, rng)


def test_parse_and_str_round_trip():
    spec = DistSpec.parse("family=pareto alpha=2.0")
    assert spec == DistSpec.pareto(2.0)
    assert DistSpec.parse(str(spec)) == spec
    assert DistSpec.parse("family=exppowerlaw alpha=2 beta=0.5").beta == 0.5
    assert DistSpec.parse("family=lognormal").sigma == 1.0


@pytest.mark.parametrize("text", [
    "family=pareto alpha=0",
    "family=pareto alpha=-1",
    "family=pareto alpha=nan",
    "family=pareto alpha=inf",
    "family=pareto beta=1",
    "family=gauss",
    "alpha=2",
    "family=pareto alpha",
    "family=lognormal sigma=0",
    "family=exppowerlaw beta=-2",
    "family=pareto alpha=2 alpha=3",
    "family=pareto gamma=1",
])
def test_parse_rejects(text):
    with pytest.raises(ConfigError):
        DistSpec.parse(text)
