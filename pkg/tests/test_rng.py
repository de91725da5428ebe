import numpy as np
import pytest

from extremal.rng import RandomSource, chunk_sizes, map_chunks


def test_same_pair_same_draws():
    a = RandomSource(42, 7).generator().random(10)
    b = RandomSource(42, 7).generator().random(10)
    np.testing.assert_array_equal(a, b)


def test_streams_differ():
    base = RandomSource(42)
    draws = {tuple(base.spawn(i).generator().random(4)) for i in range(100)}
    assert len(draws) == 100
    assert base.named("a") != base.named("b")
    assert base.named("a") == RandomSource(42).named("a")


def test_streams_uncorrelated():
    x = RandomSource(1).spawn(0).generator().random(100_000)
    y = RandomSource(1).spawn(1).generator().random(100_000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.02


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, "3"])
def test_rejects_bad_seed(seed):
    with pytest.raises(ValueError):
        RandomSource(seed)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    assert chunk_sizes(0, 4) == []


def test_map_chunks_thread_independent():
    fn = lambda size, gen: gen.standard_normal(size)
    one = np.concatenate(map_chunks(fn, 10_001, RandomSource(3), chunk=997, threads=1))
    four = np.concatenate(map_chunks(fn, 10_001, RandomSource(3), chunk=997, threads=4))
    np.testing.assert_array_equal(one, four)
    assert one.size == 10_001
