import numpy as np
import pytest

from picplace import geometry
from picplace.geometry import count_crossings

from oracles import brute_crossings


def test_x_configuration():
    total, per = count_crossings([[(0, 0), (10, 10)], [(0, 10), (10, 0)]])
    assert total == 1
    assert list(per) == [1, 1]


def test_parallel_segments():
    assert count_crossings([[(0, 0), (10, 0)], [(0, 5), (10, 5)]])[0] == 0


@pytest.mark.parametrize("segs, expected", [
    ([[(0, 0), (10, 0)], [(10, 0), (20, 5)]], 0),      # shared endpoint
    ([[(0, 0), (10, 0)], [(5, 0), (5, 5)]], 0),        # T junction touches at an endpoint
    ([[(0, 0), (10, 0)], [(5, 0), (15, 0)]], 1),       # collinear overlap
    ([[(0, 0), (10, 0)], [(10, 0), (15, 0)]], 0),      # collinear, touching only
    ([[(3, 3), (3, 3)], [(0, 0), (6, 6)]], 0),         # zero-length segment
])
def test_counting_rules(segs, expected):
    assert count_crossings(segs)[0] == expected


def test_fewer_than_two_segments():
    assert count_crossings(np.zeros((0, 2, 2)))[0] == 0
    assert count_crossings([[(0, 0), (1, 1)]])[0] == 0


def random_segments(rng, n):
    """Mixed set: continuous segments plus integer-lattice ones that hit the degenerate cases."""
    a = rng.uniform(0, 100, (n, 2, 2))
    k = n // 3
    a[:k] = rng.integers(0, 6, (k, 2, 2))
    return a


def test_matches_brute_force_oracle(rng):
    for _ in range(500):
        segs = random_segments(rng, int(rng.integers(2, 30)))
        total, per = count_crossings(segs)
        ref_total, ref_per = brute_crossings(segs)
        assert total == ref_total
        assert list(per) == ref_per


def test_per_segment_sums_to_twice_total(rng):
    segs = random_segments(rng, 60)
    total, per = count_crossings(segs)
    assert per.sum() == 2 * total


def test_sweep_agrees_with_pairwise(rng, monkeypatch):
    segs = rng.uniform(0, 1000, (400, 2, 2))
    segs[:, 1] = segs[:, 0] + rng.uniform(-60, 60, (400, 2))
    t_brute, p_brute = count_crossings(segs)
    monkeypatch.setattr(geometry, "BRUTE_FORCE_LIMIT", 10)
    t_sweep, p_sweep = count_crossings(segs)
    assert t_brute == t_sweep > 0
    assert np.array_equal(p_brute, p_sweep)
