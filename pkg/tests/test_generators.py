import numpy as np
import pytest

from tave.generators import (
    cd_construct,
    max_residual,
    planted_sym_nonneg,
    rng_for,
    shifted_m,
    type1_starts,
    type2_start,
)
from tave.model import STRONG_M, certify_strong_m_shift


def test_streams_are_independent_and_reproducible():
    a = rng_for(0, 0).standard_normal(5)
    assert np.array_equal(a, rng_for(0, 0).standard_normal(5))
    assert not np.array_equal(a, rng_for(0, 1).standard_normal(5))
    assert not np.array_equal(a, rng_for(0, 0, 1).standard_normal(5))


def test_seed_required():
    with pytest.raises(ValueError):
        rng_for(None, 0)
    with pytest.raises(ValueError):
        rng_for(-1, 0)


def test_planted_instance_is_solvable():
    P, x = planted_sym_nonneg(6, 8, rng_for(4, 0))
    assert max_residual(P, x) <= 1e-9
    assert P.A.is_nonnegative() and P.A.is_symmetric
    assert np.all((0 <= x) & (x <= 1))


def test_shifted_is_certified():
    for s in range(5):
        A, c = shifted_m(4, 4, rng_for(s, 0), 0.01)
        assert certify_strong_m_shift(A).verdict == STRONG_M


def test_cd_construct():
    P, x, C, D, z = cd_construct(4, 10, rng_for(2, 0))
    assert max_residual(P, x) <= 1e-9
    assert np.array_equal(np.abs(x), z)


def test_start_distributions():
    rng = rng_for(0, 1)
    starts = np.array(type1_starts(3, 4000, rng))
    assert abs(starts.mean()) < 0.05 and abs(starts.std() - 1) < 0.05
    x = np.full(5000, 2.0)
    y = type2_start(x, rng_for(0, 2))
    assert np.all(np.abs(y - x) < 0.3)
    assert np.max(y - x) > 0.29 and np.min(y - x) < -0.29
