import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xorbench.gf2 import SINGULAR, gf2_eliminate, gf2_rank, matvec, rows_from_clauses
from xorbench.instances import sample_3regular


def test_identity_system():
    rows = [1 << i for i in range(4)]
    rank, x = gf2_eliminate(rows, [1, 0, 1, 1], 4)
    assert rank == 4
    assert x == [1, 0, 1, 1]


def test_duplicate_rows_singular():
    rows = [0b0111, 0b0111, 0b1100, 0b1010]
    rank, sol = gf2_eliminate(rows, [0, 0, 0, 0], 4)
    assert sol == SINGULAR
    assert rank <= 3


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        gf2_eliminate([1, 2], [0, 0, 0], 3)


def test_plant_then_solve_roundtrip():
    graph = sample_3regular(8, rng_seed=7)
    rows = rows_from_clauses(graph.clauses, 8)
    x_star = 0b10110010
    b = matvec(rows, x_star)
    rank, x = gf2_eliminate(rows, b, 8)
    if rank == 8:
        assert sum(x[i] << i for i in range(8)) == x_star
    else:
        assert x == SINGULAR


@given(st.integers(2, 12), st.data())
@settings(max_examples=50, deadline=None)
def test_solution_satisfies_system(m, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    rows = [int(v) for v in rng.integers(0, 1 << m, m)]
    b = [int(v) for v in rng.integers(0, 2, m)]
    rank, sol = gf2_eliminate(rows, b, m)
    assert 0 <= rank <= m
    assert rank == gf2_rank(rows, m)
    if sol != SINGULAR:
        assert rank == m
        x_bits = sum(sol[i] << i for i in range(m))
        assert matvec(rows, x_bits) == b
