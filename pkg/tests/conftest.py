import pytest

S = None

# 6x3 array worked through in the scheme walk-through
EXAMPLE_3_6_2_3 = [
    [0, 0, S],
    [1, S, 1],
    [S, 2, 2],
    [S, 0, 1],
    [0, S, 2],
    [1, 2, S],
]

# the optimal 7x4 array built from K=4, t=1
EXAMPLE_4_7_1_6 = [
    [0, 0, 5, 5],
    [1, 4, 1, 4],
    [2, 3, 3, 2],
    [S, 0, 1, 2],
    [0, S, 3, 4],
    [1, 3, S, 5],
    [2, 4, 5, S],
]


@pytest.fixture
def grid_3623():
    return [row[:] for row in EXAMPLE_3_6_2_3]


@pytest.fixture
def grid_4716():
    return [row[:] for row in EXAMPLE_4_7_1_6]
