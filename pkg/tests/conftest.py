import numpy as np
import pytest

from amalgam import FilteredSpace, from_terminal


@pytest.fixture
def dyadic2():
    """Uniform depth-2 dyadic space with the two level-1 cells as blocks."""
    return FilteredSpace(
        ["w1", "w2", "w3", "w4"],
        [0.25, 0.25, 0.25, 0.25],
        [
            [["w1", "w2", "w3", "w4"]],
            [["w1", "w2"], ["w3", "w4"]],
            [["w1"], ["w2"], ["w3"], ["w4"]],
        ],
        [["w1", "w2"], ["w3", "w4"]],
    )


@pytest.fixture
def worked_example(dyadic2):
    """The hand-checked martingale with terminal (2, 0, -1, -1)."""
    return dyadic2, from_terminal(dyadic2, [2.0, 0.0, -1.0, -1.0])


@pytest.fixture
def coin():
    """Single fair-coin step: two outcomes, one split."""
    space = FilteredSpace(
        ["h", "t"],
        [0.5, 0.5],
        [[["h", "t"]], [["h"], ["t"]]],
        [["h", "t"]],
    )
    return space, from_terminal(space, [1.0, -1.0])


def random_tree_space(rng, depth, branching=2, n_blocks=1):
    """Random refining tree with random positive masses and random blocks."""
    ids = [("r",)]
    weights = np.array([1.0])
    levels = [[list(ids[0])]]
    for n in range(depth):
        new_ids, new_w = [], []
        for path, w in zip(ids, weights):
            k = int(rng.integers(2, branching + 1)) if branching > 1 else 1
            parts = rng.dirichlet(np.ones(k) * 3.0)
            for j in range(k):
                new_ids.append(path + (j,))
                new_w.append(w * parts[j])
        ids, weights = new_ids, np.array(new_w)
    outcomes = ["o" + "".join(str(x) for x in path[1:]) for path in ids]
    weights = weights / weights.sum()
    filtration = []
    for n in range(depth + 1):
        groups = {}
        for i, path in enumerate(ids):
            groups.setdefault(path[: n + 1], []).append(outcomes[i])
        filtration.append(list(groups.values()))
    if n_blocks <= 1:
        blocks = [outcomes]
    else:
        j = min(n_blocks, len(outcomes))
        labels = rng.integers(0, j, size=len(outcomes))
        labels[rng.permutation(len(outcomes))[:j]] = np.arange(j)
        blocks = [
            [outcomes[i] for i in np.flatnonzero(labels == b)] for b in range(j)
        ]
    return FilteredSpace(outcomes, weights, filtration, blocks)


def random_martingale(rng, space):
    x = rng.standard_normal(space.size)
    x -= float(space.prob @ x)
    return from_terminal(space, x)
