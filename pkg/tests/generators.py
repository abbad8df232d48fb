"""Random instance generators shared by the unit and acceptance tests."""
import numpy as np

from maxdiv import from_reflexive_graph, from_taxonomy, validate_similarity


def random_similarity(rng, n):
    """Upper triangle i.i.d. uniform on [0, 1], mirrored, unit diagonal."""
    a = np.triu(rng.uniform(size=(n, n)), 1)
    return validate_similarity(a + a.T + np.eye(n))


def random_graph(rng, n, edge_prob=0.5):
    a = np.triu(rng.uniform(size=(n, n)) < edge_prob, 1)
    return from_reflexive_graph(a | a.T | np.eye(n, dtype=bool))


def random_ultrametric(rng, n, connected=None):
    """Taxonomy matrix: random lineages of depth 1-3 and increasing level
    similarities (rank distance 0 is most similar).  The top level is 0 about
    a third of the time unless ``connected`` forces a choice."""
    depth = int(rng.integers(1, 4))
    levels = np.sort(rng.uniform(0.0, 0.95, size=depth + 1))
    if connected is False or (connected is None and rng.uniform() < 1 / 3):
        levels[0] = 0.0
    lineages = [tuple(int(rng.integers(0, 3)) for _ in range(depth)) for _ in range(n)]
    return from_taxonomy(lineages, levels.tolist())


def random_metric3(rng):
    """Similarity exp(-d) of a random 3-point metric space."""
    d12, d13 = rng.uniform(0.05, 3.0, size=2)
    d23 = rng.uniform(abs(d12 - d13), d12 + d13)
    d = np.array([[0, d12, d13], [d12, 0, d23], [d13, d23, 0]])
    return validate_similarity(np.exp(-d))


def random_block_diagonal(rng, sizes):
    n = sum(sizes)
    a = np.zeros((n, n))
    blocks = []
    start = 0
    for m in sizes:
        Zb = random_similarity(rng, m)
        a[start : start + m, start : start + m] = Zb.entries
        blocks.append((list(range(start, start + m)), Zb))
        start += m
    return validate_similarity(a), blocks


def random_distribution(rng, n, sparse=False):
    p = np.zeros(n)
    if sparse and n > 1:
        k = int(rng.integers(1, n + 1))
        idx = rng.choice(n, size=k, replace=False)
        p[idx] = rng.dirichlet(np.ones(k))
    else:
        p = rng.dirichlet(np.ones(n))
    return p / p.sum()


def closed_form_metric3(Z):
    """Magnitude and maximizing p_1 of a 3x3 similarity matrix, written out
    from the cofactor expressions."""
    z12, z13, z23 = Z[0, 1], Z[0, 2], Z[1, 2]
    det = 1 - (z12**2 + z23**2 + z13**2) + 2 * z12 * z23 * z13
    prod = (1 - z12) * (1 - z23) * (1 - z13)
    mag = 1 + 2 * prod / det
    p1 = (1 - (z12 + z13) + (z13 * z23 + z12 * z23) - z23**2) / (det + 2 * prod)
    return mag, p1
