import numpy as np
import pytest

from latzeta import kernels, walks


@pytest.fixture(scope="session")
def lsrw_series_5000():
    """Exact LSRW return series to t = 5000, shared by the expensive checks."""
    return kernels.evolve_full(walks.builtin_walk("lsrw"), (0, 0), 5000)


def enumeration_return_series(walk, t_max):
    """Brute-force oracle: exact distribution of the walk position by direct
    convolution over a dict, independent of the array evolution code."""
    dist = walk.one_step_distribution()
    field = {(0, 0): 1.0}
    values = [1.0]
    for _ in range(t_max):
        new = {}
        for (x, y), mass in field.items():
            for (dx, dy), p in dist.items():
                key = (x + dx, y + dy)
                new[key] = new.get(key, 0.0) + mass * p
        field = new
        values.append(field.get((0, 0), 0.0))
    return np.array(values)


def separable_square_eigenvalues(name, radius):
    """Analytic Dirichlet spectrum on {1..R}^2 for walks whose transition is
    a polynomial in the two path-graph shifts (tensor structure oracle)."""
    theta = np.arange(1, radius + 1) * np.pi / (radius + 1)
    mu = 2.0 * np.cos(theta)
    mj, mk = np.meshgrid(mu, mu, indexing="ij")
    if name == "lsrw":
        lam = 0.5 * (1.0 - (mj + mk) / 4.0)
    elif name == "srw":
        lam = 1.0 - (mj + mk) / 4.0
    elif name == "king":
        lam = 1.0 - (mj + mk + mj * mk) / 8.0
    else:
        raise ValueError(name)
    return np.sort(lam.ravel())
