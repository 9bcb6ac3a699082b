import numpy as np
import pytest

from g2cal import meshes


@pytest.fixture(scope="session")
def torus6():
    return meshes.build_torus_grid(6)


@pytest.fixture(scope="session")
def ball2():
    return meshes.build_ball_mesh(refinement=2)


@pytest.fixture(scope="session")
def ball3():
    return meshes.build_ball_mesh(refinement=3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def quadratic_field(dom, seed):
    """Random degree-2 polynomial normal field in frame coordinates."""
    r = np.random.default_rng(seed)
    x = dom.nodes[:, :3]
    return (
        r.standard_normal(4)
        + x @ r.standard_normal((3, 4))
        + np.einsum("na,nb,abk->nk", x, x, r.standard_normal((3, 3, 4)))
    )


def smooth_field(dom, seed):
    """Quadratic plus a trigonometric part (not fit-exact)."""
    r = np.random.default_rng(seed)
    x = dom.nodes[:, :3]
    return quadratic_field(dom, seed) + np.sin(x) @ (
        0.5 * r.standard_normal((3, 4))
    )
