import numpy as np
import pytest

import heatlab as hl


@pytest.fixture(scope="session")
def two_vertex():
    return hl.build_two_vertex()


@pytest.fixture(scope="session")
def ring32():
    return hl.build_ring(32)


@pytest.fixture(scope="session")
def ring64():
    return hl.build_ring(64)


@pytest.fixture(scope="session")
def ring256():
    return hl.build_ring(256)


@pytest.fixture(scope="session")
def torus16():
    return hl.build_torus([16, 16])


@pytest.fixture(scope="session")
def torus32():
    return hl.build_torus([32, 32])


@pytest.fixture(scope="session")
def torus64():
    return hl.build_torus([64, 64])


@pytest.fixture(scope="session")
def path40():
    return hl.build_path(40)


@pytest.fixture(scope="session")
def vgauge():
    return hl.ball_volume_gauge()


@pytest.fixture(scope="session")
def builder_suite():
    return {
        "two_vertex": hl.build_two_vertex(),
        "torus16": hl.build_torus([16, 16]),
        "halfline": hl.build_halfline_weighted(64, 1.0),
        "glued": hl.build_glued(1, 2, [32, 8, 8]),
        "vicsek2": hl.build_vicsek(2),
    }


def random_function(space, rng):
    return rng.standard_normal(space.n)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
