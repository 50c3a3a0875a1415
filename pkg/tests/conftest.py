import numpy as np
import pytest

from curvefold import curves
from curvefold.foldsim import sweep_to_halt
from curvefold.geometry import partition_uniform
from curvefold.ortho import OrthoDesignSpec, build_ortho_pattern
from curvefold.parallel import ParallelDesignSpec, build_pattern

RHO4 = 5 * np.pi / 6
THETA5 = np.deg2rad(73.0)
THETA7 = np.deg2rad(30.0)


@pytest.fixture(scope="session")
def fig4_partition():
    return partition_uniform(curves.space_arc(), 9)


@pytest.fixture(scope="session")
def fig5_design():
    spec = ParallelDesignSpec(datum=curves.space_arc(), target=curves.exp_curve(),
                              n_row=9, n_col=9, rho4=RHO4, theta=THETA5, eps=0.4)
    return build_pattern(spec)


@pytest.fixture(scope="session")
def fig5_halt(fig5_design):
    pattern, _ = fig5_design
    return sweep_to_halt(pattern, samples=8)


@pytest.fixture(scope="session")
def fig7_design():
    spec = OrthoDesignSpec(datum=curves.sine_curve(), target=curves.t_minus_ln(),
                           n=9, m=9, theta=THETA7, eps=0.2)
    return build_ortho_pattern(spec)


@pytest.fixture(scope="session")
def fig7_halt(fig7_design):
    pattern, _ = fig7_design
    return sweep_to_halt(pattern, samples=8)


@pytest.fixture(scope="session")
def small_parallel():
    """Fast 4x3 design for simulator unit tests."""
    spec = ParallelDesignSpec(datum=curves.space_arc(129), target=curves.exp_curve(129),
                              n_row=4, n_col=3, rho4=RHO4, theta=THETA5, eps=1.0)
    return build_pattern(spec)
