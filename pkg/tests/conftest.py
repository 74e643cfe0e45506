import numpy as np
import pytest

from lqglab.domains import BoundaryCondition, DomainSpec, Shape


@pytest.fixture
def square16():
    return DomainSpec(Shape.UNIT_SQUARE, 16, BoundaryCondition.DIRICHLET)


@pytest.fixture
def disk32():
    return DomainSpec(Shape.UNIT_DISK, 32, BoundaryCondition.DIRICHLET)


@pytest.fixture
def disk64():
    return DomainSpec(Shape.UNIT_DISK, 64, BoundaryCondition.DIRICHLET)


@pytest.fixture
def upper64():
    return DomainSpec(Shape.UPPER_UNIT_DISK, 64, BoundaryCondition.MIXED)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
