import numpy as np
import pytest

from lqglab.domains import (
    BoundaryCondition,
    DomainSpec,
    Shape,
    bilinear_sample,
    is_dyadic,
    is_power_of_two,
)
from lqglab.errors import ConfigurationError, DomainError


def test_power_of_two():
    assert is_power_of_two(8)
    assert is_power_of_two(512)
    assert not is_power_of_two(12)
    assert not is_power_of_two(0)


def test_dyadic():
    assert is_dyadic(0.5)
    assert is_dyadic(2.0**-9)
    assert is_dyadic(1.0)
    assert not is_dyadic(4.0)  # scales above 1 are not admitted
    assert not is_dyadic(0.3)
    assert not is_dyadic(0.75)


def test_resolution_validation():
    with pytest.raises(ConfigurationError):
        DomainSpec(Shape.UNIT_SQUARE, 12, BoundaryCondition.DIRICHLET)
    with pytest.raises(ConfigurationError):
        DomainSpec(Shape.UNIT_SQUARE, 4, BoundaryCondition.DIRICHLET)


def test_mixed_only_on_upper_disk():
    with pytest.raises(ConfigurationError):
        DomainSpec(Shape.UNIT_DISK, 16, BoundaryCondition.MIXED)
    DomainSpec(Shape.UPPER_UNIT_DISK, 16, BoundaryCondition.MIXED)


def test_square_geometry(square16):
    assert square16.node_shape == (17, 17)
    assert square16.cell_shape == (16, 16)
    assert square16.spacing == 1 / 16
    X, Y = square16.node_coords()
    assert X[0, 0] == 0.0 and X[-1, -1] == 1.0
    mask = square16.interior_mask()
    assert not mask[0].any() and not mask[-1].any()
    assert mask[1:-1, 1:-1].all()


def test_disk_geometry(disk32):
    assert disk32.node_shape == (65, 65)
    mask = disk32.interior_mask()
    X, Y = disk32.node_coords()
    assert np.array_equal(mask, X**2 + Y**2 < 1)
    # area of the cell mask approximates pi
    assert abs(disk32.cell_mask().sum() * disk32.cell_area - np.pi) < 0.15


def test_upper_disk_mixed_mask(upper64):
    mask = upper64.interior_mask()
    X, Y = upper64.node_coords()
    # diameter nodes (y == 0) are included under the mixed condition
    on_diameter = (Y == 0) & (X**2 + Y**2 < 1)
    assert mask[on_diameter].all()


def test_contains_and_bilinear(disk32):
    assert disk32.contains(0.0, 0.0)
    assert not disk32.contains(1.5, 0.0)
    values = np.ones(disk32.node_shape)
    assert bilinear_sample(values, disk32, 0.3, -0.2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        bilinear_sample(values, disk32, 5.0, 0.0)
