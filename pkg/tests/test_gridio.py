import numpy as np
import pytest

from lqglab.domains import BoundaryCondition, Shape
from lqglab.errors import InputError
from lqglab.gff import sample_gff
from lqglab.gridio import (
    domain_from_config,
    dump_config,
    field_csv_rows,
    measure_csv_rows,
    parse_config_text,
    read_config,
    read_csv,
    read_field_values,
    read_measure_values,
    write_csv,
    write_field,
    write_measure,
)
from lqglab.measures import build_liouville_measure


def test_field_binary_round_trip(tmp_path, disk32):
    f = sample_gff(disk32, seed=1)
    p = tmp_path / "f.lqgf"
    write_field(p, f)
    values, gamma = read_field_values(p)
    assert np.array_equal(values, f.values)
    assert gamma is None


def test_measure_binary_round_trip(tmp_path, disk32):
    f = sample_gff(disk32, seed=2)
    mu = build_liouville_measure(f, 0.75, 0.125)
    p = tmp_path / "m.lqgm"
    write_measure(p, mu)
    mass, gamma, eps = read_measure_values(p)
    assert np.array_equal(mass, mu.mass)
    assert gamma == 0.75 and eps == 0.125


def test_magic_mismatch(tmp_path, disk32):
    f = sample_gff(disk32, seed=3)
    p = tmp_path / "f.lqgf"
    write_field(p, f)
    with pytest.raises(InputError):
        read_measure_values(p)
    with pytest.raises(InputError):
        read_field_values(__file__)


def test_csv_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    rows = [(1, 0.1, "a"), (2, 2.0**-53, "b")]
    write_csv(p, ["i", "x", "tag"], rows)
    header, back = read_csv(p)
    assert header == ["i", "x", "tag"]
    assert float(back[1][1]) == 2.0**-53  # floats survive exactly via repr


def test_field_and_measure_csv_rows(disk32):
    f = sample_gff(disk32, seed=4)
    rows = list(field_csv_rows(f))
    assert len(rows) == f.values.size
    i, j, x, y, v = rows[0]
    assert (i, j) == (0, 0) and v == f.values[0, 0]
    mu = build_liouville_measure(f, 0.5, 0.125)
    mrows = list(measure_csv_rows(mu))
    assert len(mrows) == mu.mass.size


def test_config_parse_and_dump(tmp_path):
    text = "a = 1\n# comment\nb= two # trailing\n\nc =3\n"
    vals = parse_config_text(text)
    assert vals == {"a": "1", "b": "two", "c": "3"}
    assert parse_config_text(dump_config(vals)) == vals
    p = tmp_path / "c.txt"
    p.write_text(text)
    assert read_config(p) == vals


def test_config_errors(tmp_path):
    with pytest.raises(InputError):
        parse_config_text("just words\n")
    with pytest.raises(InputError):
        read_config(tmp_path / "missing.txt")


def test_domain_from_config():
    d = domain_from_config("disk", 64)
    assert d.shape is Shape.UNIT_DISK
    assert d.boundary_condition is BoundaryCondition.DIRICHLET
    u = domain_from_config("upper-disk", 64)
    assert u.boundary_condition is BoundaryCondition.MIXED
    with pytest.raises(InputError):
        domain_from_config("torus", 64)
    with pytest.raises(InputError):
        domain_from_config("disk", 64, boundary="periodic")
