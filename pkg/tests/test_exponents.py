import pytest

from lqglab.errors import DomainError, ParameterError
from lqglab.exponents import kpz_exponents


def test_x_zero_gives_delta_zero():
    for gamma in (0.3, 1.0, 1.8):
        t = kpz_exponents(gamma, x=0.0)
        assert t.delta == pytest.approx(0.0, abs=1e-14)
        assert t.hat_gamma == pytest.approx(gamma)


def test_delta_one_gives_x_one():
    for gamma in (0.5, 1.5):
        t = kpz_exponents(gamma, delta=1.0)
        assert t.x == pytest.approx(1.0)
        assert t.hat_gamma == pytest.approx(0.0)


def test_sqrt2_example():
    t = kpz_exponents(2.0**0.5, delta=0.5)
    assert t.x == pytest.approx(3.0 / 8.0)


def test_q_constant():
    t = kpz_exponents(1.0, delta=0.25)
    assert t.q_constant == pytest.approx(0.5 + 2.0)


def test_round_trip():
    for gamma in (0.4, 1.0, 1.9):
        for delta in (0.0, 0.25, 0.5, 1.0):
            x = kpz_exponents(gamma, delta=delta).x
            back = kpz_exponents(gamma, x=x)
            assert back.delta == pytest.approx(delta, abs=1e-10)
            # internal consistency of the quadratic to 1e-12
            a = gamma**2 / 4
            assert a * back.delta**2 + (1 - a) * back.delta == pytest.approx(
                back.x, abs=1e-12
            )


def test_errors():
    with pytest.raises(ParameterError):
        kpz_exponents(2.0, x=0.5)
    with pytest.raises(ParameterError):
        kpz_exponents(1.0)
    with pytest.raises(ParameterError):
        kpz_exponents(1.0, x=0.1, delta=0.1)
    with pytest.raises(DomainError):
        kpz_exponents(1.0, x=-0.5)
