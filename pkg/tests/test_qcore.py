import mpmath
import pytest
from mpmath import mpf

from qzeros import (DomainError, PrecisionContext, qpoch_finite, qpoch_infinite, qpoch_multi,
                    rising_factorial)


def test_qpoch_finite_examples():
    assert qpoch_finite(0.7, 0.3, 0) == 1
    assert qpoch_finite(0.5, 0.5, 2) == mpf("0.375")
    assert qpoch_finite(1, 0.9, 3) == 0


def test_qpoch_finite_rejects_negative_n():
    with pytest.raises(DomainError):
        qpoch_finite(0.5, 0.5, -1)


def test_qpoch_finite_accepts_large_base():
    # finite products are total in q; (2; 3)_2 = (1-2)(1-6)
    assert qpoch_finite(2, 3, 2) == 5


def test_qpoch_infinite_trivial():
    assert qpoch_infinite(0, 0.5) == (1, 0)


def test_qpoch_infinite_against_direct_product(oracle, ctx):
    value, tail = qpoch_infinite(0.5, 0.5, ctx)
    with mpmath.workprec(512):
        expected = mpf(oracle["qpoch_inf_half_half"])
        assert abs(mpmath.log(value / expected)) <= tail + mpf(2) ** -250
    assert tail <= ctx.eps_id


def test_qpoch_infinite_domain():
    with pytest.raises(DomainError):
        qpoch_infinite(0.3, 1.1)
    with pytest.raises(DomainError):
        qpoch_infinite(0.3, 0)


def test_qpoch_multi_examples():
    assert qpoch_multi([], 0.5, 7) == 1
    assert qpoch_multi([0.5, 0.5], 0.5, 2) == mpf("0.140625")
    assert qpoch_multi([1, 0.5], 0.5, 1) == 0


def test_rising_factorial_examples():
    assert rising_factorial(3.5, 0) == 1
    assert rising_factorial(1, 4) == 24
    assert rising_factorial(0.5, 2) == mpf("0.75")


def test_precision_context_guards():
    with pytest.raises(DomainError):
        PrecisionContext(32)
    with pytest.raises(DomainError):
        PrecisionContext(256, eps_id=mpf(2) ** -10, eps_real=mpf(2) ** -20)
    ctx = PrecisionContext(256)
    assert ctx.eps_id == mpf(2) ** -128
    assert ctx.eps_real == mpf(2) ** -64
    assert ctx.doubled().bits == 512
