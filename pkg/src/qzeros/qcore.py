"""Working-precision context and q-Pochhammer primitives.

Every numeric routine in the package takes a :class:`PrecisionContext` and
runs inside ``ctx.workprec()``.  Values are mpmath ``mpf``/``mpc`` numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import mpmath
from mpmath import mpf

from .errors import DomainError

DEFAULT_BITS = 256


def _default_eps_id(bits):
    return mpmath.ldexp(mpf(1), -(bits // 2))


def _default_eps_real(bits):
    return mpmath.ldexp(mpf(1), -(bits // 4))


@dataclass(frozen=True)
class PrecisionContext:
    """Mantissa precision plus the two tolerances derived from it.

    ``eps_id`` bounds identity residuals and truncation tails, ``eps_real``
    is the relative imaginary-part threshold used when calling a zero real.
    """

    bits: int = DEFAULT_BITS
    eps_id: mpf = field(default=None)
    eps_real: mpf = field(default=None)

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 64:
            raise DomainError(f"precision must be an integer >= 64 bits, got {self.bits}")
        if self.eps_id is None:
            object.__setattr__(self, "eps_id", _default_eps_id(self.bits))
        if self.eps_real is None:
            object.__setattr__(self, "eps_real", _default_eps_real(self.bits))
        object.__setattr__(self, "eps_id", mpf(self.eps_id))
        object.__setattr__(self, "eps_real", mpf(self.eps_real))
        if not (0 < self.eps_id < self.eps_real < 1):
            raise DomainError("tolerances must satisfy 0 < eps_id < eps_real < 1")

    def workprec(self):
        return mpmath.workprec(self.bits)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.bits)


def as_context(ctx) -> PrecisionContext:
    if ctx is None:
        return PrecisionContext()
    if isinstance(ctx, PrecisionContext):
        return ctx
    return PrecisionContext(int(ctx))


def num(x):
    """Convert an int/float/str/mpmath number at the current precision."""
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return +x
    if isinstance(x, complex):
        return mpmath.mpc(x)
    if isinstance(x, str):
        s = x.strip().replace(" ", "")
        if s.endswith(("j", "i")):
            return mpmath.mpc(complex(s[:-1] + "j"))
        return mpf(s)
    return mpmath.mpmathify(x)


def qpoch_finite(a, q, n: int):
    """``(a; q)_n = prod_{k<n} (1 - a q^k)``; the empty product is 1.

    Any real ``q`` is accepted (the finite product is total), which the
    inversion-symmetry checks rely on for ``q > 1``.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    a = num(a)
    q = num(q)
    out = mpf(1)
    qk = mpf(1)
    for _ in range(n):
        out *= 1 - a * qk
        qk *= q
    return out


def qpoch_multi(as_: Iterable, q, n: int):
    """``(a_1, ..., a_m; q)_n``; an empty parameter list gives 1."""
    out = mpf(1)
    for a in as_:
        out *= qpoch_finite(a, q, n)
    return out


def qpoch_infinite(a, q, ctx=None, tol=None):
    """Infinite product ``(a; q)_inf`` with a certified tail bound.

    Returns ``(value, tail)`` where ``|log(true/value)| <= tail``.  The
    product stops at the first ``K`` with ``|a| q^(K+1) / (1-q) < tol`` and
    ``|a| q^(K+1) < 1/2``; then ``|log(1 - x)| <= 2|x|`` bounds the rest.
    """
    ctx = as_context(ctx)
    with ctx.workprec():
        a = num(a)
        q = num(q)
        if not (0 < q < 1):
            raise DomainError(f"(a;q)_inf needs 0 < q < 1, got q={q}")
        tol = ctx.eps_id if tol is None else mpf(tol)
        absa = abs(a)
        if absa == 0:
            return mpf(1), mpf(0)
        out = mpf(1)
        qk = mpf(1)
        one_minus_q = 1 - q
        while True:
            out *= 1 - a * qk
            qk *= q
            rest = absa * qk
            if rest < mpf(0.5) and rest / one_minus_q < tol:
                return out, 2 * rest / one_minus_q


def rising_factorial(a, n: int):
    """Pochhammer's rising factorial ``(a)_n = a (a+1) ... (a+n-1)``."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    a = num(a)
    out = mpf(1)
    for k in range(n):
        out *= a + k
    return out
