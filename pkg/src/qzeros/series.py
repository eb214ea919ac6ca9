"""Series families, coefficient generation and certified evaluation.

Each family is a frozen dataclass that knows two things about its
coefficients ``c_k``:

* ``ratio(k)`` -- the exact term ratio ``c_{k+1} / c_k``;
* ``ratio_sup(k)`` -- an upper bound for ``|c_{j+1} / c_j|`` over all
  ``j >= k``, built factor by factor from monotone bounds.

Coefficients always come from the multiplicative recurrence, never from
re-evaluating Pochhammer symbols per term.  ``c_0 = 1`` for every family.

The q-Bessel families are even in ``z``; their coefficients are stored in
the variable ``x = z**2`` and :meth:`SeriesSpec.variable` does the mapping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import mpmath
from mpmath import mpf

from .errors import DomainError, NonConvergenceError
from .qcore import PrecisionContext, as_context, num

N_MAX = 10_000
INF = mpmath.inf


def _check_base(q, what="q"):
    q = num(q)
    if isinstance(q, mpmath.mpc) or not (0 < q < 1):
        raise DomainError(f"{what} must lie in (0, 1), got {q}")
    return q


def _pos_int(n, what):
    if int(n) != n or n < 0:
        raise DomainError(f"{what} must be a nonnegative integer, got {n}")
    return int(n)


def _tuple(x):
    if x is None:
        return ()
    return tuple(tuple(t) if isinstance(t, list) else t for t in x)


@dataclass(frozen=True)
class SeriesSpec:
    """Base class; subclasses set ``family`` and the ratio methods."""

    family: ClassVar[str] = ""

    def __post_init__(self):
        with mpmath.workprec(64):
            self.validate()

    def validate(self):
        pass

    @property
    def degree(self):
        """Polynomial degree for terminating families, else ``None``."""
        return None

    @property
    def terminating(self) -> bool:
        return self.degree is not None

    def variable(self, z):
        return z

    def ratio(self, k):
        raise NotImplementedError

    def ratio_sup(self, k):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"family": self.family, "params": self.params()}


def _s(x):
    return x if isinstance(x, (int, str)) else repr(x) if isinstance(x, float) else str(x)


@dataclass(frozen=True)
class RamanujanA(SeriesSpec):
    """``A_q^(alpha)(a; z) = sum (a;q)_k q^(alpha k^2) z^k / (q;q)_k``.

    Give ``n`` instead of ``a`` for the terminating case ``a = q^(-n)``;
    the vanishing factor at ``k = n`` is then exact.
    """

    family: ClassVar[str] = "ramanujan-a"
    alpha: Any = 1
    q: Any = 0.5
    a: Any = None
    n: Any = None

    def validate(self):
        _check_base(self.q)
        if num(self.alpha) < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if (self.a is None) == (self.n is None):
            raise DomainError("give exactly one of a or n (a = q^-n)")
        if self.n is not None:
            _pos_int(self.n, "n")

    @property
    def degree(self):
        return None if self.n is None else int(self.n)

    def _shift(self, k):
        q = num(self.q)
        if self.n is not None:
            return q ** (k - int(self.n))
        return num(self.a) * q**k

    def ratio(self, k):
        q = num(self.q)
        if self.n is not None and k == int(self.n):
            return mpf(0)
        return (1 - self._shift(k)) * q ** (num(self.alpha) * (2 * k + 1)) / (1 - q ** (k + 1))

    def ratio_sup(self, k):
        q = num(self.q)
        return (1 + abs(self._shift(k))) * q ** (num(self.alpha) * (2 * k + 1)) / (1 - q ** (k + 1))

    def params(self):
        p = {"alpha": _s(self.alpha), "q": _s(self.q)}
        if self.n is not None:
            p["n"] = int(self.n)
        else:
            p["a"] = _s(self.a)
        return p


@dataclass(frozen=True)
class GeneralizedQ(SeriesSpec):
    """Products of q-binomial-type factors times ``q^(alpha k^2)``.

    ``orders``        pairs ``(n_j, q_j)``: factor ``(q_j^-n_j; q_j)_k / (q_j; q_j)_k``,
                      and the variable is twisted to ``(-1)^m x`` (polynomial case).
    ``shifts``        pairs ``(a_j, q_j)``: factor ``(-a_j; q_j)_k / (q_j; q_j)_k``.
    ``denominators``  pairs ``(beta_r, q_r)``: divide by ``(q_r, q_r^beta_r; q_r)_k``.
    """

    family: ClassVar[str] = "generalized-q"
    alpha: Any = 1
    q: Any = 0.5
    orders: tuple = ()
    shifts: tuple = ()
    denominators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "orders", _tuple(self.orders))
        object.__setattr__(self, "shifts", _tuple(self.shifts))
        object.__setattr__(self, "denominators", _tuple(self.denominators))
        super().__post_init__()

    def validate(self):
        _check_base(self.q)
        if num(self.alpha) < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if self.orders and self.shifts:
            raise DomainError("orders (terminating) and shifts cannot be mixed")
        for n, qj in self.orders:
            _pos_int(n, "order n_j")
            _check_base(qj, "q_j")
        for _, qj in self.shifts:
            _check_base(qj, "q_j")
        for beta, qr in self.denominators:
            _check_base(qr, "q_r")
            if num(beta) <= 0:
                raise DomainError(f"beta_r must be > 0, got {beta}")

    @property
    def m(self):
        return len(self.orders) or len(self.shifts)

    @property
    def ell(self):
        return len(self.denominators)

    @property
    def degree(self):
        return min(int(n) for n, _ in self.orders) if self.orders else None

    def common_base(self):
        bases = {num(self.q)} | {num(b) for _, b in self.orders + self.shifts + self.denominators}
        return bases.pop() if len(bases) == 1 else None

    def ratio(self, k):
        out = num(self.q) ** (num(self.alpha) * (2 * k + 1))
        for n, qj in self.orders:
            n = int(n)
            if k == n:
                return mpf(0)
            qj = num(qj)
            out *= -(1 - qj ** (k - n)) / (1 - qj ** (k + 1))
        for a, qj in self.shifts:
            qj = num(qj)
            out *= (1 + num(a) * qj**k) / (1 - qj ** (k + 1))
        for beta, qr in self.denominators:
            qr = num(qr)
            out /= (1 - qr ** (k + 1)) * (1 - qr ** (num(beta) + k))
        return out

    def ratio_sup(self, k):
        out = num(self.q) ** (num(self.alpha) * (2 * k + 1))
        for n, qj in self.orders:
            qj = num(qj)
            out *= (1 + qj ** (k - int(n))) / (1 - qj ** (k + 1))
        for a, qj in self.shifts:
            qj = num(qj)
            out *= (1 + abs(num(a)) * qj**k) / (1 - qj ** (k + 1))
        for beta, qr in self.denominators:
            qr = num(qr)
            out /= (1 - qr ** (k + 1)) * (1 - qr ** (num(beta) + k))
        return out

    def params(self):
        return {
            "alpha": _s(self.alpha),
            "q": _s(self.q),
            "orders": [[int(n), _s(qj)] for n, qj in self.orders],
            "shifts": [[_s(a), _s(qj)] for a, qj in self.shifts],
            "denominators": [[_s(b), _s(qr)] for b, qr in self.denominators],
        }


@dataclass(frozen=True)
class LimitPoly(SeriesSpec):
    """``sum prod(-n_j)_k / prod(beta_r)_k * ((-1)^m x)^k / (k!)^(m+l)``."""

    family: ClassVar[str] = "limit-poly"
    orders: tuple = (1,)
    betas: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(self.orders))
        object.__setattr__(self, "betas", tuple(self.betas))
        super().__post_init__()

    def validate(self):
        if not self.orders:
            raise DomainError("limit-poly needs at least one order n_j (m >= 1)")
        for n in self.orders:
            if _pos_int(n, "order n_j") < 1:
                raise DomainError("orders must be >= 1")
        for b in self.betas:
            if num(b) <= 0:
                raise DomainError(f"beta_r must be > 0, got {b}")

    @property
    def degree(self):
        return min(int(n) for n in self.orders)

    def ratio(self, k):
        m, ell = len(self.orders), len(self.betas)
        out = mpf(-1) ** m / mpf(k + 1) ** (m + ell)
        for n in self.orders:
            out *= k - int(n)
        for b in self.betas:
            out /= num(b) + k
        return out

    def ratio_sup(self, k):
        m, ell = len(self.orders), len(self.betas)
        out = 1 / mpf(k + 1) ** ell
        for n in self.orders:
            out *= 1 + mpf(int(n)) / (k + 1)
        for b in self.betas:
            out /= num(b) + k
        return out

    def params(self):
        return {"orders": [int(n) for n in self.orders], "betas": [_s(b) for b in self.betas]}


@dataclass(frozen=True)
class LimitEntire(SeriesSpec):
    """``sum z^k / ((k!)^(m+l) prod_r (beta_r)_k)`` with ``l = len(betas)``."""

    family: ClassVar[str] = "limit-entire"
    m: int = 0
    betas: tuple = (1,)

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(self.betas))
        super().__post_init__()

    def validate(self):
        _pos_int(self.m, "m")
        if not self.betas:
            raise DomainError("limit-entire needs l >= 1 (at least one beta)")
        for b in self.betas:
            if num(b) <= 0:
                raise DomainError(f"beta_r must be > 0, got {b}")

    @property
    def ell(self):
        return len(self.betas)

    def ratio(self, k):
        out = 1 / mpf(k + 1) ** (int(self.m) + self.ell)
        for b in self.betas:
            out /= num(b) + k
        return out

    ratio_sup = ratio  # every factor decreases in k

    def log_abs_coefficient(self, k):
        """``log c_k`` accumulated exactly through log-gamma."""
        out = -(int(self.m) + self.ell) * mpmath.loggamma(k + 1)
        for b in self.betas:
            b = num(b)
            out -= mpmath.loggamma(b + k) - mpmath.loggamma(b)
        return out

    def params(self):
        return {"m": int(self.m), "betas": [_s(b) for b in self.betas]}


@dataclass(frozen=True)
class RAS(SeriesSpec):
    """``rAs^(alpha)(a; b; q; z) = sum (a;q)_n / (b;q)_n q^(alpha n^2) z^n``."""

    family: ClassVar[str] = "ras"
    alpha: Any = 1
    q: Any = 0.5
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        super().__post_init__()

    def validate(self):
        q = _check_base(self.q)
        if num(self.alpha) < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        for b in self.b:
            b = num(b)
            # (b;q)_n vanishes iff b = q^-j for some j >= 0
            if b != 0 and not isinstance(b, mpmath.mpc) and b >= 1:
                j = mpmath.log(b) / -mpmath.log(q)
                if abs(j - mpmath.nint(j)) < mpf(2) ** -40:
                    raise DomainError(f"denominator parameter b={b} is a power q^-j")

    def ratio(self, k):
        q = num(self.q)
        qk = q**k
        out = q ** (num(self.alpha) * (2 * k + 1))
        for a in self.a:
            out *= 1 - num(a) * qk
        for b in self.b:
            out /= 1 - num(b) * qk
        return out

    def ratio_sup(self, k):
        q = num(self.q)
        qk = q**k
        out = q ** (num(self.alpha) * (2 * k + 1))
        for a in self.a:
            out *= 1 + abs(num(a)) * qk
        for b in self.b:
            bq = abs(num(b)) * qk
            if bq >= 1:
                return INF
            out /= 1 - bq
        return out

    def params(self):
        return {"alpha": _s(self.alpha), "q": _s(self.q),
                "a": [_s(x) for x in self.a], "b": [_s(x) for x in self.b]}


@dataclass(frozen=True)
class RPhiS(SeriesSpec):
    """Basic hypergeometric ``r phi s(a; b | q, z)``.

    Coefficients ``(a;q)_n / (q, b;q)_n * (-q^((n-1)/2))^(n(s+1-r))``; entire
    when ``s + 1 > r``, radius 1 when ``s + 1 = r``.
    """

    family: ClassVar[str] = "rphis"
    q: Any = 0.5
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        super().__post_init__()

    def validate(self):
        _check_base(self.q)
        for b in self.b:
            b = num(b)
            if not isinstance(b, mpmath.mpc) and b >= 1:
                raise DomainError(f"denominator parameter b={b} must be < 1")

    @property
    def excess(self):
        return len(self.b) + 1 - len(self.a)

    def ratio(self, k):
        q = num(self.q)
        qk = q**k
        e = self.excess
        out = (-1) ** (e % 2) * q ** (k * e) / (1 - qk * q)
        for a in self.a:
            out *= 1 - num(a) * qk
        for b in self.b:
            out /= 1 - num(b) * qk
        return out

    def ratio_sup(self, k):
        q = num(self.q)
        e = self.excess
        if e < 0:
            return INF
        qk = q**k
        out = q ** (k * e) / (1 - qk * q)
        for a in self.a:
            out *= 1 + abs(num(a)) * qk
        for b in self.b:
            bq = abs(num(b)) * qk
            if bq >= 1:
                return INF
            out /= 1 - bq
        return out

    def params(self):
        return {"q": _s(self.q), "a": [_s(x) for x in self.a], "b": [_s(x) for x in self.b]}


@dataclass(frozen=True)
class QBessel(SeriesSpec):
    """Normalised q-Bessel series ``j_nu^(kind)(z; q)`` in the variable ``x = z^2``.

    kind 1: ``(-x/4)^n / (q, q^(nu+1); q)_n``  (converges for ``|x| < 4``)
    kind 2: ``q^(n^2) (-x q^nu / 4)^n / (q, q^(nu+1); q)_n``
    kind 3: ``q^(n(n+1)/2) (-x/4)^n / (q, q^(nu+1); q)_n``
    """

    kind: int = 2
    nu: Any = 0
    q: Any = 0.5

    @property
    def family(self):
        return f"qbessel{self.kind}"

    def validate(self):
        if self.kind not in (1, 2, 3):
            raise DomainError(f"q-Bessel kind must be 1, 2 or 3, got {self.kind}")
        _check_base(self.q)
        if num(self.nu) <= -1:
            raise DomainError(f"nu must be > -1, got {self.nu}")

    def variable(self, z):
        return z * z

    def _den(self, k):
        q = num(self.q)
        return (1 - q ** (k + 1)) * (1 - q ** (num(self.nu) + 1 + k))

    def _num(self, k):
        q = num(self.q)
        if self.kind == 1:
            return mpf(-0.25)
        if self.kind == 2:
            return -q ** (num(self.nu) + 2 * k + 1) / 4
        return -q ** (k + 1) / 4

    def ratio(self, k):
        return self._num(k) / self._den(k)

    def ratio_sup(self, k):
        return abs(self._num(k)) / self._den(k)

    def params(self):
        return {"nu": _s(self.nu), "q": _s(self.q)}


FAMILIES = {
    "ramanujan-a": RamanujanA,
    "generalized-q": GeneralizedQ,
    "limit-poly": LimitPoly,
    "limit-entire": LimitEntire,
    "ras": RAS,
    "rphis": RPhiS,
}


def spec_from_dict(d: dict) -> SeriesSpec:
    """Inverse of :meth:`SeriesSpec.to_dict`."""
    family = d["family"]
    p = dict(d.get("params", {}))
    if family.startswith("qbessel"):
        return QBessel(kind=int(family[-1]), nu=p["nu"], q=p["q"])
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown series family {family!r}") from None
    return cls(**p)


def _decimal(x, bits):
    digits = int(math.ceil(bits * math.log10(2))) + 2
    if isinstance(x, mpmath.mpc):
        if x.imag == 0:
            x = x.real
        else:
            return f"{mpmath.nstr(x.real, digits)}{'+' if x.imag >= 0 else '-'}{mpmath.nstr(abs(x.imag), digits)}j"
    return mpmath.nstr(x, digits)


@dataclass
class CoefficientSequence:
    """``c_0 .. c_N`` plus provenance; ``degree`` is set only when terminating."""

    coeffs: list
    terminating: bool = False
    degree: int | None = None
    family: str = "raw"
    params: dict = field(default_factory=dict)
    precision_bits: int = 256

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "precision_bits": self.precision_bits,
            "coeffs": [_decimal(c, self.precision_bits) for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, text: str) -> "CoefficientSequence":
        d = json.loads(text)
        bits = int(d["precision_bits"])
        with mpmath.workprec(bits):
            coeffs = [num(c) for c in d["coeffs"]]
        deg = None
        terminating = False
        if d["family"] != "raw":
            spec = spec_from_dict(d)
            deg = spec.degree
            terminating = deg is not None
        return cls(coeffs, terminating, deg, d["family"], d["params"], bits)


def from_values(values, ctx=None) -> CoefficientSequence:
    """Wrap a plain list of numbers (a finite, terminating sequence)."""
    ctx = as_context(ctx)
    with ctx.workprec():
        coeffs = [num(v) for v in values]
    deg = len(coeffs) - 1
    while deg > 0 and coeffs[deg] == 0:
        deg -= 1
    return CoefficientSequence(coeffs, True, deg, "raw", {}, ctx.bits)


def coefficients(spec: SeriesSpec, N: int, ctx=None) -> CoefficientSequence:
    """``c_0 .. c_N`` by the term-ratio recurrence; zeros past the degree are exact."""
    ctx = as_context(ctx)
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    with ctx.workprec():
        c = mpf(1)
        out = [c]
        for k in range(N):
            if c != 0:
                c = c * spec.ratio(k)
            out.append(c)
    return CoefficientSequence(out, spec.terminating, spec.degree, spec.family,
                               spec.params(), ctx.bits)


@dataclass(frozen=True)
class TruncationCertificate:
    """Asserts ``sum_{k>N} |c_k| R^k <= tail``."""

    N: int
    R: Any
    tail: Any

    def to_dict(self, bits=256):
        return {"N": self.N, "R": _decimal(mpf(self.R), bits), "tail": _decimal(mpf(self.tail), bits)}


def poly_eval(coeffs, x):
    """``sum c_k x^k`` with a running power; shared by evaluate for polynomials."""
    s = mpf(0)
    xp = mpf(1)
    for c in coeffs:
        s += c * xp
        xp *= x
    return s


def evaluate(spec: SeriesSpec, z, ctx=None, tol=None, n_max: int = N_MAX):
    """Value of the series at ``z`` with a truncation certificate.

    The stopping index ``N`` is the first one whose certified tail is at most
    ``tol * max(1, |partial sum|)`` (``tol`` defaults to ``eps_id``).
    """
    ctx = as_context(ctx)
    with ctx.workprec():
        tol = ctx.eps_id if tol is None else mpf(tol)
        x = spec.variable(num(z))
        r = abs(x)
        deg = spec.degree
        if deg is not None:
            coeffs = coefficients(spec, deg, ctx).coeffs
            return poly_eval(coeffs, x), TruncationCertificate(deg, r, mpf(0))
        c = mpf(1)
        xp = mpf(1)
        s = mpf(1)
        k = 0
        while True:
            rho = r * spec.ratio_sup(k)
            if rho < 1:
                tail = abs(c * xp) * rho / (1 - rho)
                if tail <= tol * max(1, abs(s)):
                    return s, TruncationCertificate(k, r, tail)
            if k >= n_max:
                raise NonConvergenceError(
                    f"{spec.family}: no certified tail below {mpmath.nstr(tol, 5)} "
                    f"within N_max={n_max} at |x|={mpmath.nstr(r, 8)}", best=s)
            c *= spec.ratio(k)
            xp *= x
            s += c * xp
            k += 1


def truncation_degree(spec: SeriesSpec, R, ctx=None, tol=None, n_max: int = N_MAX,
                      granularity: int = 8) -> TruncationCertificate:
    """Smallest ``N`` (a multiple of ``granularity``) with certified tail ``<= tol`` on ``|x| <= R``.

    ``R`` is a radius in the series variable.  Terminating specs return
    their degree with a zero tail.
    """
    ctx = as_context(ctx)
    with ctx.workprec():
        R = mpf(R)
        if R <= 0:
            raise DomainError(f"R must be > 0, got {R}")
        tol = ctx.eps_id if tol is None else mpf(tol)
        deg = spec.degree
        if deg is not None:
            return TruncationCertificate(deg, R, mpf(0))
        c = mpf(1)
        k = 0
        while True:
            if k % granularity == 0 and k > 0:
                rho = R * spec.ratio_sup(k)
                if rho < 1:
                    tail = abs(c) * R**k * rho / (1 - rho)
                    if tail <= tol:
                        return TruncationCertificate(k, R, tail)
            if k >= n_max:
                raise NonConvergenceError(
                    f"{spec.family}: no certified truncation within N_max={n_max} at R={mpmath.nstr(R, 8)}")
            c *= spec.ratio(k)
            k += 1


def qbessel_normalized(kind: int, nu, q, z, ctx=None):
    """``j_nu^(kind)(z; q)``: the series side of the normalised q-Bessel function."""
    value, _ = evaluate(QBessel(kind, nu, q), z, ctx)
    return value


def _require_common_base(spec):
    if not isinstance(spec, GeneralizedQ):
        raise DomainError("scaled limits are defined for generalized-q specs")
    q = spec.common_base()
    if q is None:
        raise DomainError("scaled limits need every base equal to q")
    return q


def limit_target(spec: GeneralizedQ) -> SeriesSpec:
    """The q -> 1 limit family of a common-base generalized-q spec."""
    _require_common_base(spec)
    betas = tuple(b for b, _ in spec.denominators)
    if spec.orders:
        return LimitPoly(tuple(int(n) for n, _ in spec.orders), betas)
    if any(num(a) != 0 for a, _ in spec.shifts):
        raise DomainError("the entire-function limit is taken with every a_j = 0")
    if not betas:
        raise DomainError("the entire-function limit needs l >= 1")
    return LimitEntire(len(spec.shifts), betas)


def scaling_exponent(spec: GeneralizedQ) -> int:
    """``2l`` for the polynomial family, ``m + 2l`` for the entire one."""
    return 2 * spec.ell if spec.orders else spec.m + 2 * spec.ell


def scaled_limit_coefficients(spec: GeneralizedQ, N: int, ctx=None) -> CoefficientSequence:
    """Coefficients ``c_k (1-q)^(e k)`` of the rescaled series at the spec's ``q``."""
    ctx = as_context(ctx)
    with ctx.workprec():
        q = _require_common_base(spec)
        seq = coefficients(spec, N, ctx)
        scale = (1 - q) ** scaling_exponent(spec)
        f = mpf(1)
        out = []
        for c in seq.coeffs:
            out.append(c * f)
            f *= scale
    return CoefficientSequence(out, seq.terminating, seq.degree, "scaled-" + spec.family,
                               spec.params(), ctx.bits)
