"""Verification suites: parameter sweeps that collect pass/fail evidence.

Each suite returns a :class:`VerificationReport`.  Reports carry no
timings or other run-dependent data, so the same grid, seed and precision
always give byte-identical JSON.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import mpmath
from mpmath import mpc, mpf

from .errors import DomainError, QZerosError
from .pfcheck import product_condition, squarefree_part, turan_ratios
from .qcore import as_context, num, qpoch_finite, qpoch_infinite
from .roots import (certify_entire_zeros, certify_real_roots, find_poly_roots,
                    locate_entire_zeros)
from .series import (RAS, GeneralizedQ, LimitEntire, LimitPoly, QBessel, RamanujanA, RPhiS,
                     coefficients, evaluate, scaled_limit_coefficients)

SUITES = ("poly", "func1", "func2", "identities", "limits", "order")

# Fixed entire-function instances checked alongside the grid in func1.
GENERALIZED_ENTIRE_CASES = (
    GeneralizedQ(alpha=1, q=0.5, shifts=((1, 0.5),), denominators=((1, 0.5),)),
    GeneralizedQ(alpha=0.75, q=0.6, shifts=((0.5, 0.3), (2, 0.7)), denominators=()),
    GeneralizedQ(alpha=1.5, q=0.7, shifts=(), denominators=((0.5, 0.4), (2, 0.6))),
)
LIMIT_ENTIRE_CASES = (
    LimitEntire(0, (1,)),
    LimitEntire(1, (1,)),
    LimitEntire(0, (1, 2)),
    LimitEntire(2, (1.5,)),
)
ORDER_CASES = ((0, 1), (1, 1), (0, 2), (2, 1))


def _fmt(x, digits=10):
    if x is None:
        return None
    return mpmath.nstr(mpf(x), digits)


# ---------------------------------------------------------------------------
# grids and reports


@dataclass(frozen=True)
class GridSpec:
    """Parameter ranges for one suite; unused fields are ignored by that suite."""

    q: tuple = ()
    alpha: tuple = ()
    n: tuple = ()
    a: tuple = ()
    b: tuple = ()
    r_max: int = 1
    s_max: int = 1
    K: int = 5
    count: int = 0
    seed: int = 0

    @classmethod
    def default(cls, suite: str) -> "GridSpec":
        if suite == "poly":
            return cls(q=(0.1, 0.3, 0.5, 0.7, 0.9), alpha=(0, 0.5, 1, 2), n=tuple(range(1, 9)),
                       count=50)
        if suite == "func1":
            return cls(q=(0.3, 0.5, 0.7), alpha=(0.5, 1), a=(0, 1), K=5)
        if suite == "func2":
            return cls(q=(0.3, 0.4, 0.5), alpha=(1,), a=(0.05, 0.5), b=(0.5,), K=5)
        if suite == "identities":
            return cls(q=(0.3, 0.5, 0.7), count=20)
        if suite == "limits":
            return cls(q=tuple(1 - 2.0**-j for j in range(3, 11)))
        if suite == "order":
            return cls(K=200)
        raise DomainError(f"unknown suite {suite!r}")

    @classmethod
    def extended(cls, suite: str) -> "GridSpec":
        """Larger sweeps for long unattended runs; func1 adds random distinct-base instances."""
        base = cls.default(suite)
        if suite == "poly":
            return replace(base, q=tuple(round(0.05 * i, 2) for i in range(1, 20)),
                           alpha=(0, 0.25, 0.5, 1, 1.5, 2, 3), n=tuple(range(1, 13)), count=500)
        if suite == "func1":
            return replace(base, q=(0.2, 0.3, 0.5, 0.7, 0.8), alpha=(0.25, 0.5, 1, 2),
                           a=(0, 0.5, 1, 3), count=50)
        if suite == "func2":
            return replace(base, q=(0.2, 0.3, 0.4, 0.5, 0.6), alpha=(0.75, 1, 1.5),
                           a=(0.05, 0.2, 0.5), b=(0.1, 0.5, 0.9), r_max=2, s_max=2)
        if suite == "identities":
            return replace(base, q=(0.1, 0.3, 0.5, 0.7, 0.9), count=100)
        if suite == "limits":
            return replace(base, q=tuple(1 - 2.0**-j for j in range(3, 15)))
        return replace(base, K=1000)

    def override(self, values: dict) -> "GridSpec":
        """Replace fields from ``key -> value`` strings (lists are comma separated)."""
        known = {f.name: f for f in fields(self)}
        out = {}
        for key, raw in values.items():
            if key not in known:
                raise DomainError(f"unknown grid key {key!r}")
            if known[key].type == "tuple":
                items = [s for s in str(raw).replace(" ", "").split(",") if s]
                out[key] = tuple(int(s) if key == "n" else float(s) for s in items)
            else:
                out[key] = int(raw)
        return replace(self, **out)

    def validate(self, suite: str):
        for q in self.q:
            if not 0 < q < 1:
                raise DomainError(f"grid q={q} outside (0, 1)")
        for a in self.alpha:
            if a < 0 or (suite in ("func1", "func2") and a == 0):
                raise DomainError(f"grid alpha={a} violates the hypothesis")
        for n in self.n:
            if int(n) != n or n < 1:
                raise DomainError(f"grid n={n} must be a positive integer")
        for a in self.a:
            if suite == "func1" and a < 0:
                raise DomainError(f"grid a={a} must be >= 0")
            if suite == "func2" and not 0 < a < 1:
                raise DomainError(f"grid a={a} must lie in (0, 1)")
        for b in self.b:
            if not 0 < b < 1:
                raise DomainError(f"grid b={b} must lie in (0, 1)")
        if self.K < 1:
            raise DomainError("K must be >= 1")
        if suite == "order" and self.K < 50:
            raise DomainError("order estimation needs K >= 50")
        if suite == "limits" and list(self.q) != sorted(self.q):
            raise DomainError("the q sequence must increase toward 1")
        return self

    def to_dict(self):
        return asdict(self)


@dataclass
class VerificationReport:
    """Aggregated evidence for one claim.

    ``worst`` is the extreme of ``metric`` over all instances: the largest
    value when ``worst_is_max`` (residuals, imaginary ratios), otherwise the
    smallest (Turan ratios).
    """

    tag: str
    metric: str
    worst_is_max: bool = True
    run: int = 0
    passed: int = 0
    worst: Any = None
    failures: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def record(self, params: dict, ok: bool, value=None, reason: str | None = None,
               diagnostics: dict | None = None):
        self.run += 1
        if value is not None:
            value = mpf(value)
            if self.worst is None or (value > self.worst if self.worst_is_max else value < self.worst):
                self.worst = value
        if ok:
            self.passed += 1
        else:
            entry = {"params": params, "reason": reason or "claim not satisfied"}
            if value is not None:
                entry["value"] = _fmt(value)
            if diagnostics:
                entry["diagnostics"] = {k: str(v) for k, v in sorted(diagnostics.items())}
            self.failures.append(entry)

    def fail_error(self, params: dict, exc: Exception):
        self.record(params, False, reason=f"{type(exc).__name__}: {exc}",
                    diagnostics=getattr(exc, "diagnostics", None))

    @property
    def ok(self) -> bool:
        return self.passed == self.run

    def to_dict(self) -> dict:
        return {"tag": self.tag, "instances_run": self.run, "instances_passed": self.passed,
                "metric": self.metric, "worst": _fmt(self.worst), "failures": self.failures,
                "skipped": self.skipped, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        lines = [f"{self.tag:<12} {status}  {self.passed}/{self.run} passed"
                 f"  skipped={len(self.skipped)}  {self.metric}={_fmt(self.worst, 6)}"]
        for f in self.failures:
            lines.append(f"    failed {json.dumps(f['params'], sort_keys=True)}: {f['reason']}")
        return "\n".join(lines)


def merge(tag: str, reports: list) -> VerificationReport:
    """Combine reports that share a metric direction."""
    out = VerificationReport(tag, reports[0].metric, reports[0].worst_is_max)
    for r in reports:
        out.run += r.run
        out.passed += r.passed
        out.failures += r.failures
        out.skipped += r.skipped
        out.notes[r.tag] = r.notes
        if r.worst is not None:
            if out.worst is None or (r.worst > out.worst if out.worst_is_max else r.worst < out.worst):
                out.worst = r.worst
    return out


# ---------------------------------------------------------------------------
# polynomial families


def _check_polynomial(report, spec, sign, expected_degree, ctx):
    """Zeros of a terminating spec are real with the claimed sign.

    Repeated factors (the limit family with one order and no beta is
    ``(1 + x)^n``) are divided out exactly first; the claim concerns the
    zero set, and the root finder needs simple zeros.
    """
    params = spec.to_dict()
    try:
        seq = coefficients(spec, spec.degree, ctx)
        sf = [mpf(x.numerator) / x.denominator for x in squarefree_part(seq.coeffs)]
        zs = find_poly_roots(sf, ctx)
        rep = certify_real_roots(sf, zs, ctx)
    except QZerosError as exc:
        report.fail_error(params, exc)
        return
    signed = rep.all_positive if sign > 0 else rep.all_negative
    ok = rep.all_real and signed and len(seq.coeffs) - 1 == expected_degree
    reason = None if ok else (f"real={rep.all_real} sign_ok={signed} "
                              f"distinct_zeros={len(zs)} degree={expected_degree}")
    if len(sf) < len(seq.coeffs):
        report.notes.setdefault("repeated_zeros", []).append(
            {"spec": params, "distinct": len(sf) - 1, "degree": len(seq.coeffs) - 1})
    report.record(params, ok, rep.max_imag_ratio, reason)


def verify_thm_poly(grid: GridSpec | None = None, ctx=None) -> VerificationReport:
    """Terminating ``a = q^-n`` polynomials over the q x alpha x n grid: all zeros real and positive."""
    ctx = as_context(ctx)
    grid = (grid or GridSpec.default("poly")).validate("poly")
    report = VerificationReport("poly-terminating", "max_imag_ratio")
    with ctx.workprec():
        for q in grid.q:
            for alpha in grid.alpha:
                for n in grid.n:
                    _check_polynomial(report, RamanujanA(alpha, q, n=int(n)), +1, int(n), ctx)
    return report


def random_generalized_polynomials(count: int, seed: int):
    """Random terminating generalized-q instances with ``m <= 2``, ``l <= 2``, ``n_j <= 5``."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = rng.randint(1, 2)
        ell = rng.randint(0, 2)
        orders = tuple((rng.randint(1, 5), round(rng.uniform(0.1, 0.9), 3)) for _ in range(m))
        dens = tuple((round(rng.uniform(0.1, 3.0), 3), round(rng.uniform(0.1, 0.9), 3))
                     for _ in range(ell))
        out.append(GeneralizedQ(alpha=round(rng.uniform(0, 2), 3),
                                q=round(rng.uniform(0.1, 0.9), 3), orders=orders,
                                denominators=dens))
    return out


def random_generalized_entire(count: int, seed: int):
    """Random entire generalized-q instances with independent bases, ``alpha`` in (0, 2]."""
    rng = random.Random(f"{seed}:entire")
    out = []
    for _ in range(count):
        shifts = tuple((round(rng.uniform(0, 2), 3), round(rng.uniform(0.1, 0.9), 3))
                       for _ in range(rng.randint(0, 2)))
        dens = tuple((round(rng.uniform(0.1, 3.0), 3), round(rng.uniform(0.1, 0.9), 3))
                     for _ in range(rng.randint(0, 2)))
        out.append(GeneralizedQ(alpha=round(rng.uniform(0.001, 2), 3),
                                q=round(rng.uniform(0.1, 0.9), 3), shifts=shifts,
                                denominators=dens))
    return tuple(out)


def verify_thm_poly_generalized(grid: GridSpec | None = None, ctx=None) -> VerificationReport:
    """Random generalized-q polynomials and their q -> 1 limit polynomials: all zeros negative."""
    ctx = as_context(ctx)
    grid = grid or GridSpec.default("poly")
    report = VerificationReport("poly-generalized", "max_imag_ratio")
    with ctx.workprec():
        for spec in random_generalized_polynomials(grid.count, grid.seed):
            _check_polynomial(report, spec, -1, spec.degree, ctx)
            target = LimitPoly(tuple(n for n, _ in spec.orders), tuple(b for b, _ in spec.denominators))
            _check_polynomial(report, target, -1, target.degree, ctx)
    return report


# ---------------------------------------------------------------------------
# entire families


def bisection_first_negative_zero(spec, ctx=None, step=mpf("0.25"), iterations=80):
    """First sign change of the series on the negative axis, refined by bisection."""
    ctx = as_context(ctx)
    with ctx.workprec():
        def f(x):
            return mpmath.re(evaluate(spec, x, ctx)[0])
        lo, flo = mpf(0), f(0)
        while True:
            hi = lo - step
            fhi = f(hi)
            if mpmath.sign(fhi) != mpmath.sign(flo):
                break
            lo, flo = hi, fhi
        for _ in range(iterations):
            mid = (lo + hi) / 2
            fm = f(mid)
            if mpmath.sign(fm) == mpmath.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        return (lo + hi) / 2


def _check_entire(report, spec, K, ctx):
    params = spec.to_dict()
    try:
        zs = locate_entire_zeros(spec, K, ctx)
        rep = certify_entire_zeros(spec, zs, ctx)
    except QZerosError as exc:
        report.fail_error(params, exc)
        return None
    ok = rep.all_real and rep.all_negative
    report.record(params, ok, mpf(zs.certificate["stability"]),
                  None if ok else f"real={rep.all_real} negative={rep.all_negative}")
    imag = report.notes.get("max_imag_ratio")
    if imag is None or rep.max_imag_ratio > mpf(imag):
        report.notes["max_imag_ratio"] = _fmt(rep.max_imag_ratio)
    return zs


def verify_thm_func1(grid: GridSpec | None = None, K: int | None = None, ctx=None) -> VerificationReport:
    """First ``K`` zeros of the first-range entire families are real and negative.

    The metric is the worst relative zero movement under ``N -> N + 16``
    and precision doubling.  The Bessel-type limit instance ``m = 0,
    l = 1, beta = 1`` is also compared with a bisection oracle.
    """
    ctx = as_context(ctx)
    grid = (grid or GridSpec.default("func1")).validate("func1")
    K = grid.K if K is None else K
    report = VerificationReport("func1", "max_stability_delta")
    with ctx.workprec():
        for q in grid.q:
            for alpha in grid.alpha:
                for a in grid.a:
                    _check_entire(report, RamanujanA(alpha, q, a=-a if a else 0), K, ctx)
        for spec in GENERALIZED_ENTIRE_CASES + random_generalized_entire(grid.count, grid.seed):
            _check_entire(report, spec, K, ctx)
        for spec in LIMIT_ENTIRE_CASES:
            zs = _check_entire(report, spec, K, ctx)
            if zs is not None and spec == LimitEntire(0, (1,)):
                oracle = bisection_first_negative_zero(spec, ctx)
                first = mpmath.re(zs.zeros[-1])
                rel = abs(first - oracle) / abs(oracle)
                report.notes["bessel_first_zero"] = {"located": _fmt(first, 15),
                                                     "bisection": _fmt(oracle, 15),
                                                     "relative_gap": _fmt(rel, 5)}
                report.record({"check": "first zero vs bisection", **spec.to_dict()},
                              rel < mpf("5e-7"), reason=f"relative gap {_fmt(rel, 5)}")
    return report


def _ras_instances(grid):
    for q in grid.q:
        for alpha in grid.alpha:
            for r in range(grid.r_max + 1):
                for s in range(grid.s_max + 1):
                    for a in _multisets(grid.a, r):
                        for b in _multisets(grid.b, s):
                            yield RAS(alpha, q, a, b)


def _multisets(values, k):
    if k == 0:
        yield ()
        return
    for i, v in enumerate(values):
        for rest in _multisets(values[i:], k - 1):
            yield (v,) + rest


def verify_thm_func2(grid: GridSpec | None = None, K: int | None = None, ctx=None,
                     n_ratio: int = 40) -> VerificationReport:
    """rAs instances satisfying the product condition: Turan ratios >= 4 and negative zeros.

    Instances failing the condition are listed under ``skipped``.  The
    metric is the smallest Turan ratio seen.
    """
    ctx = as_context(ctx)
    grid = (grid or GridSpec.default("func2")).validate("func2")
    K = grid.K if K is None else K
    report = VerificationReport("func2", "min_turan_ratio", worst_is_max=False)
    with ctx.workprec():
        for spec in _ras_instances(grid):
            holds, lhs, rhs = product_condition(spec.alpha, spec.q, spec.a, spec.b, ctx)
            params = spec.to_dict()
            if not holds:
                report.skipped.append({"params": params, "lhs": _fmt(lhs), "rhs": _fmt(rhs)})
                continue
            ratios = turan_ratios(coefficients(spec, n_ratio, ctx), ctx)
            report.record({"check": "turan", **params}, ratios.passes_4, ratios.min_ratio,
                          f"min ratio {_fmt(ratios.min_ratio)} < 4")
            if not spec.a and not spec.b and num(spec.q) ** (-2 * num(spec.alpha)) == 4:
                report.notes["boundary_min_ratio"] = mpmath.nstr(ratios.min_ratio, 40)
            try:
                zs = locate_entire_zeros(spec, K, ctx)
                rep = certify_entire_zeros(spec, zs, ctx)
            except QZerosError as exc:
                report.fail_error({"check": "zeros", **params}, exc)
                continue
            ok = rep.all_real and rep.all_negative
            report.record({"check": "zeros", **params}, ok, None,
                          f"real={rep.all_real} negative={rep.all_negative}")
    return report


# ---------------------------------------------------------------------------
# identities


def _direct_sum(term, tol, k_max=20000):
    """Sum ``term(k)`` until three consecutive terms are below ``tol`` relative and halving."""
    s = mpf(0)
    prev = None
    quiet = 0
    for k in range(k_max):
        t = term(k)
        s += t
        small = abs(t) <= tol * max(1, abs(s))
        quiet = quiet + 1 if small and (prev is None or abs(t) <= abs(prev) / 2) else 0
        if quiet >= 3:
            return s
        prev = t
    raise QZerosError("direct summation did not settle")


def stieltjes_wigert(n: int, w, q):
    """``S_n(w; q) = sum_k q^(k^2) (-w)^k / ((q;q)_k (q;q)_{n-k})``."""
    return sum(q ** (k * k) * (-w) ** k / (qpoch_finite(q, q, k) * qpoch_finite(q, q, n - k))
               for k in range(n + 1))


def _qbessel_large_base(kind, nu, Q, z, tol):
    """Normalised q-Bessel series for a base ``Q > 1`` (finite products only)."""
    x = z * z

    def ratio(k):
        den = (1 - Q ** (k + 1)) * (1 - Q ** (nu + 1 + k))
        if kind == 1:
            top = mpf(-0.25)
        elif kind == 2:
            top = -Q ** (nu + 2 * k + 1) / 4
        else:
            top = -Q ** (k + 1) / 4
        return top / den

    # |ratio| decreases in k for Q > 1, so the current ratio bounds the tail
    c, s, xp, k = mpf(1), mpf(1), mpf(1), 0
    while True:
        rho = abs(x * ratio(k))
        if rho < 1 and abs(c * xp) * rho / (1 - rho) <= tol * max(1, abs(s)):
            return s
        c *= ratio(k)
        xp *= x
        s += c * xp
        k += 1


def _rel(lhs, rhs):
    return abs(lhs - rhs) / max(1, abs(rhs))


def _points(name, seed, count, radius, real=False):
    rng = random.Random(f"{seed}:{name}")
    out = []
    for _ in range(count):
        if real:
            out.append(mpf(str(round(rng.uniform(-radius, radius), 6))))
        else:
            r = rng.uniform(0, radius)
            t = rng.uniform(0, 2 * math.pi)
            out.append(mpc(mpf(str(round(r * math.cos(t), 6))), mpf(str(round(r * math.sin(t), 6)))))
    return out


def _product_tail(nu, q, zeros):
    """``sum_{n > K} 1/x_n`` from the linear coefficient (``-sum 1/x_n``) minus the located part."""
    c1 = QBessel(2, nu, q).ratio(0)
    return -c1 - sum(1 / x for x in zeros)


def verify_identities(grid: GridSpec | None = None, ctx=None, K_product: int = 8) -> VerificationReport:
    """Relative residuals of the series identities at seeded sample points.

    Product-form identities truncate at ``K_product`` zeros; their residual
    is the part of the discrepancy exceeding a rigorous bound on the
    omitted factors (which follows from the linear coefficient).
    """
    ctx = as_context(ctx)
    grid = (grid or GridSpec.default("identities")).validate("identities")
    report = VerificationReport("identities", "max_relative_residual")
    qs = [mpf(str(q)) for q in grid.q]
    count, seed = grid.count, grid.seed
    with ctx.workprec():
        tol = ctx.eps_id * mpf(2) ** -24

        def ev(spec, z):
            return evaluate(spec, z, ctx, tol=tol)[0]

        def check(name, params, lhs, rhs, residual=None):
            res = _rel(lhs, rhs) if residual is None else residual
            report.record({"identity": name, **params}, res <= ctx.eps_id, res,
                          f"residual {_fmt(res, 5)}")
            return res

        def qpinf(a, q):
            return qpoch_infinite(a, q, ctx, tol)[0]

        # terminating alpha = 1/2 case against Stieltjes-Wigert polynomials
        for i, z in enumerate(_points("sw", seed, count, 1)):
            q, n = qs[i % len(qs)], i % 9
            lhs = ev(RamanujanA(mpf(1) / 2, q, n=n), z)
            rhs = qpoch_finite(q, q, n) * stieltjes_wigert(n, z * q ** (-mpf(1) / 2 - n), q)
            check("stieltjes_wigert", {"q": _fmt(q), "n": n, "z": str(z)}, lhs, rhs)
            if i == 1:
                printed = qpoch_finite(q, q, n) * stieltjes_wigert(n, z * q ** (mpf(1) / 2 - n), q)
                report.notes["stieltjes_wigert_printed_argument_residual"] = _fmt(_rel(lhs, printed), 5)

        # a = 0 and a = q reductions
        for i, z in enumerate(_points("a0", seed, count, 3)):
            q = qs[i % len(qs)]
            lhs = ev(RamanujanA(1, q, a=0), z)
            rhs = _direct_sum(lambda k: q ** (k * k) * (-(-z)) ** k / qpoch_finite(q, q, k), tol)
            check("ramanujan_entire", {"q": _fmt(q), "z": str(z)}, lhs, rhs)
        for i, z in enumerate(_points("aq", seed, count, 3)):
            q = qs[i % len(qs)]
            lhs = ev(RamanujanA(1, q, a=q), z)
            rhs = _direct_sum(lambda k: q ** (k * k) * z**k, tol)
            check("partial_theta", {"q": _fmt(q), "z": str(z)}, lhs, rhs)

        # q-binomial theorem
        rng = random.Random(f"{seed}:qbinomial-a")
        for i, z in enumerate(_points("qb", seed, count, mpf("0.8"))):
            q = qs[i % len(qs)]
            a = mpf(str(round(rng.uniform(0, 2), 4)))
            lhs = ev(RPhiS(q, (-a,), ()), z)
            rhs = qpinf(-a * z, q) / qpinf(z, q)
            check("q_binomial", {"q": _fmt(q), "a": _fmt(a), "z": str(z)}, lhs, rhs)
            if i == 0:
                b = mpf("0.5")
                printed = qpinf(-a * z, q) / qpinf(b * z, q)
                report.notes["q_binomial_printed_b_half_residual"] = _fmt(_rel(lhs, printed), 5)

        # terminating q-binomial
        for i, z in enumerate(_points("tqb", seed, count, 2)):
            q, n = qs[i % len(qs)], 1 + i % 8
            lhs = ev(RamanujanA(0, q, n=n), -z)
            rhs = qpoch_finite(-z * q ** (-n), q, n)
            check("terminating_q_binomial", {"q": _fmt(q), "n": n, "z": str(z)}, lhs, rhs)
            if i == 0:
                printed = qpoch_finite(-z * q**n, q, n)
                report.notes["terminating_q_binomial_printed_residual"] = _fmt(_rel(lhs, printed), 5)

        # q-Bessel: kinds 1 and 2, product formula and its kind-1 form
        for i, z in enumerate(_points("j12", seed, count, mpf("1.8"))):
            q, nu = qs[i % len(qs)], mpf(i % 4) / 2
            lhs = ev(QBessel(1, nu, q), z) * qpinf(-z * z / 4, q)
            rhs = ev(QBessel(2, nu, q), z)
            check("qbessel_kind1_kind2", {"q": _fmt(q), "nu": _fmt(nu), "z": str(z)}, lhs, rhs)

        cases = [(mpf(0), mpf("0.5")), (mpf("0.5"), mpf("0.3"))]
        located = {}
        for nu, q in cases:
            zs = locate_entire_zeros(QBessel(2, nu, q), K_product, ctx, check_stability=False)
            xs = sorted((mpmath.re(x) for x in zs.zeros))
            located[(nu, q)] = (xs, _product_tail(nu, q, xs))

        for i, z in enumerate(_points("prod", seed, count, 2)):
            nu, q = cases[i % 2]
            xs, tail = located[(nu, q)]
            x = z * z
            series = ev(QBessel(2, nu, q), z)
            prod = mpf(1)
            for xn in xs:
                prod *= 1 - x / xn
            b = abs(x) * tail / (1 - abs(x) / xs[-1])
            budget = abs(prod) * mpmath.expm1(b)
            net = max(mpf(0), abs(series - prod) - budget) / max(1, abs(series))
            check("qbessel_product", {"q": _fmt(q), "nu": _fmt(nu), "z": str(z), "K": K_product},
                  series, prod, residual=net)

        for i, z in enumerate(_points("prod1", seed, count, 2)):
            nu, q = cases[i % 2]
            xs, tail = located[(nu, q)]
            lhs = ev(RPhiS(q, (0, 0), (q ** (nu + 1),)), z / 4)
            inv = 1 / qpinf(z / 4, q)
            prod = mpf(1)
            for xn in xs:
                prod *= 1 + z / xn
            b = abs(z) * tail / (1 - abs(z) / xs[-1])
            budget = abs(prod * inv) * mpmath.expm1(b)
            net = max(mpf(0), abs(lhs - prod * inv) - budget) / max(1, abs(lhs))
            check("qbessel_product_kind1", {"q": _fmt(q), "nu": _fmt(nu), "z": str(z),
                                            "K": K_product}, lhs, prod * inv, residual=net)
            if i == 0:
                printed = ev(RPhiS(q, (0, 0), (q ** (nu + 1),)), z)
                report.notes["qbessel_product_kind1_printed_residual"] = _fmt(
                    _rel(printed, prod * inv), 5)

        # inversion q -> 1/q between the kinds
        for i, z in enumerate(_points("inv", seed, count, mpf("0.95"))):
            q, nu = qs[i % len(qs)], mpf(i % 3) / 2
            Q = 1 / q
            sq = mpmath.sqrt(Q)
            r1 = _rel(ev(QBessel(1, nu, q), z), _qbessel_large_base(2, nu, Q, sq * z, tol))
            r2 = _rel(ev(QBessel(2, nu, q), z), _qbessel_large_base(1, nu, Q, sq * z, tol))
            r3 = _rel(ev(QBessel(3, nu, q), z), _qbessel_large_base(3, nu, Q, Q ** (nu / 2) * z, tol))
            check("qbessel_inversion", {"Q": _fmt(Q), "nu": _fmt(nu), "z": str(z)}, 0, 0,
                  residual=max(r1, r2, r3))

        # rAs with q among the denominators against r phi s, and the 1A1 form of A
        rng = random.Random(f"{seed}:ras")
        for i, z in enumerate(_points("rphis", seed, count, 2)):
            q = qs[i % len(qs)]
            r = rng.randint(0, 2)
            s = rng.randint(max(0, r - 1) if r else 0, 2)
            if s + 1 <= r:
                s = r
            a = tuple(mpf(str(round(rng.uniform(-1, 1), 3))) for _ in range(r))
            b = tuple(mpf(str(round(rng.uniform(-0.9, 0.9), 3))) for _ in range(s))
            e = s + 1 - r
            lhs = ev(RAS(mpf(e) / 2, q, a, (q,) + b), (-1 / mpmath.sqrt(q)) ** e * z)
            rhs = ev(RPhiS(q, a, b), z)
            check("ras_rphis", {"q": _fmt(q), "a": [_fmt(x) for x in a],
                                "b": [_fmt(x) for x in b], "z": str(z)}, lhs, rhs)
        for i, z in enumerate(_points("1a1", seed, count, 3)):
            q = qs[i % len(qs)]
            a = mpf(str(round(rng.uniform(-2, 2), 3)))
            alpha = mpf(str(round(rng.uniform(0.2, 2), 3)))
            check("ramanujan_as_1a1", {"q": _fmt(q), "a": _fmt(a), "alpha": _fmt(alpha),
                                       "z": str(z)},
                  ev(RamanujanA(alpha, q, a=a), z), ev(RAS(alpha, q, (a,), (q,)), z))
    return report


# ---------------------------------------------------------------------------
# q -> 1 limits and the order formula


LIMIT_POLY_CASES = ((1, (2,), (1,)), (2, (3, 4), (0.5,)))
LIMIT_ENTIRE_LIMIT_CASES = ((0, 1, 1), (1, 1, 1), (1, 1, 2))


HALVING_SLACK = mpf("0.99")


def _gaps_halve(gaps, steps=3, slack=HALVING_SLACK):
    """Each of the last ``steps`` gaps is at most half the previous one.

    First-order convergence gives successive ratios ``2 + O(1 - q)``, which
    may approach 2 from below; ``slack`` absorbs that second-order term.
    """
    tail = gaps[-(steps + 1):]
    return all(b * 2 * slack <= a for a, b in zip(tail, tail[1:]))


def _ratios(gaps, steps=3):
    """Successive shrink factors over the last ``steps`` q-steps, for the report notes."""
    tail = gaps[-(steps + 1):]
    return [_fmt(a / b, 6) if b else "inf" for a, b in zip(tail, tail[1:])]


def verify_limits(grid: GridSpec | None = None, ctx=None, n_coeffs: int = 8) -> VerificationReport:
    """Rescaled coefficients converge to the limit families as ``q -> 1``.

    Convergence is judged by the coefficient gap halving over each of the
    last three q-steps.  Polynomial cases also track the zero gap; entire
    cases check ``|scaled c_k| <= 1/(k!)^(m+2l)`` at every q.
    """
    ctx = as_context(ctx)
    grid = (grid or GridSpec.default("limits")).validate("limits")
    report = VerificationReport("limits", "final_coefficient_gap")
    with ctx.workprec():
        for alpha, orders, betas in LIMIT_POLY_CASES:
            target = LimitPoly(orders, betas)
            tc = coefficients(target, target.degree, ctx).coeffs
            tz = sorted(mpmath.re(z) for z in find_poly_roots(tc, ctx).zeros)
            gaps, zgaps = [], []
            for q in grid.q:
                q = mpf(str(q))
                spec = GeneralizedQ(alpha, q, tuple((n, q) for n in orders),
                                    denominators=tuple((b, q) for b in betas))
                sc = scaled_limit_coefficients(spec, target.degree, ctx).coeffs
                gaps.append(max(abs(x - y) for x, y in zip(sc, tc)))
                zz = sorted(mpmath.re(z) for z in find_poly_roots(sc, ctx).zeros)
                zgaps.append(max(abs(x - y) / abs(y) for x, y in zip(zz, tz)))
            params = {"orders": list(orders), "betas": list(betas), "alpha": alpha}
            report.notes[f"gap_ratios orders={list(orders)} betas={list(betas)}"] = _ratios(gaps)
            report.record({"check": "coefficient gaps halve", **params}, _gaps_halve(gaps),
                          gaps[-1], "gaps " + ", ".join(_fmt(g, 4) for g in gaps))
            report.record({"check": "zero gaps halve", **params}, _gaps_halve(zgaps), None,
                          "zero gaps " + ", ".join(_fmt(g, 4) for g in zgaps))
        for m, ell, beta in LIMIT_ENTIRE_LIMIT_CASES:
            target = LimitEntire(m, (beta,) * ell)
            tc = coefficients(target, n_coeffs, ctx).coeffs
            alpha = ell + mpf(m) / 2
            gaps = []
            bound_ok = True
            for q in grid.q:
                q = mpf(str(q))
                spec = GeneralizedQ(alpha, q, shifts=((0, q),) * m, denominators=((beta, q),) * ell)
                sc = scaled_limit_coefficients(spec, n_coeffs, ctx).coeffs
                gaps.append(max(abs(x - y) for x, y in zip(sc, tc)))
                for k, c in enumerate(sc):
                    if abs(c) > (1 + ctx.eps_id) / mpmath.factorial(k) ** (m + 2 * ell):
                        bound_ok = False
            params = {"m": m, "l": ell, "beta": beta}
            report.notes[f"gap_ratios m={m} l={ell} beta={beta}"] = _ratios(gaps)
            report.record({"check": "coefficient gaps halve", **params}, _gaps_halve(gaps),
                          gaps[-1], "gaps " + ", ".join(_fmt(g, 4) for g in gaps))
            report.record({"check": "factorial bound", **params}, bound_ok, None,
                          "scaled coefficient exceeds 1/(k!)^(m+2l)")
    return report


def estimate_order(spec: LimitEntire, K: int, method: str = "ratio"):
    """Order estimate of a limit-entire series from its ``K``-th coefficient.

    ``direct``: ``K log K / (-log c_K)``, which converges like ``1/log K``.
    ``ratio``:  ``log K / log(c_K / c_{K+1})``, the same limit with an
    ``O(1/(K log K))`` error; this is the default.
    """
    if K < 50:
        raise DomainError("order estimation needs K >= 50")
    with mpmath.workprec(128):
        lk = spec.log_abs_coefficient(K)
        if method == "direct":
            return K * mpmath.log(K) / -lk
        if method == "ratio":
            return mpmath.log(K) / (lk - spec.log_abs_coefficient(K + 1))
        raise DomainError(f"unknown order method {method!r}")


def verify_order(grid: GridSpec | None = None, ctx=None) -> VerificationReport:
    grid = (grid or GridSpec.default("order")).validate("order")
    report = VerificationReport("order", "max_relative_error")
    for m, ell in ORDER_CASES:
        spec = LimitEntire(m, (1,) * ell)
        rho = mpf(1) / (m + 2 * ell)
        est = estimate_order(spec, grid.K)
        err = abs(est - rho) / rho
        report.notes[f"m={m},l={ell}"] = {"estimate": _fmt(est), "formula": _fmt(rho),
                                          "direct": _fmt(estimate_order(spec, grid.K, "direct"))}
        report.record({"m": m, "l": ell, "K": grid.K}, err <= mpf("0.05"), err,
                      f"relative error {_fmt(err, 4)}")
    return report


def run_suite(name: str, grid: GridSpec | None = None, ctx=None, extended: bool = False,
              overrides: dict | None = None) -> list:
    """Run one named suite (or ``all``) and return its reports in a fixed order.

    ``overrides`` (``key -> value`` strings) patch the default or extended
    grid of every suite that runs.
    """
    ctx = as_context(ctx)
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, None, ctx, extended, overrides)]
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    if grid is None:
        grid = GridSpec.extended(name) if extended else GridSpec.default(name)
        if overrides:
            grid = grid.override(overrides)
    if name == "poly":
        return [merge("poly", [verify_thm_poly(grid, ctx), verify_thm_poly_generalized(grid, ctx)])]
    if name == "func1":
        return [verify_thm_func1(grid, ctx=ctx)]
    if name == "func2":
        return [verify_thm_func2(grid, ctx=ctx)]
    if name == "identities":
        return [verify_identities(grid, ctx)]
    if name == "limits":
        return [verify_limits(grid, ctx)]
    return [verify_order(grid, ctx)]


def reports_json(reports: list, ctx=None) -> str:
    ctx = as_context(ctx)
    return json.dumps({"precision_bits": ctx.bits, "passed": all(r.ok for r in reports),
                       "reports": [r.to_dict() for r in reports]}, sort_keys=True, indent=2)
