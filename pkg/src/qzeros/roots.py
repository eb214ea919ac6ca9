"""Polynomial and entire-function zeros with realness certificates.

Polynomial zeros come from Aberth-Ehrlich simultaneous iteration.  For the
entire families the zeros of a certified truncation ``p_N`` are used, with
a sampled Rouche guard on a separating circle and a stability re-run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
from mpmath import mpc, mpf

from .errors import DomainError, GuardFailure, InconsistencyError, NonConvergenceError
from .qcore import as_context, num
from .series import (CoefficientSequence, SeriesSpec, _decimal, coefficients, evaluate,
                     truncation_degree)

MAX_SWEEPS = 200
GUARD_SAMPLES = 256
GUARD_MARGIN = 4
STABILITY_EXTRA = 16


def _horner(c, z):
    """``p(z)`` and ``p'(z)`` for ascending coefficients ``c``."""
    p = c[-1]
    dp = 0 * p
    for a in reversed(c[:-1]):
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _abs_eval(c, r):
    s = mpf(0)
    for a in reversed(c):
        s = s * r + abs(a)
    return s


def _trim(coeffs):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


# The Aberth inner loop runs on gmpy2 (MPFR/MPC) numbers; conversions are exact.

def _to_g(x):
    x = mpmath.mpmathify(x)
    if isinstance(x, mpc):
        return gmpy2.mpc(_to_gr(x.real), _to_gr(x.imag))
    return gmpy2.mpc(_to_gr(x))


def _to_gr(x):
    sign, man, exp, _ = x._mpf_
    if not man:
        if x != 0:
            raise NonConvergenceError(f"non-finite value {x} in root iteration")
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _from_gr(x):
    if x == 0:
        return mpf(0)
    man, exp = x.as_mantissa_exp()
    return mpf((int(man), int(exp)))


def _from_g(z):
    return mpc(_from_gr(z.real), _from_gr(z.imag))


def _gmp_context(bits):
    return gmpy2.context(precision=bits + 8, real_prec=bits + 8, imag_prec=bits + 8,
                         emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())


def newton_polygon_guesses(c):
    """Starting points from the upper convex hull of ``(k, log|c_k|)``.

    Each hull edge from ``i`` to ``j`` contributes ``j - i`` points on the
    circle of radius ``(|c_i|/|c_j|)^(1/(j-i))``, rotated so that no start is
    real or conjugate-symmetric.
    """
    d = len(c) - 1
    pts = [(k, mpmath.log(abs(a))) for k, a in enumerate(c) if a != 0]
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    guesses = []
    sigma = mpf(0.7)
    for e, ((i, yi), (j, yj)) in enumerate(zip(hull, hull[1:])):
        n = j - i
        r = mpmath.exp((yi - yj) / n)
        for t in range(n):
            theta = 2 * mpmath.pi * (mpf(t) / n + mpf(e) / d) + sigma
            guesses.append(r * mpmath.expjpi(theta / mpmath.pi))
    lo = hull[0][0]
    # exact zero roots sit off the hull; seed them near the origin
    tiny = mpmath.ldexp(mpf(1), -(mpmath.mp.prec // 2))
    guesses = [tiny * (t + 1) * mpc(1, 1) for t in range(lo)] + guesses
    return guesses


def polygon_radii(c):
    """Root-modulus estimates (one per root, ascending) from the Newton polygon."""
    return sorted((abs(g) for g in newton_polygon_guesses(c)))


def aberth(c, tol, max_sweeps=MAX_SWEEPS, start=None):
    """All roots of ``sum c_k z^k`` by Aberth-Ehrlich iteration (Gauss-Seidel sweeps).

    A root stops moving once its Newton correction is below ``tol * |z_i|``;
    after all have converged one polishing sweep updates every root.
    Returns ``(roots, sweeps)`` as mpmath numbers.
    """
    d = len(c) - 1
    z0 = list(start) if start is not None else newton_polygon_guesses(c)
    with _gmp_context(mpmath.mp.prec):
        gc = [_to_g(a) for a in c]
        z = [_to_g(a) for a in z0]
        tol = gmpy2.mpfr(_to_gr(mpf(tol)))
        active = [True] * d
        polish = False
        for sweep in range(1, max_sweeps + 1):
            for i in range(d):
                if not (active[i] or polish):
                    continue
                zi = z[i]
                p, dp = _horner(gc, zi)
                if p == 0:
                    active[i] = False
                    continue
                ratio = p / dp
                s = 0
                for j in range(d):
                    if j != i:
                        s += 1 / (zi - z[j])
                z[i] = zi - ratio / (1 - ratio * s)
                if abs(ratio) <= tol * abs(zi):
                    active[i] = False
            if polish:
                return [_from_g(x) for x in z], sweep
            if not any(active):
                polish = True
    raise NonConvergenceError(f"Aberth iteration did not converge in {max_sweeps} sweeps",
                              best=[_from_g(x) for x in z])


def _order_key(z):
    z = mpmath.mpmathify(z)
    return (mpmath.re(z), mpmath.im(z))


@dataclass
class ZeroSet:
    """Zeros ordered ascending by real part (ties by imaginary part)."""

    zeros: list
    residuals: list
    conditions: list
    real_flags: list
    spec: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)
    precision_bits: int = 256
    all_real: bool | None = None
    all_negative: bool | None = None

    def __len__(self):
        return len(self.zeros)

    def by_modulus(self):
        return sorted(self.zeros, key=abs)

    def to_dict(self) -> dict:
        b = self.precision_bits
        return {
            "spec": self.spec,
            "zeros": [{"re": _decimal(mpmath.re(z), b), "im": _decimal(mpmath.im(z), b),
                       "residual": _decimal(r, b)} for z, r in zip(self.zeros, self.residuals)],
            "all_real": bool(self.all_real) if self.all_real is not None else all(self.real_flags),
            "all_negative": bool(self.all_negative) if self.all_negative is not None else False,
            "certificate": self.certificate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _as_coeff_list(coeffs):
    if isinstance(coeffs, CoefficientSequence):
        return coeffs.coeffs, coeffs.to_dict() if coeffs.family != "raw" else {}
    return [num(c) for c in coeffs], {}


def _zero_set(c, zs, ctx, spec=None, certificate=None):
    zs = sorted(zs, key=_order_key)
    residuals, conds, flags = [], [], []
    for z in zs:
        p, dp = _horner(c, z)
        residuals.append(abs(p))
        az = abs(z)
        conds.append(_abs_eval(c, az) / (az * abs(dp)) if dp != 0 and az != 0 else mpf("inf"))
        flags.append(abs(mpmath.im(z)) <= ctx.eps_real * (az + 1))
    return ZeroSet(zs, residuals, conds, flags, spec or {}, certificate or {}, ctx.bits)


def find_poly_roots(coeffs, ctx=None, max_sweeps=MAX_SWEEPS) -> ZeroSet:
    """All zeros of a polynomial given by ascending coefficients."""
    ctx = as_context(ctx)
    with ctx.workprec():
        c, spec = _as_coeff_list(coeffs)
        c = _trim(c)
        if len(c) < 2:
            raise DomainError("polynomial degree must be >= 1")
        tol = mpmath.ldexp(mpf(1), -(ctx.bits // 2))
        zs, sweeps = aberth(c, tol, max_sweeps)
        zs = [mpc(z) for z in zs]
        return _zero_set(c, zs, ctx, spec, {"method": "aberth-ehrlich", "sweeps": sweeps,
                                            "degree": len(c) - 1})


@dataclass
class RealnessReport:
    all_real: bool
    all_negative: bool
    all_positive: bool
    max_imag_ratio: object
    sign_change_count: int
    degree: int

    def to_dict(self):
        return {"all_real": self.all_real, "all_negative": self.all_negative,
                "all_positive": self.all_positive,
                "max_imag_ratio": mpmath.nstr(self.max_imag_ratio, 6),
                "sign_change_count": self.sign_change_count, "degree": self.degree}


def _sign(value, bound):
    """+1/-1 when ``|value|`` clears the rounding bound, else 0 (undecided)."""
    if abs(value) <= bound:
        return 0
    return 1 if value > 0 else -1


def _count_sign_changes(f, points):
    """Number of certified sign changes of ``f`` along ``points``.

    ``f(t)`` returns ``(value, error_bound)``; undecided signs break a run.
    """
    count = 0
    prev = None
    for t in points:
        v, err = f(t)
        s = _sign(v, err)
        if s == 0:
            prev = None
            continue
        if prev is not None and s != prev:
            count += 1
        prev = s
    return count


def _brackets(xs, lo_hint=None, hi_hint=None):
    xs = sorted(xs)
    pts = []
    lo = xs[0] - (1 + abs(xs[0]))
    if lo_hint is not None and xs[0] > lo_hint:
        lo = lo_hint
    pts.append(lo)
    for a, b in zip(xs, xs[1:]):
        pts.append((a + b) / 2)
    hi = xs[-1] + (1 + abs(xs[-1]))
    if hi_hint is not None and xs[-1] < hi_hint:
        hi = hi_hint
    pts.append(hi)
    return pts


def certify_real_roots(coeffs, zeros: ZeroSet, ctx=None) -> RealnessReport:
    """Dual realness certificate for a polynomial's computed zeros.

    (i) every zero has ``|Im z| <= eps_real (|z| + 1)``;
    (ii) the polynomial shows ``degree`` certified sign changes across
    brackets built from the zeros' real parts.  Zero itself is used as a
    bracket endpoint whenever it separates the roots, so the sign claims are
    certified too.  Disagreement between (i) and (ii) raises.
    """
    ctx = as_context(ctx)
    with ctx.workprec():
        c, _ = _as_coeff_list(coeffs)
        c = _trim(c)
        d = len(c) - 1
        zs = zeros.zeros
        if len(zs) != d:
            raise DomainError(f"expected {d} zeros, got {len(zs)}")
        ratios = [abs(mpmath.im(z)) / (abs(z) + 1) for z in zs]
        max_ratio = max(ratios) if ratios else mpf(0)
        imag_ok = max_ratio <= ctx.eps_real
        xs = [mpmath.re(z) for z in zs]
        pts = _brackets(xs, lo_hint=mpf(0), hi_hint=mpf(0))
        unit = mpmath.ldexp(mpf(1), 4 - ctx.bits)

        def f(t):
            v, _ = _horner(c, t)
            return v, unit * (d + 2) * _abs_eval(c, abs(t))

        changes = _count_sign_changes(f, pts)
        count_ok = changes == d
        if imag_ok != count_ok:
            raise InconsistencyError(
                f"realness certificates disagree: max imag ratio {mpmath.nstr(max_ratio, 5)}, "
                f"{changes} sign changes for degree {d}")
        all_real = imag_ok and count_ok
        all_neg = all_real and pts[-1] <= 0
        all_pos = all_real and pts[0] >= 0
        return RealnessReport(all_real, all_neg, all_pos, max_ratio, changes, d)


# ---------------------------------------------------------------------------
# entire functions


def _locate_once(spec, K, ctx, extra=0):
    """Zeros of a certified truncation; returns (zeros by modulus, N, R, tail, coeffs).

    ``R`` is the geometric mean of the K-th and (K+1)-th zero moduli, first
    estimated from the Newton polygon, then from the computed zeros.
    """
    tol0 = mpmath.ldexp(mpf(1), -(ctx.bits // 2))
    N = max(2 * K + 8, 16)
    radii = polygon_radii(_trim(coefficients(spec, N, ctx).coeffs))
    R = mpmath.sqrt(radii[K - 1] * radii[K])
    for _ in range(40):
        N = max(N, _certified_n(spec, R, ctx))
        c = _trim(coefficients(spec, N + extra, ctx).coeffs)
        zs, _ = aberth(c, tol0)
        zs = sorted((mpc(z) for z in zs), key=abs)
        R = mpmath.sqrt(abs(zs[K - 1]) * abs(zs[K]))
        if _certified_n(spec, R, ctx) <= N:
            return zs, len(c) - 1, R, _tail_at(spec, c, R), c
        N += 8
    raise GuardFailure("could not find a certified truncation separating the first K zeros",
                       {"K": K, "N": N})


def _certified_n(spec, R, ctx):
    """Truncation degree with tail below ``eps_id`` times the largest term on ``|x| = R``."""
    big = mpf(1)
    c = mpf(1)
    k = 0
    while True:
        c *= spec.ratio(k)
        k += 1
        t = abs(c) * R**k
        if t > big:
            big = t
        elif spec.ratio_sup(k) * R < mpf(0.5):
            break
    return truncation_degree(spec, R, ctx, tol=ctx.eps_id * big).N


def _tail_at(spec, c, R):
    n = len(c) - 1
    rho = R * spec.ratio_sup(n)
    if rho >= 1:
        return mpf("inf")
    return abs(c[n]) * R**n * rho / (1 - rho)


def _rouche_guard(c, zs, K, R, tail):
    samples = []
    for t in range(GUARD_SAMPLES):
        z = R * mpmath.expjpi(mpf(2 * t) / GUARD_SAMPLES)
        samples.append(abs(_horner(c, z)[0]))
    circle_min = min(samples)
    inner = sorted(zs[:K], key=_order_key)
    mids = [abs(_horner(c, (a + b) / 2)[0]) for a, b in zip(inner, inner[1:])]
    mid_min = min(mids) if mids else mpf("inf")
    return circle_min, mid_min


def locate_entire_zeros(spec: SeriesSpec, K: int, ctx=None, check_stability=True) -> ZeroSet:
    """The ``K`` smallest-modulus zeros of a non-terminating series.

    Zeros are in the series variable (``z**2`` for the q-Bessel families).
    The certificate records the truncation ``(N, R, tail)``, the sampled
    Rouche guard minima and the stability deltas under ``N -> N + 16`` and
    precision doubling.  The Rouche guard samples ``|p_N|`` on 256 points of
    ``|x| = R``; it is strong evidence, not an interval-arithmetic proof.
    """
    ctx = as_context(ctx)
    if spec.terminating:
        raise DomainError("terminating spec has finitely many zeros; use find_poly_roots")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    with ctx.workprec():
        zs, N, R, tail, c = _locate_once(spec, K, ctx)
        circle_min, mid_min = _rouche_guard(c, zs, K, R, tail)
        diag = {"N": N, "R": mpmath.nstr(R, 20), "tail": mpmath.nstr(tail, 6),
                "circle_min": mpmath.nstr(circle_min, 6), "midpoint_min": mpmath.nstr(mid_min, 6)}
        if not (circle_min > GUARD_MARGIN * tail and mid_min > tail):
            raise GuardFailure("sampled Rouche guard failed; raise precision or N", diag)
        inner = zs[:K]
        cert = {"N": N, "R": mpmath.nstr(R, 30), "tail": mpmath.nstr(tail, 10),
                "guard_circle_min": mpmath.nstr(circle_min, 10),
                "guard_midpoint_min": mpmath.nstr(mid_min, 10)}
        if check_stability:
            seq = coefficients(spec, N + STABILITY_EXTRA, ctx)
            c2 = _trim(seq.coeffs)
            zs2, _ = aberth(c2, mpmath.ldexp(mpf(1), -(ctx.bits // 2)))
            zs2 = sorted((mpc(z) for z in zs2), key=abs)[:K]
            d_n = _match_delta(inner, zs2)
            hi = ctx.doubled()
            with hi.workprec():
                zs3, *_ = _locate_once(spec, K, hi)
            d_p = _match_delta(inner, zs3[:K])
            cert["stability_N_plus_16"] = mpmath.nstr(d_n, 6)
            cert["stability_precision_doubled"] = mpmath.nstr(d_p, 6)
            worst = max(d_n, d_p)
            if worst > ctx.eps_real:
                raise GuardFailure("zeros moved under N+16 / precision doubling",
                                   dict(diag, stability=mpmath.nstr(worst, 6)))
            cert["stability"] = mpmath.nstr(worst, 6)
        out = _zero_set(c, inner, ctx, spec.to_dict(), cert)
        return out


def _match_delta(a, b):
    """Max relative distance between two root lists matched greedily by proximity."""
    if len(a) != len(b):
        return mpf("inf")
    rest = list(b)
    worst = mpf(0)
    for z in a:
        j = min(range(len(rest)), key=lambda i: abs(rest[i] - z))
        worst = max(worst, abs(rest[j] - z) / max(1, abs(z)))
        rest.pop(j)
    return worst


def certify_entire_zeros(spec: SeriesSpec, zeros: ZeroSet, ctx=None) -> RealnessReport:
    """Realness and sign certificate for zeros from :func:`locate_entire_zeros`.

    (i) imaginary parts below ``eps_real`` relative; (ii) certified sign
    changes of the series itself (value against its truncation tail) across
    brackets from 0 past the outermost zero, bounded by the Rouche radius.
    Combined with the guard's count of ``K`` zeros inside ``|x| < R`` this
    pins all ``K`` as real with the reported sign.
    """
    ctx = as_context(ctx)
    with ctx.workprec():
        zs = zeros.zeros
        K = len(zs)
        ratios = [abs(mpmath.im(z)) / (abs(z) + 1) for z in zs]
        max_ratio = max(ratios)
        imag_ok = max_ratio <= ctx.eps_real
        xs = [mpmath.re(z) for z in zs]
        R = num(zeros.certificate.get("R", max(abs(x) for x in xs) * 2))
        pts = _brackets(xs, lo_hint=mpf(0), hi_hint=mpf(0))
        # outer bracket: just inside the guard circle
        if pts[0] != 0:
            pts[0] = -R * (1 - mpf(2) ** -20) if xs[0] > -R else pts[0]
        if pts[-1] != 0:
            pts[-1] = R * (1 - mpf(2) ** -20) if xs[-1] < R else pts[-1]

        def f(t):
            # evaluate in the series variable: spec.variable is applied to a preimage
            v, cert = _evaluate_in_variable(spec, t, ctx)
            return mpmath.re(v), cert.tail + abs(mpmath.im(v))

        changes = _count_sign_changes(f, pts)
        count_ok = changes == K
        if imag_ok != count_ok:
            raise InconsistencyError(
                f"realness certificates disagree: max imag ratio {mpmath.nstr(max_ratio, 5)}, "
                f"{changes} sign changes for {K} zeros")
        all_real = imag_ok and count_ok
        return RealnessReport(all_real, all_real and pts[-1] <= 0, all_real and pts[0] >= 0,
                              max_ratio, changes, K)


def _evaluate_in_variable(spec, x, ctx):
    if spec.variable(mpf(2)) == 4:
        return evaluate(spec, mpmath.sqrt(mpc(x)), ctx)
    return evaluate(spec, x, ctx)


def hadamard_reconstruct(spec: SeriesSpec, K: int, z, ctx=None, zeros: ZeroSet | None = None):
    """``f(0) prod_{k<=K} (1 - x/zeta_k)`` over the first ``K`` located zeros."""
    ctx = as_context(ctx)
    with ctx.workprec():
        if zeros is None:
            zeros = locate_entire_zeros(spec, K, ctx, check_stability=False)
        x = spec.variable(num(z))
        out = mpf(1)
        for zeta in sorted(zeros.zeros, key=abs)[:K]:
            out *= 1 - x / zeta
        return out
