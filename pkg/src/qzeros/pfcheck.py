"""Total-positivity checks for coefficient sequences.

``toeplitz_minors`` is only a necessary-condition check (finitely many
minors of finite order).  For finite nonnegative sequences the root test
:func:`pf_finite_via_roots` is the exact oracle.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf

from .errors import CostGuardError, DomainError
from .qcore import as_context, num
from .roots import certify_real_roots, find_poly_roots
from .series import CoefficientSequence, from_values

MAX_ORDER = 5
MAX_WINDOW = 14
MINOR_BUDGET = math.comb(MAX_WINDOW, MAX_ORDER) ** 2


def _as_sequence(seq, ctx) -> CoefficientSequence:
    if isinstance(seq, CoefficientSequence):
        return seq
    return from_values(seq, ctx)


def fingerprint(seq: CoefficientSequence) -> str:
    return hashlib.sha256(seq.to_json().encode()).hexdigest()[:16]


@dataclass
class MinorReport:
    """Minors of order <= ``max_order`` of the ``window`` x ``window`` Toeplitz block.

    A clean report is necessary, not sufficient, for the PF property.
    """

    window: int
    max_order: int
    min_minor: object
    violating_minor: tuple | None
    pf_consistent: bool
    minors_checked: int = 0
    exact_evaluations: int = 0
    fingerprint: str = ""

    def to_dict(self):
        v = None
        if self.violating_minor is not None:
            rows, cols, val = self.violating_minor
            v = {"rows": list(rows), "cols": list(cols), "value": mpmath.nstr(val, 20)}
        return {"window": self.window, "max_order": self.max_order,
                "min_minor": mpmath.nstr(self.min_minor, 20), "violating_minor": v,
                "pf_consistent": self.pf_consistent, "minors_checked": self.minors_checked,
                "sequence_fingerprint": self.fingerprint,
                "note": "finite-order minors are necessary only; PF is not decided here"}


def _pairs(w, k):
    """Row/column index sets of size ``k``; shifts of a Toeplitz minor repeat its value,
    so only pairs touching index 0 are distinct."""
    combos = list(itertools.combinations(range(w), k))
    rows, cols = [], []
    for r in combos:
        for c in combos:
            if r[0] == 0 or c[0] == 0:
                rows.append(r)
                cols.append(c)
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _leibniz_float(sub):
    k = sub.shape[1]
    det = np.zeros(sub.shape[0])
    perm = np.zeros(sub.shape[0])
    idx = np.arange(k)
    for p in itertools.permutations(range(k)):
        prod = np.prod(sub[:, idx, list(p)], axis=1)
        det += _perm_sign(p) * prod
        perm += np.abs(prod)
    return det, perm


def _leibniz_mp(a, rows, cols):
    k = len(rows)
    total = mpf(0)
    for p in itertools.permutations(range(k)):
        prod = mpf(_perm_sign(p))
        for i in range(k):
            d = cols[p[i]] - rows[i]
            if d < 0 or d >= len(a) or a[d] == 0:
                prod = 0
                break
            prod *= a[d]
        total += prod
    return total


def toeplitz_minors(seq, w: int, m: int, ctx=None, budget: int = MINOR_BUDGET) -> MinorReport:
    """Enumerate every minor of order ``<= m`` of ``(a_{j-i})_{i,j<w}``.

    Minors are screened in float64 with a Leibniz-sum error bound; any
    minor the screen cannot certify nonnegative is recomputed exactly at
    working precision.  ``pf_consistent`` means no minor is below ``-eps_id``.
    """
    ctx = as_context(ctx)
    seq = _as_sequence(seq, ctx)
    if m < 1 or w < 1:
        raise DomainError("window and order must be >= 1")
    if m > min(w, MAX_ORDER):
        raise DomainError(f"order m={m} exceeds min(window, {MAX_ORDER})")
    if w > len(seq) and not seq.terminating:
        raise DomainError(f"window {w} exceeds the {len(seq)} available coefficients")
    cost = sum(math.comb(w, k) ** 2 for k in range(1, m + 1))
    if cost > budget:
        raise CostGuardError(f"{cost} minors exceed the budget {budget}")
    with ctx.workprec():
        a = [num(x) for x in seq.coeffs[:w]] + [mpf(0)] * max(0, w - len(seq))
        af = np.array([float(x) for x in a])
        floatable = all(
            (x == 0 or 1e-290 < abs(f) < 1e290) for x, f in zip(a, af))
        T = np.zeros((w, w))
        for i in range(w):
            for j in range(i, w):
                T[i, j] = af[j - i]
        unit = 2.0 ** -52
        min_minor = None
        violation = None
        checked = exact = 0
        for k in range(1, m + 1):
            R, C = _pairs(w, k)
            checked += len(R)
            if floatable:
                sub = T[R[:, :, None], C[:, None, :]]
                det, perm = _leibniz_float(sub)
                bound = (2 * k + math.factorial(k) + 4) * unit * perm
                safe = det - bound >= 0
            else:
                det = np.zeros(len(R))
                safe = np.zeros(len(R), dtype=bool)
            if safe.any():
                lo = mpf(float(det[safe].min()))
                min_minor = lo if min_minor is None else min(min_minor, lo)
            for idx in np.flatnonzero(~safe):
                rows, cols = tuple(int(x) for x in R[idx]), tuple(int(x) for x in C[idx])
                v = _leibniz_mp(a, rows, cols)
                exact += 1
                min_minor = v if min_minor is None else min(min_minor, v)
                if violation is None and v < -ctx.eps_id:
                    violation = (rows, cols, v)
        return MinorReport(w, m, min_minor, violation, violation is None, checked, exact,
                           fingerprint(seq))


# ---------------------------------------------------------------------------
# root-based PF oracle


def _fraction(x):
    sign, man, exp, _ = mpf(x)._mpf_
    if not man:
        return Fraction(0)
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def _poly_rem(a, b):
    a = list(a)
    while len(a) >= len(b) and any(a):
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] -= f * bc
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _poly_div(a, b):
    a = list(a)
    out = [Fraction(0)] * (len(a) - len(b) + 1)
    while len(a) >= len(b):
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        out[shift] = f
        for i, bc in enumerate(b):
            a[shift + i] -= f * bc
        a.pop()
    return out


def squarefree_part(coeffs):
    """``p / gcd(p, p')`` over the rationals (mpf inputs are exact dyadics)."""
    p = [_fraction(c) for c in coeffs]
    while p and p[-1] == 0:
        p.pop()
    if len(p) <= 2:
        return p
    a = p
    b = [i * c for i, c in enumerate(p)][1:]
    while b:
        a, b = b, _poly_rem(a, b)
    g = a
    return _poly_div(p, g) if len(g) > 1 else p


def pf_finite_via_roots(seq, ctx=None) -> bool:
    """PF test for a finite nonnegative sequence: all generating-polynomial zeros real and <= 0.

    Repeated factors are divided out exactly before root finding, so the
    Aberth/realness certificates only ever see simple zeros.
    """
    ctx = as_context(ctx)
    seq = _as_sequence(seq, ctx)
    with ctx.workprec():
        c = [num(x) for x in seq.coeffs]
        if any(x < 0 for x in c):
            raise DomainError("pf_finite_via_roots needs nonnegative entries")
        while c and c[-1] == 0:
            c.pop()
        while c and c[0] == 0:  # a zero root at 0 is nonpositive
            c.pop(0)
        if len(c) <= 1:
            return True
        sf = [mpf(x.numerator) / x.denominator for x in squarefree_part(c)]
        if len(sf) <= 1:
            return True
        zs = find_poly_roots(sf, ctx)
        rep = certify_real_roots(sf, zs, ctx)
        return rep.all_real and all(mpmath.re(z) <= 0 for z in zs.zeros)


def closure_transform(kind: str, a, b=None, ctx=None) -> CoefficientSequence:
    """PF-preserving transforms of finite nonnegative sequences.

    ``hadamard``: ``a_k b_k``; ``divide_factorial``: ``a_k / k!``;
    ``factorial_hadamard``: ``k! a_k b_k``.
    """
    ctx = as_context(ctx)
    a = _as_sequence(a, ctx)
    with ctx.workprec():
        av = [num(x) for x in a.coeffs]
        if any(x < 0 for x in av):
            raise DomainError("closure transforms need nonnegative inputs")
        if kind == "divide_factorial":
            out = [x / mpmath.factorial(k) for k, x in enumerate(av)]
        elif kind in ("hadamard", "factorial_hadamard"):
            if b is None:
                raise DomainError(f"{kind} needs a second sequence")
            bv = [num(x) for x in _as_sequence(b, ctx).coeffs]
            if any(x < 0 for x in bv):
                raise DomainError("closure transforms need nonnegative inputs")
            if len(av) != len(bv):
                raise DomainError(f"length mismatch: {len(av)} vs {len(bv)}")
            out = [x * y for x, y in zip(av, bv)]
            if kind == "factorial_hadamard":
                out = [x * mpmath.factorial(k) for k, x in enumerate(out)]
        else:
            raise DomainError(f"unknown closure transform {kind!r}")
    return from_values(out, ctx)


# ---------------------------------------------------------------------------
# Turan ratios and the sufficient condition


@dataclass
class RatioReport:
    ratios: list
    min_ratio: object
    passes_4: bool
    skipped: list = field(default_factory=list)
    fingerprint: str = ""

    def to_dict(self):
        return {"ratios": [mpmath.nstr(r, 25) for r in self.ratios],
                "min_ratio": mpmath.nstr(self.min_ratio, 40), "passes_4": self.passes_4,
                "skipped": self.skipped, "sequence_fingerprint": self.fingerprint}


def turan_ratios(seq, ctx=None) -> RatioReport:
    """``c_n^2 / (c_{n+1} c_{n-1})`` for every interior index, computed in log space."""
    ctx = as_context(ctx)
    seq = _as_sequence(seq, ctx)
    with ctx.workprec():
        c = [num(x) for x in seq.coeffs]
        if any(x < 0 for x in c):
            raise DomainError("turan_ratios expects nonnegative entries")
        logs = [mpmath.log(x) if x > 0 else None for x in c]
        ratios, skipped = [], []
        for n in range(1, len(c) - 1):
            if logs[n - 1] is None or logs[n + 1] is None:
                skipped.append(n)
                continue
            if logs[n] is None:
                ratios.append(mpf(0))
                continue
            ratios.append(mpmath.exp(2 * logs[n] - logs[n + 1] - logs[n - 1]))
        lo = min(ratios) if ratios else mpf("inf")
        return RatioReport(ratios, lo, lo >= 4 - ctx.eps_id, skipped, fingerprint(seq))


def product_condition(alpha, q, as_, bs, ctx=None):
    """``prod (1 - a_j) prod (1 - b_k q) >= 4 q^(2 alpha)``; returns ``(holds, lhs, rhs)``."""
    ctx = as_context(ctx)
    with ctx.workprec():
        alpha, q = num(alpha), num(q)
        if not (0 < q < 1):
            raise DomainError(f"q must lie in (0, 1), got {q}")
        if not alpha > 0:
            raise DomainError(f"alpha must be > 0, got {alpha}")
        lhs = mpf(1)
        for a in as_:
            a = num(a)
            if not (0 < a < 1):
                raise DomainError(f"a_j must lie in (0, 1), got {a}")
            lhs *= 1 - a
        for b in bs:
            b = num(b)
            if not (0 < b < 1):
                raise DomainError(f"b_k must lie in (0, 1), got {b}")
            lhs *= 1 - b * q
        rhs = 4 * q ** (2 * alpha)
        return lhs >= rhs, lhs, rhs
