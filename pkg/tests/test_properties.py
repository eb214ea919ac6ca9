"""Property-based tests of the algebraic invariants."""

import mpmath
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from mpmath import mpf

from qzeros import (PrecisionContext, RamanujanA, certify_real_roots, closure_transform,
                    coefficients, evaluate, find_poly_roots, pf_finite_via_roots, qpoch_finite,
                    qpoch_infinite, qpoch_multi, rising_factorial, toeplitz_minors)

CTX = PrecisionContext(256)
FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

bases = st.floats(0.05, 0.95)
small = st.floats(-3, 3)
n_small = st.integers(0, 12)


@FAST
@given(small, bases, n_small)
def test_qpoch_finite_step(a, q, n):
    with CTX.workprec():
        # q^n is accumulated by repeated products, so allow a few ulps per factor
        lhs = qpoch_finite(a, q, n + 1)
        rhs = qpoch_finite(a, q, n) * (1 - mpf(a) * mpf(q) ** n)
        scale = qpoch_multi([abs(a)], -q, n + 1) if a else 1
        assert abs(lhs - rhs) <= (n + 2) * 4 * mpf(2) ** -256 * max(abs(lhs), abs(scale), 1)


@FAST
@given(st.floats(-0.9, 0.9), bases, n_small)
def test_qpoch_finite_times_tail_product(a, q, n):
    with CTX.workprec():
        full, t_full = qpoch_infinite(a, q, CTX)
        part, t_part = qpoch_infinite(mpf(a) * mpf(q) ** n, q, CTX)
        combined = qpoch_finite(a, q, n) * part
        assume(full != 0)
        assert abs(mpmath.log(abs(combined / full))) <= t_full + t_part + mpf(2) ** -200


@FAST
@given(small, bases, n_small)
def test_qpoch_multi_singleton(a, q, n):
    with CTX.workprec():
        assert qpoch_multi([a], q, n) == qpoch_finite(a, q, n)


@FAST
@given(st.floats(-5, 5), n_small)
def test_rising_factorial_step(a, n):
    with CTX.workprec():
        assert rising_factorial(a, n + 1) == rising_factorial(a, n) * (mpf(a) + n)


@FAST
@given(bases, st.floats(0, 2), st.floats(-2, 2), st.floats(-4, 4), st.floats(-4, 4))
def test_two_evaluations_agree_within_tails(q, alpha, a, x, y):
    spec = RamanujanA(alpha, q, a=a)
    z = mpmath.mpc(x, y)
    assume(alpha > 0.05 or abs(z) < 0.5)
    v1, c1 = evaluate(spec, z, CTX)
    v2, c2 = evaluate(spec, z, CTX, tol=CTX.eps_id * mpf(2) ** -40)
    with CTX.workprec():
        assert abs(v1 - v2) <= c1.tail + c2.tail + mpf(2) ** -220 * max(1, abs(v1))


@FAST
@given(bases, st.floats(0, 2), st.integers(1, 8), st.floats(-3, 3))
def test_terminating_evaluation_is_polynomial(q, alpha, n, x):
    spec = RamanujanA(alpha, q, n=n)
    seq = coefficients(spec, n, CTX).coeffs
    value, cert = evaluate(spec, x, CTX)
    with CTX.workprec():
        direct = mpf(0)
        xp = mpf(1)
        for c in seq:
            direct += c * xp
            xp *= mpf(x)
        assert value == direct and cert.tail == 0


roots_lists = st.lists(st.floats(-20, 20).filter(lambda r: abs(r) > 0.05), min_size=1, max_size=8)


def _poly_from_roots(roots):
    p = [mpf(1)]
    for r in roots:
        p = [(p[k] if k < len(p) else 0) * -mpf(r) + (p[k - 1] if k >= 1 else 0)
             for k in range(len(p) + 1)]
    return p


@FAST
@given(roots_lists)
def test_roots_reconstruct_coefficients(roots):
    roots = sorted(set(round(r, 3) for r in roots))
    assume(all(b - a > 0.05 for a, b in zip(roots, roots[1:])))
    with CTX.workprec():
        c = _poly_from_roots(roots)
        zs = find_poly_roots(c, CTX)
        assert len(zs) == len(roots)
        back = [mpf(1)]
        for z in zs.zeros:
            back = [(back[k] if k < len(back) else 0) * -z + (back[k - 1] if k >= 1 else 0)
                    for k in range(len(back) + 1)]
        scale = max(abs(x) for x in c)
        for x, y in zip(c, back):
            assert abs(x - y) <= CTX.eps_real * scale
        rep = certify_real_roots(c, zs, CTX)
        assert rep.all_real and rep.sign_change_count == len(roots)


@FAST
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=9))
def test_conjugate_closure(coeffs):
    assume(abs(coeffs[-1]) > 0.1 and abs(coeffs[0]) > 0.1)
    try:
        zs = find_poly_roots(coeffs, CTX)
    except ArithmeticError:
        assume(False)
    with CTX.workprec():
        for z in zs.zeros:
            assert min(abs(w - mpmath.conj(z)) for w in zs.zeros) <= CTX.eps_real * (1 + abs(z))


# dyadic roots keep every coefficient exact, so repeated roots stay repeated
dyadic = st.integers(1, 64).map(lambda k: k / 8)
nonneg_roots = st.lists(dyadic, min_size=1, max_size=8)


@FAST
@given(nonneg_roots, st.integers(2, 10), st.integers(1, 4))
def test_pf_implies_nonnegative_minors(roots, w, m):
    assume(m <= w)
    with CTX.workprec():
        seq = _poly_from_roots([-r for r in roots])
    assert pf_finite_via_roots(seq, CTX)
    assert toeplitz_minors(seq, w, m, CTX).pf_consistent


@FAST
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.lists(dyadic, min_size=n, max_size=n),
                                                     st.lists(dyadic, min_size=n, max_size=n))))
def test_closure_properties(pair):
    ra, rb = pair
    with CTX.workprec():
        a = _poly_from_roots([-r for r in ra])
        b = _poly_from_roots([-r for r in rb])
    assert pf_finite_via_roots(closure_transform("hadamard", a, b, CTX), CTX)
    assert pf_finite_via_roots(closure_transform("divide_factorial", a, ctx=CTX), CTX)
    assert pf_finite_via_roots(closure_transform("factorial_hadamard", a, b, CTX), CTX)


@FAST
@given(st.lists(st.floats(0, 10), min_size=1, max_size=7))
def test_minor_report_deterministic(seq):
    w = len(seq)
    m = min(w, 3)
    r1, r2 = toeplitz_minors(seq, w, m, CTX), toeplitz_minors(seq, w, m, CTX)
    assert r1.to_dict() == r2.to_dict()
