import json

import mpmath
import pytest
from mpmath import mpc, mpf

from qzeros import (DomainError, GeneralizedQ, GuardFailure, InconsistencyError,
                    NonConvergenceError, PrecisionContext, QBessel, RamanujanA,
                    certify_entire_zeros, certify_real_roots, coefficients, evaluate,
                    find_poly_roots, locate_entire_zeros)
from qzeros.roots import aberth, hadamard_reconstruct


def reals(zs):
    return [mpmath.re(z) for z in zs.zeros]


def test_linear():
    zs = find_poly_roots([1, -1])
    assert zs.zeros == [1]
    rep = certify_real_roots([1, -1], zs)
    assert rep.all_real and rep.all_positive and not rep.all_negative


def test_quadratic_against_closed_form(oracle, ctx):
    zs = find_poly_roots([1, -3, mpf("0.5")], ctx)
    with mpmath.workprec(512):
        for z, ref in zip(zs.zeros, oracle["poly_n2_zeros"]):
            assert abs(z - mpf(ref)) <= mpf(10) ** -75


def test_complex_pair():
    zs = find_poly_roots([1, 0, 1])
    assert [mpmath.im(z) for z in zs.zeros] == [pytest.approx(-1), pytest.approx(1)]
    rep = certify_real_roots([1, 0, 1], zs)
    assert not rep.all_real and rep.sign_change_count == 0


def test_ordering_ascending_real_then_imag():
    zs = find_poly_roots([6, -5, 1, 0])  # degree 2 after trimming the zero leading term
    assert reals(zs) == sorted(reals(zs)) and len(zs) == 2


def test_degree_zero_rejected():
    with pytest.raises(DomainError):
        find_poly_roots([3])


def test_nonconvergence_carries_best_iterates():
    with pytest.raises(NonConvergenceError) as info:
        find_poly_roots([1, 2, 3, 4, 5, 6], max_sweeps=1)
    assert info.value.best is not None


def test_terminating_n5_certified_at_512_bits(oracle):
    ctx = PrecisionContext(512)
    seq = coefficients(RamanujanA(1, 0.5, n=5), 5, ctx)
    zs = find_poly_roots(seq, ctx)
    rep = certify_real_roots(seq, zs, ctx)
    assert rep.all_real and rep.all_positive and rep.sign_change_count == 5
    with mpmath.workprec(512):
        for z, ref in zip(zs.zeros, oracle["poly_n5_zeros"]):
            assert abs(z - mpf(ref)) <= mpf(10) ** -45 * abs(mpf(ref))


def test_residual_invariant(ctx):
    seq = coefficients(RamanujanA(1, 0.5, n=5), 5, ctx)
    zs = find_poly_roots(seq, ctx)
    scale = sum(abs(c) for c in seq.coeffs)
    for z, r in zip(zs.zeros, zs.residuals):
        assert r <= ctx.eps_id * scale * max(1, abs(z)) ** 5


def test_distinct_base_counterexample_has_complex_zeros(oracle, ctx):
    """Distinct bases with alpha = 0 break the all-negative-zeros pattern."""
    spec = GeneralizedQ(0, "0.131", orders=((5, "0.808"),), denominators=(("2.733", "0.583"),))
    seq = coefficients(spec, 5, ctx)
    zs = find_poly_roots(seq, ctx)
    with mpmath.workprec(512):
        for c, ref in zip(seq.coeffs, oracle["counterexample_poly_coeffs"]):
            assert abs(c - mpf(ref)) <= mpf(10) ** -25 * abs(mpf(ref))
        # the conjugate pair shares a real part, so match by proximity rather than position
        for re, im in oracle["counterexample_poly_zeros"]:
            assert min(abs(z - mpc(re, im)) for z in zs.zeros) <= mpf(10) ** -25
    rep = certify_real_roots(seq, zs, ctx)
    assert not rep.all_real and rep.sign_change_count == 3


def test_locate_ramanujan_entire(oracle, ctx):
    zs = locate_entire_zeros(RamanujanA(1, 0.5, a=0), 3, ctx)
    assert reals(zs) == sorted(reals(zs))
    by_mod = zs.by_modulus()
    assert [abs(z) for z in by_mod] == sorted(abs(z) for z in by_mod)
    with mpmath.workprec(512):
        for z, ref in zip(by_mod, oracle["ramanujan_entire_zeros_q05"]):
            assert abs(z - mpf(ref)) <= mpf(10) ** -60 * abs(mpf(ref))
    rep = certify_entire_zeros(RamanujanA(1, 0.5, a=0), zs, ctx)
    assert rep.all_real and rep.all_negative and rep.sign_change_count == 3
    cert = zs.certificate
    assert mpf(cert["stability"]) <= ctx.eps_real
    assert mpf(cert["guard_circle_min"]) > 4 * mpf(cert["tail"])


def test_qbessel_zeros_positive_and_increasing(oracle, ctx):
    spec = QBessel(2, 0, "0.3")
    zs = locate_entire_zeros(spec, 3, ctx)
    xs = reals(zs)
    assert all(x > 0 for x in xs) and xs == sorted(set(xs))
    with mpmath.workprec(512):
        for x, ref in zip(xs, oracle["qbessel2_nu0_q03_zeros"]):
            assert abs(x - mpf(ref)) <= mpf(10) ** -50 * mpf(ref)
    rep = certify_entire_zeros(spec, zs, ctx)
    assert rep.all_real and rep.all_positive


def test_qbessel_half_zero_sums(ctx):
    zs = locate_entire_zeros(QBessel(2, 0.5, 0.5), 6, ctx)
    xs = reals(zs)
    assert xs == sorted(set(xs)) and xs[0] > 0
    increments = [1 / x for x in xs]
    assert all(b < a for a, b in zip(increments, increments[1:]))


def test_locate_rejects_terminating_and_bad_k():
    with pytest.raises(DomainError):
        locate_entire_zeros(RamanujanA(1, 0.5, n=3), 2)
    with pytest.raises(DomainError):
        locate_entire_zeros(RamanujanA(1, 0.5, a=0), 0)


def test_hadamard_reconstruct(ctx):
    spec = RamanujanA(1, 0.5, a=0)
    assert hadamard_reconstruct(spec, 3, 0, ctx) == 1
    zs = locate_entire_zeros(spec, 8, ctx, check_stability=False)
    z = mpf("-0.1")
    value, _ = evaluate(spec, z, ctx)
    gap1 = abs(value - hadamard_reconstruct(spec, 1, z, ctx, zeros=zs))
    gap8 = abs(value - hadamard_reconstruct(spec, 8, z, ctx, zeros=zs))
    assert gap8 < gap1


def test_qbessel_product_vs_series(ctx):
    spec = QBessel(2, 0, 0.5)
    z = mpf("0.1")
    value, _ = evaluate(spec, z, ctx)
    prod = hadamard_reconstruct(spec, 8, z, ctx)
    assert abs(value - prod) / abs(value) < mpf(10) ** -6


def test_zeroset_json_shape(ctx):
    zs = find_poly_roots(coefficients(RamanujanA(1, 0.5, n=2), 2, ctx), ctx)
    d = json.loads(zs.to_json())
    assert set(d) == {"spec", "zeros", "all_real", "all_negative", "certificate"}
    assert d["spec"]["family"] == "ramanujan-a"
    assert set(d["zeros"][0]) == {"re", "im", "residual"}


def test_realness_disagreement_raises(ctx):
    # feed a fake near-real zero set for x^2 + 1: imaginary parts small, no sign changes
    fake = find_poly_roots([1, 0, 1], ctx)
    fake.zeros = [mpc(-1, 0), mpc(1, 0)]
    with pytest.raises(InconsistencyError):
        certify_real_roots([1, 0, 1], fake, ctx)


def test_aberth_tight_cluster_is_not_silently_merged(ctx):
    # (1+x)^3 has a triple zero; the dual certificate must not call it certified-real quietly
    c = [1, 3, 3, 1]
    try:
        zs = find_poly_roots(c, ctx)
        rep = certify_real_roots(c, zs, ctx)
    except (NonConvergenceError, InconsistencyError, GuardFailure):
        return
    assert rep.sign_change_count in (1, 3)


def test_distinct_base_entire_counterexample(oracle, ctx):
    """An entire instance with independent bases and small alpha has a complex zero pair."""
    spec = GeneralizedQ("0.1", "0.412", shifts=(("0.03", "0.722"),),
                        denominators=(("2.299", "0.573"),))
    zs = locate_entire_zeros(spec, 5, ctx)
    with mpmath.workprec(256):
        re, im = (mpf(x) for x in oracle["counterexample_entire_zero"])
        for sign in (-1, 1):
            assert min(abs(z - mpc(re, sign * im)) for z in zs.zeros) <= mpf(10) ** -35
    rep = certify_entire_zeros(spec, zs, ctx)
    assert not rep.all_real and rep.sign_change_count == 3
