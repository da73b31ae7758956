import math

import numpy as np
import pytest

from ocekit import (
    CVaR,
    Entropic,
    Identity,
    LossVector,
    MeanVariance,
    SoftCVaR,
    inverted_oce_empirical,
    k_slice_average,
    lipschitz_on,
    loss_moments,
    oce_empirical,
)

from _oracles import grid_oce, grid_oce_negated_sample, grid_roce, phi_array


def _spec_and_params(kind, rng, bound_m):
    if kind == "identity":
        return Identity(), ()
    if kind == "entropic":
        g = float(rng.uniform(0.1, 2.0))
        return Entropic(g), (g,)
    if kind == "meanvar":
        c = float(rng.uniform(0.05, 1.0)) / (2.0 * bound_m)
        return MeanVariance(c), (c,)
    if kind == "cvar":
        a = float(rng.uniform(0.1, 1.0))
        return CVaR(a), (a,)
    g1 = 1.0 + float(rng.uniform(0.1, 2.0))
    g2 = float(rng.uniform(0.0, 0.9))
    return SoftCVaR(g1, g2), (g1, g2)


KINDS = ("identity", "entropic", "meanvar", "cvar", "softcvar")


def test_loss_moments_pinned():
    assert loss_moments(LossVector(np.array([1.0, 3.0]))) == (2.0, 1.0)
    assert loss_moments(LossVector(np.array([2.0, 2.0, 2.0]))) == (2.0, 0.0)
    assert loss_moments(LossVector(np.array([0.0, 0.0, 4.0, 4.0]))) == (2.0, 2.0)


def test_k_slice_average_pinned():
    lv = LossVector(np.array([4.0, 1.0, 3.0, 2.0]))
    assert k_slice_average(lv, 2, largest=False) == 1.5
    assert k_slice_average(lv, 1, largest=True) == 4.0
    assert k_slice_average(lv, 4, largest=True) == 2.5
    assert k_slice_average(lv, 4, largest=False) == 2.5
    with pytest.raises(ValueError):
        k_slice_average(lv, 5)
    with pytest.raises(ValueError):
        k_slice_average(lv, 0)


def test_k_slice_average_order_invariant():
    rng = np.random.default_rng(6)
    v = rng.uniform(0, 1, size=9)
    shuffled = v[rng.permutation(9)]
    for k in range(1, 10):
        assert k_slice_average(LossVector(v, 1.0), k) == k_slice_average(
            LossVector(shuffled, 1.0), k
        )


def test_oce_pinned_examples():
    lv = LossVector(np.array([1.0, 2.0, 3.0, 4.0]))
    assert oce_empirical(lv, Identity()).value == 2.5
    res = oce_empirical(lv, CVaR(0.5))
    assert res.value == 3.5 and res.lambda_star == 3.0
    res = oce_empirical(LossVector(np.array([0.0, 2.0])), Entropic(1.0))
    assert res.value == pytest.approx(math.log((1 + math.e**2) / 2), abs=1e-12)
    res = oce_empirical(LossVector(np.array([1.0, 3.0])), MeanVariance(0.25))
    assert res.value == pytest.approx(2.25) and res.lambda_star == pytest.approx(2.0)


def test_inverted_oce_pinned_examples():
    lv = LossVector(np.array([1.0, 2.0, 3.0, 4.0]))
    assert inverted_oce_empirical(lv, Identity()).value == 2.5
    res = inverted_oce_empirical(lv, CVaR(0.5))
    assert res.value == 1.5 and res.lambda_star == 2.0
    res = inverted_oce_empirical(LossVector(np.array([0.0, 2.0])), Entropic(1.0))
    assert res.value == pytest.approx(-math.log((1 + math.exp(-2)) / 2), abs=1e-12)
    # restricted anchor: mean 2 stays right of max + floor = 3 - 2 = 1
    res = inverted_oce_empirical(LossVector(np.array([1.0, 3.0])), MeanVariance(0.25))
    assert res.value == pytest.approx(1.75) and res.lambda_star == pytest.approx(2.0)


def test_identity_reports_canonical_anchor():
    lv = LossVector(np.array([0.3, 0.9, 0.1]))
    assert oce_empirical(lv, Identity()).lambda_star == 0.0
    assert inverted_oce_empirical(lv, Identity()).lambda_star == 0.0


def test_cvar_order_statistic_equivalence_small():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        v = rng.uniform(0.0, 2.0, size=n)
        lv = LossVector(v, 2.0)
        for k in range(1, n + 1):
            spec = CVaR(k / n)
            assert oce_empirical(lv, spec).value == pytest.approx(
                k_slice_average(lv, k, largest=True), abs=1e-12
            )
            assert inverted_oce_empirical(lv, spec).value == pytest.approx(
                k_slice_average(lv, k, largest=False), abs=1e-12
            )


def test_cvar_anchor_is_the_order_statistic():
    v = np.array([0.5, 1.5, 2.5, 3.5, 4.0])
    lv = LossVector(v)
    res = oce_empirical(lv, CVaR(0.4))  # k = 2
    assert res.lambda_star == 3.5
    res = inverted_oce_empirical(lv, CVaR(0.4))
    assert res.lambda_star == 1.5


def test_ternary_matches_closed_forms():
    rng = np.random.default_rng(8)
    for kind in ("identity", "entropic", "meanvar"):
        for _ in range(40):
            n = int(rng.integers(1, 20))
            m = float(rng.uniform(0.5, 4.0))
            v = rng.uniform(0.0, m, size=n)
            lv = LossVector(v, m)
            spec, _ = _spec_and_params(kind, rng, m)
            auto = oce_empirical(lv, spec)
            forced = oce_empirical(lv, spec, method="ternary")
            assert auto.solver == "closed_form"
            assert forced.solver == "ternary_search"
            assert forced.value == pytest.approx(auto.value, abs=1e-9 * (1 + m))
            auto_r = inverted_oce_empirical(lv, spec)
            forced_r = inverted_oce_empirical(lv, spec, method="ternary")
            assert forced_r.value == pytest.approx(auto_r.value, abs=1e-9 * (1 + m))


def test_cvar_fractional_level_uses_ternary():
    lv = LossVector(np.array([1.0, 2.0, 3.0]))
    res = oce_empirical(lv, CVaR(0.5))  # n*alpha = 1.5
    assert res.solver == "ternary_search"
    got, _ = grid_oce(lv.values, "cvar", (0.5,), 3.0)
    assert res.value == pytest.approx(got, abs=1e-6 * 4)
    res = oce_empirical(lv, CVaR(2.0 / 3.0))  # n*alpha = 2 up to float noise
    assert res.solver == "closed_form"
    assert res.value == 2.5


def test_result_value_consistent_with_anchor():
    # value equals the objective evaluated at lambda_star
    rng = np.random.default_rng(9)
    for kind in KINDS:
        for _ in range(30):
            n = int(rng.integers(1, 15))
            m = float(rng.uniform(0.5, 3.0))
            v = rng.uniform(0.0, m, size=n)
            lv = LossVector(v, m)
            spec, params = _spec_and_params(kind, rng, m)
            res = oce_empirical(lv, spec)
            assert 0.0 <= res.lambda_star <= m
            zeta = res.lambda_star + float(
                np.mean(phi_array(kind, params, v - res.lambda_star))
            )
            assert res.value == pytest.approx(zeta, abs=1e-9 * (1 + m))
            res = inverted_oce_empirical(lv, spec)
            assert 0.0 <= res.lambda_star <= m
            xi = res.lambda_star - float(
                np.mean(phi_array(kind, params, res.lambda_star - v))
            )
            assert res.value == pytest.approx(xi, abs=1e-9 * (1 + m))


def test_ordering_chain_small():
    rng = np.random.default_rng(10)
    for kind in KINDS:
        for _ in range(60):
            n = int(rng.integers(1, 25))
            m = float(rng.uniform(0.5, 5.0))
            v = rng.uniform(0.0, m, size=n)
            lv = LossVector(v, m)
            spec, _ = _spec_and_params(kind, rng, m)
            mean, _ = loss_moments(lv)
            o = oce_empirical(lv, spec).value
            r = inverted_oce_empirical(lv, spec).value
            lip = lipschitz_on(spec, m)
            assert -1e-9 <= r <= mean + 1e-9 <= o + 2e-9 <= lip * mean + 3e-9


def test_shift_additivity():
    rng = np.random.default_rng(11)
    for kind in KINDS:
        for _ in range(20):
            n = int(rng.integers(1, 15))
            m = float(rng.uniform(0.5, 3.0))
            s = float(rng.uniform(0.0, 2.0))
            v = rng.uniform(0.0, m, size=n)
            spec, _ = _spec_and_params(kind, rng, m + s)
            base_o = oce_empirical(LossVector(v, m), spec).value
            base_r = inverted_oce_empirical(LossVector(v, m), spec).value
            shift_o = oce_empirical(LossVector(v + s, m + s), spec).value
            shift_r = inverted_oce_empirical(LossVector(v + s, m + s), spec).value
            assert shift_o == pytest.approx(base_o + s, abs=1e-9 * (1 + m + s))
            assert shift_r == pytest.approx(base_r + s, abs=1e-9 * (1 + m + s))


def test_monotonicity_in_losses():
    rng = np.random.default_rng(12)
    for kind in KINDS:
        for _ in range(20):
            n = int(rng.integers(1, 15))
            m = 2.0
            v1 = rng.uniform(0.0, 1.0, size=n)
            v2 = v1 + rng.uniform(0.0, 1.0, size=n)
            spec, _ = _spec_and_params(kind, rng, m)
            o1 = oce_empirical(LossVector(v1, m), spec).value
            o2 = oce_empirical(LossVector(v2, m), spec).value
            assert o1 <= o2 + 1e-9
            r1 = inverted_oce_empirical(LossVector(v1, m), spec).value
            r2 = inverted_oce_empirical(LossVector(v2, m), spec).value
            assert r1 <= r2 + 1e-9


def test_mixture_superadditivity():
    # oce of a concatenation dominates the mixture of the parts' oces
    rng = np.random.default_rng(13)
    for kind in KINDS:
        for _ in range(20):
            na = int(rng.integers(1, 12))
            nb = int(rng.integers(1, 12))
            m = float(rng.uniform(0.5, 3.0))
            a = rng.uniform(0.0, m, size=na)
            b = rng.uniform(0.0, m, size=nb)
            spec, _ = _spec_and_params(kind, rng, m)
            both = oce_empirical(LossVector(np.concatenate([a, b]), m), spec).value
            part_a = oce_empirical(LossVector(a, m), spec).value
            part_b = oce_empirical(LossVector(b, m), spec).value
            frac = na / (na + nb)
            assert both >= frac * part_a + (1 - frac) * part_b - 1e-9


def test_inversion_identity_against_widened_oracle():
    # roce(f) = -oce(-f) with the negated problem solved on [-M, M]
    rng = np.random.default_rng(14)
    for kind in KINDS:
        for _ in range(10):
            n = int(rng.integers(1, 10))
            m = float(rng.uniform(0.5, 2.0))
            v = rng.uniform(0.0, m, size=n)
            spec, params = _spec_and_params(kind, rng, m)
            r = inverted_oce_empirical(LossVector(v, m), spec).value
            neg = grid_oce_negated_sample(v, kind, params, m)
            assert r == pytest.approx(-neg, abs=5e-5 * (1 + m))


def test_solver_matches_grid_oracle_spot():
    rng = np.random.default_rng(15)
    for kind in KINDS:
        for _ in range(10):
            m = float(rng.uniform(0.5, 3.0))
            n = int(rng.integers(20, 40)) if kind in ("cvar", "softcvar") else int(rng.integers(1, 12))
            v = rng.uniform(0.0, m, size=n)
            if kind == "cvar":
                spec, params = CVaR(float(rng.uniform(0.3, 1.0))), None
                params = (spec.alpha,)
            elif kind == "softcvar":
                spec = SoftCVaR(1.0 + float(rng.uniform(0.1, 1.2)), float(rng.uniform(0.0, 0.5)))
                params = (spec.gamma1, spec.gamma2)
            else:
                spec, params = _spec_and_params(kind, rng, m)
                if kind == "meanvar":
                    spec = MeanVariance(spec.c / 2.0)
                    params = (spec.c,)
            tol = 1e-6 * (1.0 + m)
            res = oce_empirical(LossVector(v, m), spec)
            want, _ = grid_oce(v, kind, params, m)
            assert abs(res.value - want) <= tol
            res = inverted_oce_empirical(LossVector(v, m), spec)
            want, _ = grid_roce(v, kind, params, m)
            assert abs(res.value - want) <= tol


def test_loss_vector_validation():
    with pytest.raises(ValueError):
        LossVector(np.array([-0.1, 0.5]))
    with pytest.raises(ValueError):
        LossVector(np.array([0.5, 2.0]), 1.0)
    with pytest.raises(ValueError):
        LossVector(np.array([]))
    with pytest.raises(ValueError):
        LossVector(np.array([0.5, np.nan]))
    with pytest.raises(ValueError):
        LossVector(np.array([[0.5]]))
    with pytest.raises(ValueError):
        LossVector(np.array([0.5]), 0.0)
    lv = LossVector([0.25, 0.75])
    assert lv.bound_m == 0.75 and lv.n == 2
    assert LossVector(np.zeros(3)).bound_m == 1.0


def test_method_argument_validation():
    lv = LossVector(np.array([0.5]))
    with pytest.raises(ValueError):
        oce_empirical(lv, Identity(), method="grid")
    with pytest.raises(ValueError):
        inverted_oce_empirical(lv, Identity(), method="newton")


def test_constant_losses_collapse_everywhere():
    lv = LossVector(np.full(5, 1.5), 2.0)
    rng = np.random.default_rng(16)
    for kind in KINDS:
        spec, _ = _spec_and_params(kind, rng, 2.0)
        assert oce_empirical(lv, spec).value == pytest.approx(1.5, abs=1e-9)
        assert inverted_oce_empirical(lv, spec).value == pytest.approx(1.5, abs=1e-9)
