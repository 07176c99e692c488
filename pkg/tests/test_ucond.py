from __future__ import annotations

import math

import numpy as np
import pytest

from ucondlab.errors import CauchyFailure, NoOracle, NotLocal, NotScalar, ShapeMismatch, UnboundedMultiplier
from ucondlab.instances import (
    alternating_harmonic,
    alternating_inverse_square,
    basis_over_n,
    inverse_square_basis,
    sup_norm_basis,
)
from ucondlab.seqvec import SeqVector
from ucondlab.ucond import (
    TailOracle,
    coordinate_field,
    finite_space,
    indicator,
    integers,
    integrate_over,
    make_field,
    multiply_linf,
    naturals,
    pseudo_bound,
    scalar_variation_bound,
    truncate_to_local,
    u_integrate,
    uniform_tail_set,
)

# sum_{n<=100} 1/n^2, from exact rational arithmetic
SUM_INV_SQ_100 = 1.634983900184893
# sum_{n<=999} 1/n^2, same oracle
SUM_INV_SQ_999 = 1.6439335666815598


def scalar_inverse_square():
    return make_field(naturals(), lambda n: 1.0 / n**2, batch=lambda ix: 1.0 / ix.astype(float) ** 2)


class TestSpaces:
    def test_integer_enumeration_order(self):
        Z = integers()
        assert [Z.point_at(i) for i in range(7)] == [0, 1, -1, 2, -2, 3, -3]
        assert all(Z.position(Z.point_at(i)) == i for i in range(50))
        np.testing.assert_array_equal(Z.points_at(range(0, 7)), [0, 1, -1, 2, -2, 3, -3])

    def test_exhaustion_is_nested(self):
        for space in (naturals(), integers(), finite_space("abcde")):
            prev = set()
            for k in range(6):
                L = set(space.exhaustion(k))
                assert prev <= L and space.is_local(L)
                prev = L

    def test_local_family_closure(self):
        N = naturals()
        assert N.is_local({1, 5} | {7})
        assert N.is_local(set())
        assert not N.is_local({0, 1})
        assert not N.is_local([1.5])
        with pytest.raises(NotLocal):
            N.check_local({-3})
        with pytest.raises(NotLocal):
            finite_space([1, 2]).check_local([3])

    def test_check_local_orders_along_enumeration(self):
        assert integers().check_local({-1, 2, 0}) == (0, -1, 2)
        assert naturals().check_local({3, 4, 5}) == range(3, 6)


class TestIntegrateOver:
    def test_two_basis_vectors(self):
        v = integrate_over(basis_over_n(), {1, 2})
        assert v.to_dict() == {1: 1.0, 2: 0.5}

    def test_empty_set_gives_zero(self):
        assert integrate_over(basis_over_n(), set()).norm() == 0.0
        np.testing.assert_array_equal(integrate_over(scalar_inverse_square(), []), 0.0)

    def test_inverse_square_partial_sum(self):
        f = scalar_inverse_square()
        assert complex(integrate_over(f, range(1, 101))) == pytest.approx(SUM_INV_SQ_100, abs=1e-14)
        # the generic loop path sums in the opposite order
        g = make_field(naturals(), lambda n: 1.0 / n**2)
        assert complex(integrate_over(g, list(range(100, 0, -1)))) == pytest.approx(SUM_INV_SQ_100, abs=1e-14)

    def test_point_masses_weight_the_sum(self):
        S = finite_space(["a", "b"], mass=lambda s: 2.0 if s == "a" else 0.5)
        f = make_field(S, lambda s: np.array([1.0, 1.0]), shape=(2,))
        np.testing.assert_allclose(integrate_over(f, ["a", "b"]), [2.5, 2.5])

    def test_shape_mismatch(self):
        f = make_field(naturals(), lambda n: np.ones(3 if n == 2 else 2), shape=(2,))
        with pytest.raises(ShapeMismatch):
            integrate_over(f, [1, 2])

    def test_not_local(self):
        with pytest.raises(NotLocal):
            integrate_over(basis_over_n(), [0])

    def test_huge_range_stays_lazy(self):
        v = integrate_over(basis_over_n(), range(1, 10**8 + 1))
        assert v.n_stored == 10**8
        assert v.entries([1, 10**8, 10**8 + 1]).tolist() == [1.0, 1e-8, 0.0]


class TestUIntegrate:
    def test_basis_over_n_proof_certificate(self):
        cert = u_integrate(basis_over_n(), 1e-3)
        assert cert.status == "proof"
        assert cert.witness_set == range(1, 1_000_001)  # minimal N with zeta(2, N+1) < 1e-6
        assert cert.bound < 1e-3
        assert all(norm < 1e-3 for _, _, norm in cert.probes)
        dist = math.sqrt(cert.bound**2)  # the value is the exact partial sum on the witness set
        assert dist < 1e-3

    def test_trace_distances_are_tails(self):
        cert = u_integrate(basis_over_n(), 1e-3)
        n = len(cert.witness_set)
        for prefix, dist in cert.trace:
            r = n - len(prefix)
            expected = math.sqrt(sum(1.0 / k**2 for k in range(n - r + 1, n + 1)))
            assert dist == pytest.approx(expected, rel=1e-9, abs=1e-300)

    def test_finite_support_is_exact(self):
        S = finite_space(range(6))
        vals = {0: 1.0, 3: -2.0}
        f = make_field(S, lambda s: np.array([vals.get(s, 0.0)]), shape=(1,),
                       oracles=(TailOracle("finite-support", support=(0, 3)),))
        cert = u_integrate(f, 0.0)
        assert cert.status == "exact" and cert.epsilon == 0.0
        np.testing.assert_array_equal(cert.value, integrate_over(f, (0, 3)))

    def test_finite_space_without_oracle(self):
        S = finite_space("xyz", mass=0.5)
        f = make_field(S, lambda s: np.array([ord(s)], dtype=float), shape=(1,))
        cert = u_integrate(f, 0.0)
        assert cert.status == "exact"
        assert cert.value[0] == pytest.approx(0.5 * (ord("x") + ord("y") + ord("z")))

    def test_wrong_finite_support_oracle_is_caught(self):
        f = make_field(naturals(), lambda n: np.array([1.0 if n == 7 else 0.0]), shape=(1,),
                       oracles=(TailOracle("finite-support", support=(1, 2)),))
        with pytest.raises(CauchyFailure) as info:
            u_integrate(f, 0.1)
        assert 7 in set(np.asarray(info.value.violating_set).tolist())

    def test_alternating_harmonic_fails(self):
        f = alternating_harmonic()
        with pytest.raises(CauchyFailure) as info:
            u_integrate(f, 1e-3)
        D = np.asarray(info.value.violating_set)
        partial = sum((-1.0) ** n / n for n in D.tolist())
        assert abs(partial) > 1.0
        assert abs(partial) == pytest.approx(info.value.norm, rel=1e-9)
        assert D.min() > len(info.value.candidate)

    def test_sup_norm_basis_fails_at_half(self):
        with pytest.raises(CauchyFailure) as info:
            u_integrate(sup_norm_basis(), 0.5)
        assert info.value.norm == 1.0

    def test_evidence_for_summable_field_without_oracle(self):
        f = make_field(naturals(), lambda n: 1.0 / n**2, batch=lambda ix: 1.0 / ix.astype(float) ** 2)
        cert = u_integrate(f, 1e-3, cutoff=10**5)
        assert cert.status == "evidence"
        assert "cutoff=100000" in cert.policy
        assert complex(cert.value).real == pytest.approx(math.pi**2 / 6, abs=1e-4)

    def test_negative_eps(self):
        with pytest.raises(ValueError):
            u_integrate(basis_over_n(), -1.0)


class TestPseudoBound:
    def test_sup_norm_basis(self):
        sample = [{1}, range(1, 50), {4, 9, 400}]
        assert pseudo_bound(sup_norm_basis(), sample) == 1.0

    def test_zero_field(self):
        f = make_field(naturals(), lambda n: 0.0)
        assert pseudo_bound(f, [range(1, 10), {3}]) == 0.0

    def test_exact_supremum_on_power_set(self):
        from itertools import combinations

        S = finite_space(range(4))
        f = make_field(S, lambda s: float(s + 1))
        subsets = [c for k in range(5) for c in combinations(range(4), k)]
        assert pseudo_bound(f, subsets) == 10.0

    def test_not_local(self):
        with pytest.raises(NotLocal):
            pseudo_bound(basis_over_n(), [{0}])


class TestScalarVariation:
    def test_nonnegative_equals_pseudo_bound(self):
        f = scalar_inverse_square()
        sample = [range(1, 20), range(3, 9)]
        assert scalar_variation_bound(f, sample) == pytest.approx(pseudo_bound(f, sample), rel=1e-15)

    def test_alternating_inverse_square(self):
        v = scalar_variation_bound(alternating_inverse_square(), [range(1, 1000)])
        assert v == pytest.approx(SUM_INV_SQ_999, rel=1e-13)

    def test_zero(self):
        assert scalar_variation_bound(make_field(naturals(), lambda n: 0.0), [range(1, 5)]) == 0.0

    def test_rejects_vectors(self):
        with pytest.raises(NotScalar):
            scalar_variation_bound(basis_over_n(), [range(1, 4)])
        with pytest.raises(NotScalar):
            scalar_variation_bound(make_field(naturals(), lambda n: np.ones(2), shape=(2,)), [range(1, 4)])


class TestMultiply:
    def test_identity_multiplier(self):
        f = basis_over_n()
        g = multiply_linf(f, lambda s: 1.0, 1.0)
        L = range(1, 30)
        assert (integrate_over(g, L) - integrate_over(f, L)).norm() == 0.0

    def test_indicator_restricts(self):
        f = basis_over_n()
        B = {2, 4, 6, 8, 100}
        g = multiply_linf(f, indicator(B), 1.0)
        D = set(range(1, 10))
        assert (integrate_over(g, D) - integrate_over(f, D & B)).norm() == 0.0

    def test_signs_keep_orthogonal_tail(self):
        g = multiply_linf(basis_over_n(), lambda s: np.where(np.asarray(s) % 2 == 0, 1.0, -1.0), 1.0)
        cert = u_integrate(g, 1e-3)
        assert cert.status == "proof" and cert.witness_set == range(1, 1_000_001)
        assert cert.value.entries([1, 2]).tolist() == [-1.0, 0.5]

    def test_bound_scales_oracle(self):
        g = multiply_linf(inverse_square_basis(), lambda s: 3.0, 3.0)
        w = uniform_tail_set(g, 3e-2)
        assert w.witness_set == range(1, 101)

    @pytest.mark.parametrize("bound", [None, math.inf, math.nan, -1.0])
    def test_unbounded(self, bound):
        with pytest.raises(UnboundedMultiplier):
            multiply_linf(basis_over_n(), lambda s: 1.0, bound)


class TestUniformTail:
    def test_finite_support(self):
        f = make_field(naturals(), lambda n: 1.0 if n < 4 else 0.0,
                       oracles=(TailOracle("finite-support", support=(1, 2, 3)),))
        w = uniform_tail_set(f, 1e-9)
        assert w.witness_set == range(1, 4) and w.bound == 0.0

    def test_inverse_square(self):
        w = uniform_tail_set(inverse_square_basis(), 1e-2)
        assert w.witness_set == range(1, 101)  # zeta(2, 101) = 0.00995..., zeta(2, 100) > 0.01
        assert w.bound == pytest.approx(0.009950166663333571, rel=1e-12)

    def test_basis_over_n_has_no_uniform_oracle(self):
        with pytest.raises(NoOracle):
            uniform_tail_set(basis_over_n(), 0.1)

    def test_no_oracle_at_all(self):
        with pytest.raises(NoOracle):
            uniform_tail_set(alternating_harmonic(), 0.1)


class TestTruncate:
    def test_finitely_supported(self):
        f = make_field(naturals(), lambda n: 1.0 / n if n <= 3 else 0.0,
                       oracles=(TailOracle("finite-support", support=(1, 2, 3)),))
        f0, dist = truncate_to_local(f, 0.5)
        assert dist == 0.0
        for n in range(1, 8):
            assert f0(n) == f(n)

    def test_inverse_square(self):
        f0, dist = truncate_to_local(inverse_square_basis(), 1e-2)
        assert dist < 1e-2
        assert integrate_over(f0, {100, 101}).to_dict() == {100: 1e-4}
        cert = u_integrate(f0, 0.0)
        assert cert.status == "exact" and cert.witness_set == range(1, 101)

    def test_zero_field(self):
        f = make_field(naturals(), lambda n: 0.0, oracles=(TailOracle("finite-support", support=()),))
        f0, dist = truncate_to_local(f, 0.1)
        assert dist == 0.0 and f0(5) == 0.0

    def test_distance_bound_holds_on_probes(self):
        f = inverse_square_basis()
        f0, dist = truncate_to_local(f, 1e-2)
        rng = np.random.default_rng(3)
        for _ in range(20):
            L = set(rng.integers(1, 5000, size=40).tolist())
            phi = rng.uniform(-1, 1, size=5001)
            diff = integrate_over(multiply_linf(f, lambda s: phi[s], 1.0), L) - \
                integrate_over(multiply_linf(f0, lambda s: phi[s], 1.0), L)
            assert diff.norm() <= dist


def test_seqvector_norm_paths_agree():
    rng = np.random.default_rng(0)
    idx = rng.integers(0, 50, size=30)
    val = rng.standard_normal(30)
    a = SeqVector.from_entries(idx, val)
    b = SeqVector.block(range(10, 40, 3), lambda ix: np.sin(ix))
    dense = np.zeros(60)
    np.add.at(dense, idx, val)
    dense[10:40:3] += np.sin(np.arange(10, 40, 3))
    assert (a + b).norm() == pytest.approx(np.linalg.norm(dense), rel=1e-14)
    assert (a + b).norm("sup") == pytest.approx(np.abs(dense).max(), rel=1e-15)
    assert (b - b).norm() == 0.0
