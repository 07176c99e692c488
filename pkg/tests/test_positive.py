from __future__ import annotations

import numpy as np
import pytest

from ucondlab.errors import NotPositiveType, RepNotHomomorphism, RepNotUnitary
from ucondlab.groups import FiniteAbelianGroup, OperatorField, fourier, pairing
from ucondlab.positive import (
    NaimarkDilation,
    integrated_pairing_check,
    check_positive_type,
    combined_check,
    combined_exhaustive,
    equal_measures_check,
    gram_matrix,
    inversion_check,
    naimark_dilate,
    random_positive_type,
    random_unitary,
    spectral_measure,
)

Z2 = FiniteAbelianGroup((2,))
Z5 = FiniteAbelianGroup((5,))
Z42 = FiniteAbelianGroup((4, 2))


def character(G, x0):
    return OperatorField.from_function(G, lambda t: pairing(G, t, x0))


class TestPositiveTypeCheck:
    def test_gram_blocks(self):
        p = OperatorField(Z2, np.array([1.0, 2.0]))
        np.testing.assert_array_equal(gram_matrix(p), [[1, 2], [2, 1]])

    def test_constant_is_positive(self):
        v = check_positive_type(OperatorField(Z5, np.ones(5)))
        assert v.is_positive_type
        assert v.min_eigenvalue == pytest.approx(0.0, abs=1e-14)

    def test_character_is_positive(self):
        assert check_positive_type(character(Z42, (1, 1))).is_positive_type

    def test_negative_kernel(self):
        v = check_positive_type(OperatorField(Z2, np.array([1.0, 2.0])))
        assert not v.is_positive_type
        assert v.min_eigenvalue == pytest.approx(-1.0, abs=1e-14)
        assert v.witness_points == Z2.elements

    def test_asymmetric_kernel_is_rejected(self):
        # the Hermitian part of this Gram matrix is the identity, but p(-1) != p(1)*
        p = OperatorField(FiniteAbelianGroup((3,)), np.array([1.0, 0.5j, 0.5j]))
        v = check_positive_type(p)
        assert not v.is_positive_type
        assert v.min_eigenvalue == pytest.approx(1.0) and v.asymmetry == pytest.approx(1.0)
        with pytest.raises(NotPositiveType):
            naimark_dilate(p)

    def test_shifted_delta_on_z2(self):
        v = check_positive_type(OperatorField(Z2, np.array([0.0, 1.0])))
        assert not v.is_positive_type and v.min_eigenvalue == pytest.approx(-1.0, abs=1e-15)

    def test_identity_delta_dilates_to_translation(self):
        p = OperatorField.delta(Z5, (0,), np.eye(2))
        dil = naimark_dilate(p)
        assert dil.dilation_dim == 10
        assert dil.reconstruction_residual(p) < 1e-14

    @pytest.mark.parametrize("seed", range(5))
    def test_generator(self, seed):
        rng = np.random.default_rng(seed)
        p = random_positive_type(Z42, 2, rng)
        assert check_positive_type(p).is_positive_type


class TestDilation:
    def test_character_dilates_to_itself(self):
        x0 = (2,)
        p = character(Z5, x0)
        dil = naimark_dilate(p)
        assert dil.dilation_dim == 1
        for t in Z5.elements:
            assert dil.u(t)[0, 0] == pytest.approx(pairing(Z5, t, x0), abs=1e-12)
        spectral = spectral_measure(dil)
        assert spectral.E([x0])[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert abs(spectral.E([(1,)])[0, 0]) < 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_residuals(self, seed):
        rng = np.random.default_rng(seed)
        p = random_positive_type(Z42, 3, rng)
        dil = naimark_dilate(p)
        assert dil.unitarity_residual() < 1e-10
        assert dil.homomorphism_residual() < 1e-10
        assert dil.reconstruction_residual(p) < 1e-10
        assert dil.dilation_dim <= Z42.order * 3
        res = spectral_measure(dil).residuals(dil)
        assert max(res.values()) < 1e-10

    def test_zero_field(self):
        p = OperatorField(Z2, np.zeros((2, 2, 2)))
        dil = naimark_dilate(p)
        assert dil.dilation_dim == 0
        assert dil.reconstruction_residual(p) == 0.0
        assert spectral_measure(dil).residuals() == {
            "idempotent": 0.0, "selfadjoint": 0.0, "orthogonal": 0.0, "complete": 0.0, "stone": 0.0}

    def test_not_positive(self):
        with pytest.raises(NotPositiveType):
            naimark_dilate(OperatorField(Z2, np.array([1.0, 2.0])))

    def test_broken_representation(self):
        good = naimark_dilate(character(Z5, (1,)))
        scaled = NaimarkDilation(Z5, good.rep * 2, good.embedding, good.cutoff, good.eigenvalues)
        with pytest.raises(RepNotUnitary):
            spectral_measure(scaled)
        rep = good.rep.copy()
        rep[1] = 1.0
        with pytest.raises(RepNotHomomorphism):
            spectral_measure(NaimarkDilation(Z5, rep, good.embedding, good.cutoff, good.eigenvalues))


class TestIdentities:
    @pytest.fixture
    def p(self):
        return random_positive_type(Z42, 2, np.random.default_rng(11))

    def test_integrated_pairing(self, p):
        rng = np.random.default_rng(1)
        g = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        xi, eta = rng.standard_normal(2), rng.standard_normal(2) + 1j
        lhs, rhs, err = integrated_pairing_check(p, g, xi, eta)
        assert err < 1e-12

    def test_equal_measures(self, p):
        assert equal_measures_check(p, np.array([1.0, 0]), np.array([0.3, 1j])) < 1e-12

    def test_combined_singleton_character(self):
        # p = character x0: the left side is conj((t,x)) * |G| delta_{x,-x0} / |G|
        x0 = (1, 1)
        p = character(Z42, x0)
        t = (3, 0)
        r = combined_check(p, t, [Z42.neg(x0)])
        assert r.lhs[0, 0] == pytest.approx(pairing(Z42, t, x0), abs=1e-12)
        assert r.abs_err < 1e-12
        assert np.abs(combined_check(p, t, [x0]).lhs).max() < 1e-12

    def test_combined_exhaustive(self):
        p = random_positive_type(FiniteAbelianGroup((2, 2)), 2, np.random.default_rng(3))
        worst, order, count = combined_exhaustive(p)
        assert count == 4 * 16
        assert worst < 1e-10 and order < 1e-10

    def test_full_dual_gives_p(self, p):
        for t in Z42.elements:
            r = combined_check(p, t, Z42.elements)
            np.testing.assert_allclose(r.lhs, p(t), atol=1e-12)

    @pytest.mark.parametrize("t", [(0, 0), (1, 0), (3, 1)])
    def test_inversion(self, p, t):
        res = inversion_check(p, t)
        assert res.abs_err < 1e-12
        assert res.certificate.status == "exact"
        assert len(res.certificate.witness_set) == Z42.order

    def test_inversion_rejects_non_positive(self):
        with pytest.raises(NotPositiveType):
            inversion_check(OperatorField(Z2, np.array([1.0, 2.0])), (0,))


def test_random_unitary():
    U = random_unitary(6, np.random.default_rng(0))
    np.testing.assert_allclose(U.conj().T @ U, np.eye(6), atol=1e-13)


def test_generator_fourier_is_positive():
    # p^(x) is a compression of |G| P_{-x}, hence positive semidefinite
    p = random_positive_type(Z42, 3, np.random.default_rng(5))
    for m in fourier(p).values:
        assert np.linalg.eigvalsh((m + m.conj().T) / 2).min() > -1e-12


class TestSpectralExamples:
    def test_regular_representation_of_z3(self):
        Z3 = FiniteAbelianGroup((3,))
        rep = np.stack([np.roll(np.eye(3), k, axis=0) for k in range(3)]).astype(complex)
        dil = NaimarkDilation(Z3, rep, np.eye(3, 1), 0.0, np.ones(3))
        P = spectral_measure(dil).projections
        for i, x in enumerate(Z3.elements):
            # (T_1 v)(s) = v(s - 1) has eigenvector (conj((s, x)))_s with eigenvalue (1, x)
            v = np.array([np.conj(pairing(Z3, s, x)) for s in Z3.elements]) / np.sqrt(3)
            np.testing.assert_allclose(P[i], np.outer(v, v.conj()), atol=1e-14)

    def test_trivial_representation(self):
        rep = np.stack([np.eye(2, dtype=complex)] * Z42.order)
        P = spectral_measure(NaimarkDilation(Z42, rep, np.eye(2), 0.0, np.ones(2))).projections
        np.testing.assert_allclose(P[0], np.eye(2), atol=1e-15)
        assert np.abs(P[1:]).max() < 1e-15

    def test_pairing_with_delta(self):
        p = random_positive_type(Z42, 2, np.random.default_rng(2))
        xi, eta = np.array([1.0, 2j]), np.array([0.5, -1.0])
        g = np.zeros(8)
        g[0] = 1.0
        lhs, rhs, err = integrated_pairing_check(p, g, xi, eta)
        assert lhs == pytest.approx(np.vdot(eta, p((0, 0)) @ xi), abs=1e-14)
        assert err < 1e-12
        assert integrated_pairing_check(p, np.zeros(8), xi, eta)[2] == 0.0
