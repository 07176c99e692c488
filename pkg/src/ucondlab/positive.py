"""Positive-type operator-valued functions on a finite abelian group.

The dilation is the GNS construction on the block Gram matrix
``K[s, t] = p(t - s)``: translation commutes with ``K``, so it restricts to
a unitary representation on the range of ``K`` and ``p(t) = V* u(t) V`` with
``V`` the square root of ``K`` applied to the identity block.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import NotPositiveType, RepNotHomomorphism, RepNotUnitary
from .groups import FiniteAbelianGroup, OperatorField, fourier, pairing
from .ucond import UIntegralCertificate, finite_space, make_field, u_integrate

ASYMMETRY_TOL = 1e-10
REP_TOL = 1e-10


@dataclass(frozen=True)
class PositiveTypeVerdict:
    is_positive_type: bool
    min_eigenvalue: float
    witness_points: tuple
    tol: float
    asymmetry: float = 0.0


def gram_matrix(p: OperatorField) -> np.ndarray:
    """The ``|G|d x |G|d`` block matrix with block ``(s, t)`` equal to ``p(t - s)``."""
    G = p.group
    n, d = G.order, p.dim
    idx = G.add_table[:, G.neg_index].T  # idx[s, t] = index(t - s)
    blocks = p.values[idx]  # (n, n, d, d)
    return blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def _hermitian_part(K: np.ndarray) -> tuple[np.ndarray, bool, float]:
    """``(K + K*)/2``, whether K is Hermitian up to rounding, and the asymmetry ``max |K - K*|``."""
    scale = max(1.0, float(np.linalg.norm(K)))
    asym = float(np.max(np.abs(K - K.conj().T), initial=0.0))
    return (K + K.conj().T) / 2, asym <= ASYMMETRY_TOL * scale, asym


def check_positive_type(p: OperatorField, tol: float = 1e-10) -> PositiveTypeVerdict:
    """Min eigenvalue of the full-group Gram matrix, with a verdict at ``tol * max(1, ||K||)``.

    A kernel that is not Hermitian (``p(-t) != p(t)*``) is never of positive
    type, whatever the spectrum of its Hermitian part.
    """
    H, hermitian, asym = _hermitian_part(gram_matrix(p))
    lam = np.linalg.eigvalsh(H)
    lam_min = float(lam[0]) if lam.size else 0.0
    scaled = tol * max(1.0, float(np.abs(lam).max(initial=0.0)))
    return PositiveTypeVerdict(hermitian and lam_min >= -scaled, lam_min, p.group.elements, scaled, asym)


@dataclass(frozen=True)
class NaimarkDilation:
    group: FiniteAbelianGroup
    rep: np.ndarray  # (|G|, D, D)
    embedding: np.ndarray  # (D, d)
    cutoff: float
    eigenvalues: np.ndarray

    @property
    def dilation_dim(self) -> int:
        return self.rep.shape[1]

    def u(self, t) -> np.ndarray:
        return self.rep[self.group.index(t)]

    def unitarity_residual(self) -> float:
        D = self.dilation_dim
        if D == 0:
            return 0.0
        eye = np.eye(D)
        return max(float(np.max(np.abs(u.conj().T @ u - eye))) for u in self.rep)

    def homomorphism_residual(self) -> float:
        G = self.group
        if self.dilation_dim == 0:
            return 0.0
        prods = np.einsum("sij,tjk->stik", self.rep, self.rep)
        target = self.rep[G.add_table]
        return float(np.max(np.abs(prods - target)))

    def compress(self) -> np.ndarray:
        """``V* u(t) V`` for every t, shape ``(|G|, d, d)``."""
        V = self.embedding
        return np.einsum("ai,tab,bj->tij", V.conj(), self.rep, V)

    def reconstruction_residual(self, p: OperatorField) -> float:
        return float(np.max(np.abs(self.compress() - p.values)))


def naimark_dilate(p: OperatorField, tol: float = 1e-10) -> NaimarkDilation:
    G = p.group
    n, d = G.order, p.dim
    H, hermitian, asym = _hermitian_part(gram_matrix(p))
    if not hermitian:
        raise NotPositiveType(f"Gram matrix is not Hermitian (asymmetry {asym:.3g}); p(-t) must equal p(t)*")
    lam, vecs = np.linalg.eigh(H)
    lam_max = float(np.abs(lam).max(initial=0.0))
    if lam.size and lam[0] < -tol * max(1.0, lam_max):
        raise NotPositiveType(f"Gram matrix has eigenvalue {lam[0]:.3g}")
    cutoff = max(1e-10, 1e-12 * lam_max)
    keep = lam > cutoff
    W = vecs[:, keep]
    lam_k = lam[keep]
    Wb = W.reshape(n, d, -1)
    rep = np.empty((n, W.shape[1], W.shape[1]), dtype=complex)
    for r in range(n):
        # (T_r xi)(s) = xi(s - r)
        src = G.add_table[:, G.neg_index[r]]
        rep[r] = W.conj().T @ Wb[src].reshape(n * d, -1)
    e = G.index(G.zero())
    V = np.sqrt(lam_k)[:, None] * W.conj().T[:, e * d : (e + 1) * d]
    return NaimarkDilation(G, rep, V, cutoff, lam_k)


@dataclass(frozen=True)
class SpectralMeasure:
    group: FiniteAbelianGroup
    projections: np.ndarray  # (|G|, D, D), indexed by characters

    def E(self, L) -> np.ndarray:
        D = self.projections.shape[1]
        out = np.zeros((D, D), dtype=complex)
        for x in L:
            out = out + self.projections[self.group.index(x)]
        return out

    def residuals(self, dil: NaimarkDilation | None = None) -> dict[str, float]:
        P = self.projections
        D = P.shape[1]
        if D == 0:
            return {"idempotent": 0.0, "selfadjoint": 0.0, "orthogonal": 0.0, "complete": 0.0, "stone": 0.0}
        idem = float(np.max(np.abs(P @ P - P)))
        sa = float(np.max(np.abs(P - P.conj().transpose(0, 2, 1))))
        prods = np.einsum("xij,yjk->xyik", P, P)
        off = ~np.eye(len(P), dtype=bool)
        orth = float(np.max(np.abs(prods[off]), initial=0.0))
        comp = float(np.max(np.abs(P.sum(axis=0) - np.eye(D))))
        out = {"idempotent": idem, "selfadjoint": sa, "orthogonal": orth, "complete": comp}
        if dil is not None:
            recon = np.einsum("tx,xij->tij", self.group.character_table, P)
            out["stone"] = float(np.max(np.abs(recon - dil.rep)))
        return out


def spectral_measure(dil: NaimarkDilation) -> SpectralMeasure:
    """``E({x}) = (1/|G|) sum_t conj((t, x)) u(t)``."""
    if (r := dil.unitarity_residual()) > REP_TOL:
        raise RepNotUnitary(f"unitarity residual {r:.3g}")
    if (r := dil.homomorphism_residual()) > REP_TOL:
        raise RepNotHomomorphism(f"homomorphism residual {r:.3g}")
    G = dil.group
    P = np.einsum("tx,tij->xij", G.character_table.conj(), dil.rep) * G.dual_mass
    return SpectralMeasure(G, P)


def _dilation_pair(p, dil, spectral):
    if dil is None:
        dil = naimark_dilate(p)
    if spectral is None:
        spectral = spectral_measure(dil)
    return dil, spectral


def _inner(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(b, a))


def integrated_pairing_check(p: OperatorField, g, xi, eta, dil=None, spectral=None) -> tuple[complex, complex, float]:
    """``sum_t g(t) <p(t) xi, eta>`` against ``<(sum_x g^(x) E({x})) V xi, V eta>``."""
    dil, spectral = _dilation_pair(p, dil, spectral)
    G = p.group
    g = np.asarray(g, dtype=complex).reshape(G.order)
    xi, eta = np.asarray(xi, dtype=complex), np.asarray(eta, dtype=complex)
    lhs = sum(g[i] * _inner(p.values[i] @ xi, eta) for i in range(G.order)) * G.mass
    g_hat = G.character_table.T @ g * G.mass
    op = np.einsum("x,xij->ij", g_hat, spectral.projections)
    V = dil.embedding
    rhs = _inner(op @ (V @ xi), V @ eta)
    return complex(lhs), rhs, abs(lhs - rhs)


def equal_measures_check(p: OperatorField, xi, eta, dil=None, spectral=None) -> float:
    """``max_x |<p^(-x) xi, eta> / |G| - <E({x}) V xi, V eta>|``."""
    dil, spectral = _dilation_pair(p, dil, spectral)
    G = p.group
    xi, eta = np.asarray(xi, dtype=complex), np.asarray(eta, dtype=complex)
    ph = fourier(p).values
    Vxi, Veta = dil.embedding @ xi, dil.embedding @ eta
    worst = 0.0
    for i in range(G.order):
        lhs = _inner(ph[G.neg_index[i]] @ xi, eta) * G.dual_mass
        rhs = _inner(spectral.projections[i] @ Vxi, Veta)
        worst = max(worst, abs(lhs - rhs))
    return worst


@dataclass(frozen=True)
class CombinedResult:
    lhs: np.ndarray
    rhs: np.ndarray
    abs_err: float
    rhs_commuted: np.ndarray
    ordering_err: float


def combined_check(p: OperatorField, t, L, dil=None, spectral=None, p_hat=None) -> CombinedResult:
    """``sum_{x in L} conj((t,x)) p^(x) / |G|`` against ``V* E(-L) u(t) V``.

    ``rhs_commuted`` is the other ordering ``V* u(t) E(-L) V``.
    """
    dil, spectral = _dilation_pair(p, dil, spectral)
    G = p.group
    ph = fourier(p).values if p_hat is None else p_hat
    d = p.dim
    lhs = np.zeros((d, d), dtype=complex)
    for x in L:
        lhs = lhs + np.conj(pairing(G, t, x)) * ph[G.index(x)] * G.dual_mass
    E = spectral.E([G.neg(x) for x in L])
    u = dil.u(t)
    V = dil.embedding
    rhs = V.conj().T @ E @ u @ V
    alt = V.conj().T @ u @ E @ V
    err = float(np.max(np.abs(lhs - rhs), initial=0.0))
    order = float(np.max(np.abs(rhs - alt), initial=0.0))
    return CombinedResult(lhs, rhs, err, alt, order)


def combined_exhaustive(p: OperatorField, dil=None, spectral=None) -> tuple[float, float, int]:
    """Worst errors of :func:`combined_check` over every t and every subset of the dual.

    Returns ``(max abs_err, max ordering_err, number of (t, L) pairs)``.
    """
    dil, spectral = _dilation_pair(p, dil, spectral)
    G = p.group
    ph = fourier(p).values
    chars = G.elements
    worst = order = 0.0
    count = 0
    for t in G.elements:
        for k in range(len(chars) + 1):
            for L in combinations(chars, k):
                r = combined_check(p, t, L, dil, spectral, ph)
                worst = max(worst, r.abs_err)
                order = max(order, r.ordering_err)
                count += 1
    return worst, order, count


@dataclass(frozen=True)
class InversionResult:
    value: np.ndarray
    abs_err: float
    certificate: UIntegralCertificate


def inversion_check(p: OperatorField, t, verdict: PositiveTypeVerdict | None = None) -> InversionResult:
    """Recover ``p(t)`` as the unconditional integral of ``x -> conj((t,x)) p^(x)`` over the dual."""
    if verdict is None:
        verdict = check_positive_type(p)
    if not verdict.is_positive_type:
        raise NotPositiveType(f"min eigenvalue {verdict.min_eigenvalue:.3g}")
    G = p.group
    ph = fourier(p)
    t = G.coerce(t)
    space = finite_space(G.elements, mass=G.dual_mass, name=f"dual of Z({G})")
    f = make_field(space, lambda x: np.conj(pairing(G, t, x)) * ph(x), shape=(p.dim, p.dim), norm_kind="operator")
    cert = u_integrate(f, 0.0)
    err = float(np.max(np.abs(cert.value - p(t))))
    return InversionResult(cert.value, err, cert)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_positive_type(G: FiniteAbelianGroup, d: int, rng: np.random.Generator, dim: int | None = None) -> OperatorField:
    """``p(t) = V0* (sum_x (t, x) P_x) V0`` for random orthogonal projections summing to I."""
    D = dim if dim is not None else int(rng.integers(1, G.order * d + 1))
    Q = random_unitary(D, rng)
    label = rng.integers(0, G.order, size=D)
    P = np.zeros((G.order, D, D), dtype=complex)
    for x in range(G.order):
        cols = Q[:, label == x]
        P[x] = cols @ cols.conj().T
    V0 = (rng.standard_normal((D, d)) + 1j * rng.standard_normal((D, d))) / np.sqrt(2 * D)
    vals = np.einsum("ai,tx,xab,bj->tij", V0.conj(), G.character_table, P, V0)
    return OperatorField(G, vals)
