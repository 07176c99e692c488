"""Acceptance criteria, each at its stated tolerance and runtime budget.

Run ``pytest tests/test_acceptance.py`` to get one pass/fail line per
criterion in the terminal summary.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from ucondlab.actions import ActionSystem, alpha_apply, fourier_of_element
from ucondlab.bundles import (
    convolve,
    dual_action,
    get_bundle,
    hat_equals_action_check,
    involve,
    main_theorem_check,
    point_multiplier,
    multiplier_apply,
    random_section,
    regular_representation,
    section_positive_type_check,
)
from ucondlab.errors import CauchyFailure
from ucondlab.groups import FiniteAbelianGroup
from ucondlab.instances import alternating_harmonic, basis_over_n, inverse_square_tail, sup_norm_basis
from ucondlab.positive import equal_measures_check, random_positive_type
from ucondlab.scenarios import run, trial_rng
from ucondlab.seqvec import SeqVector
from ucondlab.ucond import pseudo_bound, u_integrate

GRID_GROUPS = ["2", "3", "4,2", "5", "12"]
SMALL_GROUPS = ["1", "2", "3", "4", "2,2", "5", "6", "7", "8", "4,2", "2,2,2"]
FIXTURES = ["m2z2", "z3-shift"]


@contextmanager
def budget(seconds: float):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed <= seconds, f"took {elapsed:.2f} s, budget {seconds} s"


def assert_report(report):
    bad = [c for c in report["checks"] if not c["pass"]]
    assert not bad, bad[:3]


@pytest.mark.criterion(1, "Fourier inversion, 5 groups x d in {1,2,3} x 20 instances, every t, <= 1e-10")
def test_fourier_inversion():
    with budget(10):
        for g in GRID_GROUPS:
            for d in (1, 2, 3):
                r = run({"kind": "inversion", "params": {"group": g, "dim": d, "trials": 20, "seed": 1, "tol": 1e-10}})
                assert len(r["checks"]) == 20 * FiniteAbelianGroup.parse(g).order
                assert all(c["certificate_status"] == "exact" for c in r["checks"])
                assert_report(r)


@pytest.mark.criterion(2, "Naimark dilation: rep residuals <= 1e-10, reconstruction <= 1e-8")
def test_naimark_dilation():
    with budget(10):
        for g in GRID_GROUPS:
            for d in (1, 2, 3):
                r = run({"kind": "naimark", "params": {"group": g, "dim": d, "trials": 20, "seed": 2,
                                                       "tol": 1e-10, "recon_tol": 1e-8}})
                assert len(r["checks"]) == 20 * 4
                assert_report(r)


@pytest.mark.criterion(3, "Combined theorem, all subsets and all t, groups of order <= 8: <= 1e-9, orderings <= 1e-12")
def test_combined_exhaustive():
    with budget(30):
        for g in SMALL_GROUPS:
            r = run({"kind": "combined", "params": {"group": g, "dim": 2, "trials": 1, "seed": 3,
                                                    "tol": 1e-9, "order_tol": 1e-12}})
            n = FiniteAbelianGroup.parse(g).order
            assert r["checks"][0]["lhs_summary"] == f"{n * 2**n} (t, L) pairs"
            assert_report(r)


@pytest.mark.criterion(4, "Measure equality, 50 seeded (p, xi, eta) per group: <= 1e-9")
def test_measure_equality():
    with budget(5):
        worst = 0.0
        for g in GRID_GROUPS:
            G = FiniteAbelianGroup.parse(g)
            for i in range(50):
                rng = trial_rng(4, i)
                d = 1 + i % 3
                p = random_positive_type(G, d, rng)
                xi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
                eta = rng.standard_normal(d) + 1j * rng.standard_normal(d)
                worst = max(worst, equal_measures_check(p, xi, eta))
        assert worst <= 1e-9


@pytest.mark.criterion(5, "Main theorem on m2z2 and z3-shift, 100 seeds, aP(t) and P(t)a: <= 1e-10, exact certificates")
def test_main_theorem():
    with budget(10):
        for name in FIXTURES:
            r = run({"kind": "main-theorem", "params": {"bundle": name, "trials": 100, "seed": 5, "tol": 1e-10}})
            main = [c for c in r["checks"] if c["name"].startswith("main-theorem")]
            assert len(main) == 100
            assert all(c["certificate_status"] == "exact" for c in main)
            assert_report(r)


@pytest.mark.criterion(6, "Hat equals action <= 1e-11 on a spanning probe set; P positive type >= -1e-10; 100 seeds")
def test_bundle_lemmas():
    with budget(10):
        for name in FIXTURES:
            b = get_bundle(name)
            G = b.group
            worst_hat, min_eig = 0.0, math.inf
            for i in range(100):
                f = random_section(b, trial_rng(6, i))
                x = G.elements[i % G.order]
                worst_hat = max(worst_hat, hat_equals_action_check(f, x))  # probes: a basis of every fiber
                min_eig = min(min_eig, section_positive_type_check(f).min_eigenvalue)
            assert worst_hat <= 1e-11
            assert min_eig >= -1e-10


@pytest.mark.criterion(7, "Unconditional engine: basis-over-n certified, alternating-harmonic and sup-norm-basis fail")
def test_unconditional_separations():
    with budget(5):
        cert = u_integrate(basis_over_n(), 1e-4, cutoff=10**6)
        assert cert.status == "proof"
        n = len(cert.witness_set)
        limit = SeqVector.block(range(1, n + 1), lambda ix: 1.0 / ix)
        dist = math.sqrt(inverse_square_tail(n) + (cert.value - limit).norm() ** 2)
        assert dist <= 1e-4

        with pytest.raises(CauchyFailure) as info:
            u_integrate(alternating_harmonic(), 1e-4, cutoff=10**6)
        D = np.asarray(info.value.violating_set)
        assert abs(math.fsum(((-1.0) ** D) / D)) > 1.0

        f = sup_norm_basis()
        assert pseudo_bound(f, [range(1, 11), [3], [2, 7, 9]]) == 1.0
        with pytest.raises(CauchyFailure):
            u_integrate(f, 0.5, cutoff=10**6)


@pytest.mark.criterion(8, "Laurent recovery N=20: interior <= 1e-12, exact Toeplitz at t=0, spectral <= 1e-14")
def test_laurent_recovery():
    with budget(2):
        r = run({"kind": "laurent", "params": {"window": 20, "t": [0.0, 1.0, math.pi], "tol": 1e-12,
                                               "spectral_tol": 1e-14}})
        names = [c["name"] for c in r["checks"]]
        assert sum(n.startswith("toeplitz") for n in names) == 3
        assert sum(n.startswith("spectral") for n in names) == 9
        assert_report(r)


@pytest.mark.criterion(9, "Square-root inequality and hereditary cone, 100 seeds per world, tail within factor 2")
def test_inequality_and_cone():
    with budget(10):
        for world in ("finite", "zshift"):
            for kind in ("inequality", "cone"):
                r = run({"kind": kind, "params": {"world": world, "group": "4", "dim": 3, "trials": 100, "seed": 9}})
                assert len(r["checks"]) == 100
                if kind == "cone":
                    assert all(c["certificate_status"] == "proof" for c in r["checks"])
                assert_report(r)


@pytest.mark.criterion(10, "Bundle dual action under the regular representation matches the finite world, 50 probes")
def test_cross_module_consistency():
    with budget(5):
        worst = 0.0
        for name in FIXTURES:
            b = get_bundle(name)
            G = b.group
            sys = ActionSystem.from_bundle(b)
            for i in range(50):
                rng = trial_rng(10, i)
                f, a = random_section(b, rng), random_section(b, rng)
                x = G.elements[i % G.order]
                lhs = alpha_apply(sys, x, regular_representation(f))
                worst = max(worst, float(np.max(np.abs(lhs - regular_representation(dual_action(x, f))))))
                # the Fourier coefficient of Lambda(p) observed against Lambda(a) is Lambda(a P(t))
                p = convolve(involve(f), f)
                m = fourier_of_element(sys, regular_representation(p), x)
                via_world = m.right_action(regular_representation(a))
                via_bundle = regular_representation(multiplier_apply(point_multiplier(p, x), a, "right"))
                worst = max(worst, float(np.max(np.abs(via_world - via_bundle))))
                res = main_theorem_check(f, a, x)
                worst = max(worst, float(np.max(np.abs(via_bundle - regular_representation(
                    type(a)(b, res.lhs_left, check=False))))))
        assert worst <= 1e-10
