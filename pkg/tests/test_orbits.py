import numpy as np
import pytest

from conftest import random_power_bounded
from orbitlab.ergodic import fix_separation_check
from orbitlab.operators import (DiagonalOperator, MatrixOperator,
                                constant_symbol, harmonic_symbol,
                                make_commuting_family, root_perturbed_symbol)
from orbitlab.orbits import (cloud_diagnostic, compactness_diagnostic,
                             covering_estimate, difference_orbit,
                             difference_compactness_diagnostic, orbit,
                             orbit_family, packing_number)
from orbitlab.seqspace import (FiniteVector, constant_one, from_prefix,
                               lin_comb, sup_norm)


def harmonic_op():
    return DiagonalOperator(harmonic_symbol(), "c")


def m2_op():
    return DiagonalOperator(root_perturbed_symbol(2), "c")


class TestOrbit:
    def test_identity_orbit_has_diameter_zero(self):
        op = DiagonalOperator(constant_symbol(0.0), "c")
        cloud = orbit(op, constant_one(), 5, tol=1e-6)
        for n in range(2, 6):
            assert cloud.distance(1, n).value == 0.0

    def test_harmonic_orbit_pairwise_distance_two(self):
        cloud = orbit(harmonic_op(), constant_one(), 50, tol=1e-8)
        rng = np.random.default_rng(5)
        for _ in range(25):
            n, m = rng.choice(50, size=2, replace=False) + 1
            val, err = cloud.distance(int(n), int(m))
            assert abs(val - 2.0) <= 1e-8 + err

    def test_scalar_decay_orbit(self):
        op = MatrixOperator(np.array([[0.5]], dtype=complex))
        cloud = orbit(op, FiniteVector(np.array([1.0 + 0j])), 10)
        pts = [cloud.vector(n).coords[0] for n in cloud.labels]
        assert np.allclose(pts, [0.5 ** n for n in range(1, 11)])

    def test_zero_probe_orbit_is_a_point(self):
        from orbitlab.seqspace import zero_vector
        cloud = orbit(harmonic_op(), zero_vector("c"), 6, tol=1e-6)
        assert packing_number(cloud, 0.5) == 1
        for n in cloud.labels:
            assert sup_norm(cloud.vector(n), 1e-9).value == 0.0


class TestDifferenceOrbit:
    def test_fixed_point_gives_zero_cloud(self):
        op = DiagonalOperator(constant_symbol(0.0), "c")
        cloud = difference_orbit(op, constant_one(), 4, tol=1e-6)
        for n in cloud.labels:
            assert sup_norm(cloud.vector(n), 1e-6).value == 0.0

    def test_harmonic_difference_lies_in_c0(self):
        cloud = difference_orbit(harmonic_op(), constant_one(), 10, tol=1e-8)
        for n in cloud.labels:
            assert cloud.vector(n).limit == 0

    def test_scalar_difference_values(self):
        op = MatrixOperator(np.array([[0.5]], dtype=complex))
        cloud = difference_orbit(op, FiniteVector(np.array([1.0 + 0j])), 6)
        for n in cloud.labels:
            assert abs(cloud.vector(n).coords[0] - 0.5 ** n * 0.5) < 1e-15


class TestPacking:
    def test_single_point(self):
        cloud = orbit(harmonic_op(), constant_one(), 1, tol=1e-6)
        assert packing_number(cloud, 1.0) == 1

    def test_harmonic_orbit_packing_equals_horizon(self):
        for horizon in (20, 40):
            cloud = orbit(harmonic_op(), constant_one(), horizon, tol=1e-8)
            assert packing_number(cloud, 1.0) == horizon

    def test_scalar_orbit_brute_force(self):
        # points 0.5^n for n = 1..10; at eps = 0.26 the greedy net keeps
        # 0.5 and 0.125 (0.5 vs 0.25 is only 0.25 apart)
        op = MatrixOperator(np.array([[0.5]], dtype=complex))
        cloud = orbit(op, FiniteVector(np.array([1.0 + 0j])), 10)
        assert packing_number(cloud, 0.26) == 2

    def test_epsilon_must_clear_tolerance(self):
        cloud = orbit(harmonic_op(), constant_one(), 3, tol=1e-2)
        with pytest.raises(ValueError):
            packing_number(cloud, 0.03)


class TestCovering:
    def test_single_point(self):
        cloud = orbit(harmonic_op(), constant_one(), 1, tol=1e-6)
        assert covering_estimate(cloud, 1.0) == 1

    def test_harmonic_cover_equals_horizon(self):
        cloud = orbit(harmonic_op(), constant_one(), 25, tol=1e-8)
        assert covering_estimate(cloud, 1.0) == 25

    def test_two_clusters(self):
        pts = [from_prefix([0.0], 0.0), from_prefix([0.1], 0.0),
               from_prefix([10.0], 0.0), from_prefix([10.1], 0.0)]
        cloud_labels = [1, 2, 3, 4]
        from orbitlab.orbits import OrbitCloud
        cloud = OrbitCloud(cloud_labels, lambda n: pts[n - 1],
                           lambda a, b: lin_comb([1.0, -1.0], [pts[a - 1], pts[b - 1]]),
                           tol=1e-6)
        assert covering_estimate(cloud, 1.0) == 2


class TestDiagnostic:
    def test_harmonic_orbit_grows(self):
        rep = compactness_diagnostic(harmonic_op(), constant_one(), [1.0],
                                     [50, 100, 200], tol=1e-8)
        assert rep.verdict == "growing"
        assert rep.packing[0].tolist() == [50, 100, 200]

    def test_harmonic_c0_vector_saturates(self):
        y = lin_comb([1.0, -1.0], [constant_one(), harmonic_op().apply(constant_one())])
        rep = cloud_diagnostic(orbit(harmonic_op(), y, 400, tol=1e-8),
                               [1.0], [100, 200, 400])
        assert rep.verdict == "saturating"
        assert rep.packing[0].tolist() == [48, 48, 48]

    def test_identity_saturates_at_one(self):
        op = DiagonalOperator(constant_symbol(0.0), "c")
        rep = compactness_diagnostic(op, constant_one(), [0.5], [4, 8, 16], tol=1e-3)
        assert rep.verdict == "saturating"
        assert rep.packing[0].tolist() == [1, 1, 1]

    def test_horizons_validated(self):
        with pytest.raises(ValueError):
            compactness_diagnostic(harmonic_op(), constant_one(), [1.0], [100, 50, 200])
        with pytest.raises(ValueError):
            compactness_diagnostic(harmonic_op(), constant_one(), [1.0], [100, 200])


class TestInvariants:
    def test_sandwich_and_monotonicity(self):
        cloud = difference_orbit(harmonic_op(), constant_one(), 150, tol=1e-6)
        for eps in (0.8, 1.2, 1.6):
            p2 = packing_number(cloud, 2 * eps)
            cov = covering_estimate(cloud, eps)
            p1 = packing_number(cloud, eps)
            assert p2 <= cov <= p1
        counts = [packing_number(cloud, eps) for eps in (2.4, 1.2, 0.6)]
        assert counts == sorted(counts)  # nonincreasing in eps

    def test_matrix_orbits_saturate(self, rng):
        # power-bounded matrices have precompact orbits, so both the orbit
        # and the difference orbit saturate once the horizon exceeds the
        # filling time of the limit circle (hence max_uni=2: one free
        # rotation; higher torus dimensions fill slower than 400 steps)
        for _ in range(5):
            op, _, _ = random_power_bounded(rng, dim=6, max_uni=2)
            x = FiniteVector(rng.standard_normal(6) + 1j * rng.standard_normal(6))
            eps = max(0.75 * x.norm(), 0.3)
            rep = compactness_diagnostic(op, x, [eps], [200, 400, 800], tol=1e-6)
            y = FiniteVector(x.coords - op.entries @ x.coords, x.norm_tag)
            eps_diff = max(0.75 * y.norm(), 0.2)
            drep = difference_compactness_diagnostic(op, x, [eps_diff],
                                                     [200, 400, 800], tol=1e-6)
            assert rep.verdict == "saturating"
            assert drep.verdict == "saturating"

    def test_reflexive_model_difference_implies_orbit(self, rng):
        # difference-orbit saturation forces orbit saturation for
        # power-bounded matrices (the desk model of the reflexive case)
        for _ in range(5):
            op, _, _ = random_power_bounded(rng, dim=6)
            assert fix_separation_check(op).is_mean_ergodic
            x = FiniteVector(rng.standard_normal(6) + 1j * rng.standard_normal(6))
            eps = max(x.norm() / 2, 0.3)
            drep = difference_compactness_diagnostic(op, x, [eps / 2],
                                                     [100, 200, 400], tol=1e-6)
            rep = compactness_diagnostic(op, x, [eps], [100, 200, 400], tol=1e-6)
            if drep.verdict == "saturating":
                assert rep.verdict == "saturating"

    def test_root_symbol_asymmetry(self):
        # m = 2: the square-difference orbit saturates while the cloud of
        # (I - T) 1 contains the non-c0 vector 1 - (a_k) whose orbit grows
        op = m2_op()
        one = constant_one()
        y_sq = lin_comb([1.0, -1.0], [one, op.power(2).apply(one)])
        nsq, _ = sup_norm(y_sq, 1e-9)
        rep_sq = cloud_diagnostic(orbit(op, y_sq, 400, tol=1e-8),
                                  [1.25 * nsq], [100, 200, 400])
        assert rep_sq.verdict == "saturating"
        y = lin_comb([1.0, -1.0], [one, op.apply(one)])
        assert abs(y.limit - 2.0) < 1e-14
        rep_y = cloud_diagnostic(orbit(op, y, 400, tol=1e-8), [1.0], [100, 200, 400])
        assert rep_y.verdict == "growing"


class TestFamilyOrbits:
    def test_two_rotations_travel_on_a_torus(self):
        t1 = DiagonalOperator(constant_symbol(2 * np.pi * 0.618033988749), "c")
        t2 = DiagonalOperator(constant_symbol(2 * np.pi * 0.414213562373), "c")
        fam = make_commuting_family([t1, t2])
        cloud = orbit_family(fam, constant_one(), 20, tol=1e-6)
        # orbit of the constant sequence under two rotations stays on a circle
        assert packing_number(cloud, 0.5) <= 13

    def test_graded_lex_enumeration(self):
        t1 = DiagonalOperator(constant_symbol(0.1), "c")
        fam = make_commuting_family([t1, t1])
        cloud = orbit_family(fam, constant_one(), 2, tol=1e-3)
        degrees = [sum(w.exponents) for w in cloud.labels]
        assert degrees == sorted(degrees)
        assert len(cloud.labels) == 5  # (1,0),(0,1),(2,0),(1,1),(0,2)

    def test_matrix_generator_family(self, rng):
        # words over commuting matrix generators, metric on finite vectors
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        g /= 2 * np.linalg.norm(g, 2)
        t1 = MatrixOperator(g)
        t2 = t1.power(2)
        fam = make_commuting_family([t1, t2])
        x = FiniteVector(np.ones(4, dtype=complex))
        cloud = orbit_family(fam, x, 3, tol=1e-9)
        assert len(cloud.labels) == 9
        # contraction: every word of degree >= 2 is within 2 ||x|| of any other
        word_norms = [cloud.vector(w).norm() for w in cloud.labels]
        assert max(word_norms) <= x.norm()
        assert packing_number(cloud, 2.1 * x.norm()) == 1


def test_report_serialisation_shape():
    rep = compactness_diagnostic(harmonic_op(), constant_one(), [1.0, 2.5],
                                 [20, 40, 80], tol=1e-6)
    doc = rep.to_json_dict()
    assert doc["verdict"] in ("saturating", "growing", "inconclusive")
    rows = rep.csv_rows()
    assert rows[0] == ("horizon", "epsilon", "packing", "covering")
    assert len(rows) == 1 + 2 * 3
