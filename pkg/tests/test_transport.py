import math

import numpy as np
import pytest

from conftest import lp_max_mass, perm_bottleneck, perm_wasserstein
from mmfield.transport import (
    InfeasibleTransportError,
    max_mass_on,
    prokhorov,
    wasserstein_1d,
    wasserstein_inf,
    wasserstein_p,
)


def uniform(n):
    return np.full(n, 1.0 / n)


class TestWassersteinP:
    def test_point_masses(self):
        v, cpl = wasserstein_p([1.0], [1.0], np.array([[0.37]]), 1)
        assert v == pytest.approx(0.37)
        np.testing.assert_allclose(cpl.matrix, [[1.0]])

    def test_zero_cost_matching(self):
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        for p in (1, 2, 7):
            v, _ = wasserstein_p(uniform(2), uniform(2), C, p)
            assert v == pytest.approx(0.0, abs=1e-12)

    def test_matches_permutation_bruteforce(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            C = rng.random((3, 3)) * 3
            for p in (1, 2, 4):
                v, cpl = wasserstein_p(uniform(3), uniform(3), C, p)
                assert v == pytest.approx(perm_wasserstein(C, p), abs=1e-9)
                assert cpl.checks_against(uniform(3), uniform(3))

    def test_lp_and_assignment_paths_agree(self):
        rng = np.random.default_rng(1)
        C = rng.random((4, 4))
        v_fast, _ = wasserstein_p(uniform(4), uniform(4), C, 2)
        # near-uniform marginals force the LP path
        mu = np.array([0.25 + 1e-13, 0.25 - 1e-13, 0.25, 0.25])
        v_lp, _ = wasserstein_p(mu, uniform(4), C, 2)
        assert v_fast == pytest.approx(v_lp, abs=1e-7)

    def test_monotone_in_p(self):
        rng = np.random.default_rng(2)
        C = rng.random((4, 3))
        mu = rng.random(4) + 0.1
        mu /= mu.sum()
        nu = rng.random(3) + 0.1
        nu /= nu.sum()
        vals = [wasserstein_p(mu, nu, C, p)[0] for p in (1, 2, 4, 8, 16)]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_forbidden_pairs(self):
        C = np.array([[np.inf, 1.0], [1.0, np.inf]])
        v, cpl = wasserstein_p(uniform(2), uniform(2), C, 1)
        assert v == pytest.approx(1.0)
        assert cpl.matrix[0, 0] == 0.0
        with pytest.raises(InfeasibleTransportError):
            wasserstein_p([1.0], [1.0], np.array([[np.inf]]), 1)

    def test_metric_axioms_on_common_ground(self):
        rng = np.random.default_rng(3)
        pts = rng.random((4, 2))
        D = np.sqrt(((pts[:, None] - pts[None, :]) ** 2).sum(-1))
        for _ in range(10):
            ms = [rng.random(4) + 0.05 for _ in range(3)]
            ms = [m / m.sum() for m in ms]
            for p in (1, 2):
                d01 = wasserstein_p(ms[0], ms[1], D, p)[0]
                d10 = wasserstein_p(ms[1], ms[0], D.T, p)[0]
                d12 = wasserstein_p(ms[1], ms[2], D, p)[0]
                d02 = wasserstein_p(ms[0], ms[2], D, p)[0]
                assert d01 == pytest.approx(d10, abs=1e-7)
                assert d02 <= d01 + d12 + 1e-7


class TestWassersteinInf:
    def test_identical_zero(self):
        D = np.array([[0.0, 1.0], [1.0, 0.0]])
        v, _ = wasserstein_inf(uniform(2), uniform(2), D)
        assert v == 0.0

    def test_two_by_two_example(self):
        v, cpl = wasserstein_inf(uniform(2), uniform(2), np.array([[1.0, 3.0], [3.0, 2.0]]))
        assert v == 2.0
        assert cpl.matrix[0, 1] == pytest.approx(0.0, abs=1e-9)

    def test_matches_bottleneck_bruteforce(self):
        rng = np.random.default_rng(4)
        for _ in range(15):
            C = rng.random((4, 4))
            v, cpl = wasserstein_inf(uniform(4), uniform(4), C)
            assert v == pytest.approx(perm_bottleneck(C), abs=1e-12)
            assert cpl.checks_against(uniform(4), uniform(4))

    def test_limit_of_p(self):
        # instances where the p = 64 moment is already inside 1e-3
        for C in (np.array([[0.9]]), np.array([[0.5, 5.0], [5.0, 0.50001]])):
            n = C.shape[0]
            vi, _ = wasserstein_inf(uniform(n), uniform(n), C)
            vp, _ = wasserstein_p(uniform(n), uniform(n), C, 64)
            assert abs(vi - vp) <= 1e-3

    def test_nonuniform_marginals(self):
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        mu = np.array([0.9, 0.1])
        nu = np.array([0.1, 0.9])
        v, _ = wasserstein_inf(mu, nu, C)
        assert v == pytest.approx(1.0)  # 0.8 mass must cross


class TestProkhorov:
    def test_identical_zero(self):
        D = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert prokhorov(uniform(2), uniform(2), D).value == 0.0

    def test_point_masses_min_d_one(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = float(rng.random() * 2)
            res = prokhorov([1.0], [1.0], np.array([[d]]))
            assert res.value == pytest.approx(min(d, 1.0), abs=res.resolution)

    def test_mass_defect_dominates(self):
        res = prokhorov([0.9, 0.1], [1.0], np.array([[0.0], [7.0]]))
        assert res.value == pytest.approx(0.1, abs=res.resolution)

    def test_triangle_at_lattice_resolution(self):
        rng = np.random.default_rng(6)
        pts = rng.random((4, 2))
        D = np.sqrt(((pts[:, None] - pts[None, :]) ** 2).sum(-1))
        for _ in range(5):
            ms = [rng.random(4) + 0.05 for _ in range(3)]
            ms = [m / m.sum() for m in ms]
            d01 = prokhorov(ms[0], ms[1], D)
            d12 = prokhorov(ms[1], ms[2], D)
            d02 = prokhorov(ms[0], ms[2], D)
            assert d02.value <= d01.value + d12.value + 2 * d02.resolution + 1e-9
            d10 = prokhorov(ms[1], ms[0], D.T)
            assert d01.value == pytest.approx(d10.value, abs=d01.resolution)


class TestMaxMass:
    def test_all_true(self):
        rng = np.random.default_rng(7)
        mu = rng.random(3) + 0.1
        mu /= mu.sum()
        nu = rng.random(4) + 0.1
        nu /= nu.sum()
        assert max_mass_on(mu, nu, np.ones((3, 4), bool)) == pytest.approx(1.0)

    def test_identity_mask_uniform(self):
        assert max_mass_on(uniform(2), uniform(2), np.eye(2, dtype=bool)) == pytest.approx(1.0)

    def test_missing_row(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            mu = rng.random(2) + 0.1
            mu /= mu.sum()
            nu = rng.random(2) + 0.1
            nu /= nu.sum()
            mask = np.ones((2, 2), bool)
            mask[0] = False
            got = max_mass_on(mu, nu, mask)
            assert got == pytest.approx(1.0 - mu[0], abs=1e-9)
            assert got == pytest.approx(lp_max_mass(mu, nu, mask), abs=1e-9)

    def test_monotone_in_mask(self):
        rng = np.random.default_rng(9)
        mu = rng.random(3) + 0.1
        mu /= mu.sum()
        nu = rng.random(3) + 0.1
        nu /= nu.sum()
        small = rng.random((3, 3)) < 0.4
        large = small | (rng.random((3, 3)) < 0.4)
        assert max_mass_on(mu, nu, small) <= max_mass_on(mu, nu, large) + 1e-9

    def test_matching_path_matches_lp(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            mask = rng.random((4, 4)) < 0.5
            got = max_mass_on(uniform(4), uniform(4), mask)
            assert got == pytest.approx(lp_max_mass(uniform(4), uniform(4), mask), abs=1e-9)


def test_wasserstein_1d_vs_lp():
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = rng.random(4) * 3
        y = rng.random(3) * 3
        wx = rng.random(4) + 0.1
        wx /= wx.sum()
        wy = rng.random(3) + 0.1
        wy /= wy.sum()
        C = np.abs(x[:, None] - y[None, :])
        for p in (1, 2):
            assert wasserstein_1d(x, wx, y, wy, p) == pytest.approx(
                wasserstein_p(wx, wy, C, p)[0], abs=1e-8)
        assert wasserstein_1d(x, wx, y, wy, math.inf) == pytest.approx(
            wasserstein_inf(wx, wy, C)[0], abs=1e-9)
