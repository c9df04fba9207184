import numpy as np
import pytest

from conftest import random_metric_field, singleton_pair, two_point_pair
from mmfield.core import (
    MMField,
    MetricField,
    Relation,
    TargetSpace,
    amalgamate,
    coproduct,
    distortion,
    hausdorff,
    hausdorff_in_target,
    lipschitz_rescale_factor,
    validate_field,
)

B1 = TargetSpace.euclidean(1)


def two_point_field(db: float) -> MetricField:
    return MetricField(space=B1, d=[[0, 1], [1, 0]], values=[[0.0], [db]])


class TestValidate:
    def test_lipschitz_slack_is_valid(self):
        assert validate_field(two_point_field(0.5)).ok

    def test_lipschitz_violation_reported(self):
        rep = validate_field(two_point_field(1.5))
        v = rep.worst("lipschitz")
        assert v is not None
        assert v.where == (0, 1)
        assert v.magnitude == pytest.approx(0.5)

    def test_triangle_violation_magnitude(self):
        d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
        f = MetricField(space=B1, d=d, values=[[0.0], [0.0], [0.0]])
        v = validate_field(f).worst("triangle")
        assert v is not None
        assert v.magnitude == pytest.approx(3.0)

    def test_asymmetry_and_diagonal(self):
        d = np.array([[0.1, 1], [2, 0]], float)
        kinds = {v.kind for v in validate_field(
            MetricField(space=B1, d=d, values=[[0.0], [0.0]])).violations}
        assert "asymmetric" in kinds and "nonzero_diagonal" in kinds

    def test_pseudo_flag(self):
        d = np.zeros((2, 2))
        f = MetricField(space=B1, d=d, values=[[0.0], [0.0]])
        assert not validate_field(f).ok
        f_ok = MetricField(space=B1, d=d, values=[[0.0], [0.0]], pseudo_ok=True)
        assert validate_field(f_ok).ok

    def test_weights(self):
        base = two_point_field(0.5)
        assert validate_field(MMField(base=base, weights=[0.5, 0.5])).ok
        rep = validate_field(MMField(base=base, weights=[0.5, 0.4]))
        assert rep.worst("mass_sum") is not None

    def test_explicit_target_triangle(self):
        m = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
        space = TargetSpace.explicit(m)
        f = MetricField(space=space, d=np.zeros((1, 1)), values=[0])
        assert validate_field(f).worst("target_triangle") is not None

    def test_rescale_factor(self):
        assert lipschitz_rescale_factor(two_point_field(0.5)) == 1.0
        assert lipschitz_rescale_factor(two_point_field(2.0)) == pytest.approx(2.0)


class TestDistortion:
    def test_identity_relation_zero(self):
        rng = np.random.default_rng(0)
        f = random_metric_field(rng, 5)
        assert distortion(f, f, Relation.identity(5)) == 0.0

    def test_singletons(self):
        X, Y = singleton_pair(0.7)
        assert distortion(X, Y, Relation(((0, 0),))) == pytest.approx(1.4)

    def test_two_point_diagonal(self):
        X, Y = two_point_pair()
        R = Relation(((0, 0), (1, 1)))
        assert distortion(X, Y, R) == pytest.approx(1.0)

    def test_transpose_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            X = random_metric_field(rng, 4)
            Y = random_metric_field(rng, 3)
            pairs = {(int(rng.integers(4)), int(rng.integers(3))) for _ in range(5)}
            R = Relation(tuple(pairs))
            assert distortion(X, Y, R) == pytest.approx(
                distortion(Y, X, R.transpose()), abs=1e-15)

    def test_image_hausdorff_lower_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            X = random_metric_field(rng, 4)
            Y = random_metric_field(rng, 4)
            pairs = tuple({(int(rng.integers(4)), int(rng.integers(4))) for _ in range(6)})
            R = Relation(pairs)
            li, ri = R.left_indices(), R.right_indices()
            dh = hausdorff_in_target(X.space, X.values[li], Y.values[ri])
            assert distortion(X, Y, R) >= 2 * dh - 1e-12

    def test_out_of_range(self):
        X, Y = singleton_pair()
        with pytest.raises(IndexError):
            distortion(X, Y, Relation(((0, 5),)))


class TestCoproduct:
    def test_singleton_cross_distance(self):
        X, Y = singleton_pair(0.7)
        Z = coproduct(X, Y, Relation(((0, 0),)), 0.7)
        assert Z.d[0, 1] == 0.7
        assert validate_field(Z).ok

    def test_rejects_small_r(self):
        X, Y = singleton_pair(0.7)
        with pytest.raises(ValueError, match="minimal admissible"):
            coproduct(X, Y, Relation(((0, 0),)), 0.5)

    def test_hausdorff_equals_r_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            X = random_metric_field(rng, int(rng.integers(1, 5)))
            Y = random_metric_field(rng, int(rng.integers(1, 5)))
            pairs = {(i, int(rng.integers(Y.n))) for i in range(X.n)}
            pairs |= {(int(rng.integers(X.n)), j) for j in range(Y.n)}
            R = Relation(tuple(pairs))
            r = distortion(X, Y, R) / 2 + rng.random()
            Z = coproduct(X, Y, R, r)
            got = hausdorff(Z, range(X.n), range(X.n, X.n + Y.n))
            assert got == r  # machine exact
            assert validate_field(Z).ok

    def test_triangle_across_blocks(self):
        rng = np.random.default_rng(4)
        X = random_metric_field(rng, 3)
        Y = random_metric_field(rng, 3)
        R = Relation(((0, 0), (1, 1), (2, 2)))
        Z = coproduct(X, Y, R, distortion(X, Y, R) / 2 + 0.1)
        n = Z.n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    assert Z.d[i, k] <= Z.d[i, j] + Z.d[j, k] + 1e-12


class TestAmalgamate:
    def test_full_overlap_is_identity(self):
        rng = np.random.default_rng(5)
        Z1 = random_metric_field(rng, 4)
        ident = np.arange(4)
        glued = amalgamate(Z1, Z1, Z1, ident, ident)
        assert glued.n == 4
        np.testing.assert_allclose(glued.d, Z1.d)

    def test_shared_point_sum(self):
        B = TargetSpace.euclidean(1)
        Z1 = MetricField(space=B, d=[[0, 1], [1, 0]], values=[[0.0], [0.5]])
        Z2 = MetricField(space=B, d=[[0, 2], [2, 0]], values=[[0.5], [1.0]])
        Y = MetricField(space=B, d=[[0.0]], values=[[0.5]])
        glued = amalgamate(Z1, Z2, Y, [1], [0])
        assert glued.n == 3
        # blocks kept, cross runs through the shared point
        assert glued.d[0, 2] == pytest.approx(1 + 2)
        assert glued.d[1, 2] == pytest.approx(2)
        assert validate_field(glued).ok

    def test_value_map_stays_lipschitz(self):
        rng = np.random.default_rng(6)
        Y = random_metric_field(rng, 2)
        # build two supersets that isometrically contain Y via coproduct-like padding
        X1 = random_metric_field(rng, 3)
        R = Relation(tuple((i, int(rng.integers(Y.n))) for i in range(3)))
        Z1 = coproduct(X1, Y, R, distortion(X1, Y, R) / 2 + 0.2)
        X2 = random_metric_field(rng, 2)
        R2 = Relation(tuple((i, int(rng.integers(Y.n))) for i in range(2)))
        Z2 = coproduct(X2, Y, R2, distortion(X2, Y, R2) / 2 + 0.3)
        phi = np.arange(X1.n, X1.n + Y.n)
        psi = np.arange(X2.n, X2.n + Y.n)
        glued = amalgamate(Z1, Z2, Y, phi, psi)
        assert validate_field(glued).ok

    def test_rejects_non_isometric(self):
        X, Y = two_point_pair()
        with pytest.raises(ValueError, match="not distance preserving"):
            amalgamate(X, X, Y, [0, 1], [0, 1])


class TestHausdorff:
    def test_equal_sets(self):
        rng = np.random.default_rng(7)
        f = random_metric_field(rng, 5)
        assert hausdorff(f, [0, 2, 4], [0, 2, 4]) == 0.0

    def test_single_vs_all_bruteforce(self):
        rng = np.random.default_rng(8)
        f = random_metric_field(rng, 6)
        A, Bs = [2], list(range(6))
        direct = max(max(min(f.d[a, b] for a in A) for b in Bs),
                     max(min(f.d[a, b] for b in Bs) for a in A))
        assert hausdorff(f, A, Bs) == pytest.approx(direct)

    def test_nested_sets_one_direction(self):
        rng = np.random.default_rng(9)
        f = random_metric_field(rng, 6)
        A = [1, 3]
        got = hausdorff(f, A, range(6))
        assert got == pytest.approx(max(min(f.d[a, b] for a in A) for b in range(6)))

    def test_empty_rejected(self):
        f = random_metric_field(np.random.default_rng(0), 3)
        with pytest.raises(ValueError):
            hausdorff(f, [], [0])
