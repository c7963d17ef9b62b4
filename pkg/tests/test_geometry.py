import numpy as np
import pytest

from clustering.errors import InputError
from clustering.geometry import Hyperplane, canonicalize, classify, embed_discriminant


def random_hyperplanes(rng, count, dim):
    for _ in range(count):
        yield Hyperplane(normal=rng.normal(size=dim), offset=float(rng.normal()))


class TestClassify:
    def test_positive_side(self):
        assert classify(Hyperplane([1.0, 0.0], 0.0), [2.0, 5.0]) == 1

    def test_negative_side(self):
        assert classify(Hyperplane([1.0, 0.0], 2.0), [1.0, 9.0]) == -1

    def test_tie_goes_positive(self):
        assert classify(Hyperplane([0.0, 3.0], 0.0), [7.0, 0.0]) == 1

    def test_matrix_input(self):
        hp = Hyperplane([1.0, 1.0], 1.0)
        signs = classify(hp, np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 2.0]]))
        assert signs.tolist() == [-1, 1, 1]

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            classify(Hyperplane([1.0, 0.0], 0.0), [1.0, 2.0, 3.0])

    def test_zero_normal_rejected(self):
        with pytest.raises(InputError):
            Hyperplane([0.0, 0.0], 1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            Hyperplane([np.nan, 1.0], 0.0)


class TestCanonicalize:
    def test_shift_along_normal(self):
        T = canonicalize(Hyperplane([1.0, 0.0], 2.0))
        np.testing.assert_allclose(T.apply([3.0, 4.0]), [1.0, 4.0], atol=1e-12)

    def test_signed_distance_is_second_coordinate(self):
        T = canonicalize(Hyperplane([0.0, 1.0], 0.0))
        assert T.apply([3.0, 4.0])[0] == pytest.approx(4.0, abs=1e-12)

    def test_negative_leading_coefficient(self):
        hp = Hyperplane([-2.0, 0.0, 0.0], 1.0)
        T = canonicalize(hp)
        x = np.array([-3.0, 1.0, 2.0])
        assert T.apply(x)[0] == pytest.approx((hp.normal @ x - hp.offset) / hp.norm, abs=1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 5])
    def test_rotation_is_orthonormal(self, dim):
        rng = np.random.default_rng(dim)
        for hp in random_hyperplanes(rng, 20, dim):
            Q = canonicalize(hp).rotation
            np.testing.assert_allclose(Q.T @ Q, np.eye(dim), atol=1e-10)
            np.testing.assert_allclose(Q @ (hp.normal / hp.norm), np.eye(dim)[0], atol=1e-10)

    def test_first_coordinate_is_signed_distance(self):
        rng = np.random.default_rng(3)
        for hp in random_hyperplanes(rng, 50, 4):
            X = rng.normal(scale=3.0, size=(20, 4))
            expected = (X @ hp.normal - hp.offset) / hp.norm
            np.testing.assert_allclose(canonicalize(hp).apply(X)[:, 0], expected, atol=1e-10)

    def test_boundary_maps_to_zero(self):
        hp = Hyperplane([1.0, 2.0, -1.0], 3.0)
        point_on_plane = hp.normal * hp.offset / hp.norm ** 2
        assert canonicalize(hp).apply(point_on_plane)[0] == pytest.approx(0.0, abs=1e-12)

    def test_isometry(self):
        rng = np.random.default_rng(4)
        for hp in random_hyperplanes(rng, 20, 3):
            T = canonicalize(hp)
            x, y = rng.normal(size=(2, 3))
            assert np.linalg.norm(T.apply(x) - T.apply(y)) == pytest.approx(
                np.linalg.norm(x - y), abs=1e-9)

    def test_invert(self):
        hp = Hyperplane([0.3, -1.2, 0.5], -0.7)
        T = canonicalize(hp)
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(T.invert(T.apply(x)), x, atol=1e-12)

    def test_classify_consistency(self):
        rng = np.random.default_rng(5)
        for hp in random_hyperplanes(rng, 100, 3):
            X = rng.normal(scale=2.0, size=(10, 3))
            keep = np.abs(hp.decision_values(X)) > 1e-12
            first = canonicalize(hp).apply(X)[:, 0]
            expected = np.where(first >= 0.0, 1, -1)
            assert np.array_equal(classify(hp, X)[keep], expected[keep])

    def test_scale_invariance(self):
        rng = np.random.default_rng(6)
        hp = Hyperplane(rng.normal(size=3), 0.4)
        scaled = Hyperplane(hp.normal * 7.5, hp.offset * 7.5)
        X = rng.normal(size=(30, 3))
        assert np.array_equal(classify(hp, X), classify(scaled, X))
        np.testing.assert_allclose(canonicalize(hp).apply(X)[:, 0],
                                   canonicalize(scaled).apply(X)[:, 0], atol=1e-9)


class TestEmbedDiscriminant:
    def test_subtracts_threshold(self):
        rows, hp = embed_discriminant([50.0, 60.0], 50.0, [[1.0], [2.0]])
        np.testing.assert_array_equal(rows, [[0.0, 1.0], [10.0, 2.0]])
        np.testing.assert_array_equal(hp.normal, [1.0, 0.0])
        assert hp.offset == 0.0

    def test_constant_column_ties_positive(self):
        rows, hp = embed_discriminant([50.0] * 4, 50.0, np.arange(4.0))
        assert classify(hp, rows).tolist() == [1, 1, 1, 1]

    def test_classification_follows_discriminant(self):
        f = np.array([10.0, 49.9, 50.0, 75.0])
        rows, hp = embed_discriminant(f, 50.0, np.zeros((4, 2)))
        assert classify(hp, rows).tolist() == [-1, -1, 1, 1]

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            embed_discriminant([1.0, 2.0, 3.0], 0.0, [[1.0], [2.0]])
