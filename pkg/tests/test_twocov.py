"""Two-covariance model: training, hyper-parameter derivation, scoring."""

import math

import numpy as np
import pytest

from hevoice import twocov
from hevoice.exceptions import (
    ConditioningError,
    EstimationError,
    NormalizationError,
    ShapeError,
)
from hevoice.synthdata import make_corpus
from hevoice.twocov import (
    LabeledCorpus,
    derive_hyperparameters,
    estimate_covariances,
    length_normalize,
    score_discriminative,
    score_full,
    whiten_apply,
    whiten_fit,
)


def random_spd(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim))
    return scale * (a @ a.T / dim + np.eye(dim))


@pytest.fixture(scope="module")
def identity_model():
    return derive_hyperparameters(np.eye(2), np.eye(2), np.zeros(2))


class TestLengthNormalize:
    def test_three_four_five(self):
        assert np.allclose(length_normalize([3.0, 4.0]), [0.6, 0.8], atol=0)

    def test_unit_vector_unchanged(self):
        v = np.array([1.0, 0.0, 0.0])
        assert np.array_equal(length_normalize(v), v)

    def test_output_norm_is_one(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            v = rng.normal(size=9) * 13.0
            assert abs(np.linalg.norm(length_normalize(v)) - 1.0) <= 1e-12

    def test_zero_vector_rejected(self):
        with pytest.raises(NormalizationError):
            length_normalize(np.zeros(3))


class TestWhitening:
    def test_white_corpus_gives_identity(self):
        rng = np.random.default_rng(11)
        vectors = rng.standard_normal((20000, 3))
        transform = whiten_fit(vectors)
        assert np.allclose(transform.matrix, np.eye(3), atol=0.05)

    def test_diagonal_covariance_oracle(self):
        rng = np.random.default_rng(12)
        vectors = rng.standard_normal((200000, 2)) * np.array([2.0, 3.0])
        transform = whiten_fit(vectors)
        whitened = (vectors - transform.mean) @ transform.matrix.T
        cov = whitened.T @ whitened / whitened.shape[0]
        assert np.linalg.norm(cov - np.eye(2)) <= 1e-6
        # up to rotation the transform is diag(1/2, 1/3)
        sv = np.sort(np.linalg.svd(transform.matrix, compute_uv=False))
        assert np.allclose(sv, sorted([0.5, 1.0 / 3.0]), atol=0.02)

    def test_mean_maps_to_zero(self):
        rng = np.random.default_rng(13)
        vectors = rng.normal(loc=[4.0, -2.0], size=(500, 2))
        transform = whiten_fit(vectors)
        assert np.allclose(whiten_apply(transform, transform.mean), 0.0, atol=1e-12)

    def test_whitened_corpus_statistics(self):
        rng = np.random.default_rng(14)
        base = rng.standard_normal((5000, 4))
        mix = rng.standard_normal((4, 4)) + np.eye(4)
        vectors = base @ mix.T + np.array([1.0, 2.0, 3.0, 4.0])
        transform = whiten_fit(vectors)
        whitened = np.array([whiten_apply(transform, v) for v in vectors])
        assert np.allclose(whitened.mean(axis=0), 0.0, atol=1e-10)
        cov = whitened.T @ whitened / whitened.shape[0]
        assert np.linalg.norm(cov - np.eye(4)) <= 1e-6


class TestEstimateCovariances:
    def test_two_cluster_monte_carlo(self):
        rng = np.random.default_rng(42)
        dim, n = 4, 1000
        e1 = np.eye(dim)[0]
        vectors = np.vstack([
            rng.normal(loc=e1, scale=0.1, size=(n, dim)),
            rng.normal(loc=-e1, scale=0.1, size=(n, dim)),
        ])
        labels = ["a"] * n + ["b"] * n
        w_prec, b_prec, mu = estimate_covariances(LabeledCorpus(vectors, labels))
        assert np.allclose(mu, 0.0, atol=0.02)
        within_cov = np.linalg.inv(w_prec)
        assert np.linalg.norm(within_cov - 0.01 * np.eye(dim)) <= 0.2 * 0.01 * dim
        between_cov = np.linalg.inv(b_prec)
        eigvals, eigvecs = np.linalg.eigh(between_cov)
        dominant = eigvecs[:, -1]
        assert abs(abs(dominant @ e1) - 1.0) <= 0.05

    def test_identical_vectors_conditioning_error(self):
        vectors = np.array([[1.0, 2.0]] * 4 + [[3.0, 4.0]] * 4)
        labels = ["a"] * 4 + ["b"] * 4
        with pytest.raises(ConditioningError) as err:
            estimate_covariances(LabeledCorpus(vectors, labels))
        assert "deficient" in str(err.value)

    def test_single_speaker_rejected(self):
        vectors = np.random.default_rng(0).normal(size=(6, 3))
        with pytest.raises(EstimationError):
            estimate_covariances(LabeledCorpus(vectors, ["a"] * 6))

    def test_speaker_with_one_vector_rejected(self):
        vectors = np.random.default_rng(0).normal(size=(3, 2))
        with pytest.raises(EstimationError):
            estimate_covariances(LabeledCorpus(vectors, ["a", "a", "b"]))


class TestDeriveHyperparameters:
    def test_identity_closed_form(self, identity_model):
        m = identity_model
        assert np.allclose(m.pooled_cov, np.eye(2) / 3.0, atol=1e-15)
        assert np.allclose(m.single_cov, np.eye(2) / 2.0, atol=1e-15)
        assert np.allclose(m.cross_weight, np.eye(2) / 6.0, atol=1e-15)
        assert np.allclose(m.self_weight, -np.eye(2) / 12.0, atol=1e-15)
        assert np.allclose(m.linear_weight, 0.0, atol=0)
        assert m.offset == pytest.approx(2.0 * math.log(3.0 / 4.0), abs=1e-12)
        assert m.offset == pytest.approx(m.log_det_offset, abs=1e-12)

    def test_zero_mean_forces_zero_linear_term(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            model = derive_hyperparameters(
                random_spd(rng, 3), random_spd(rng, 3), np.zeros(3))
            assert np.array_equal(model.linear_weight, np.zeros(3))

    def test_derived_matrices_symmetric(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            model = derive_hyperparameters(
                random_spd(rng, 4), random_spd(rng, 4), rng.normal(size=4))
            assert np.allclose(model.cross_weight, model.cross_weight.T, atol=1e-9)
            assert np.allclose(model.self_weight, model.self_weight.T, atol=1e-9)

    def test_rederivation_self_consistency(self):
        rng = np.random.default_rng(6)
        model = derive_hyperparameters(
            random_spd(rng, 5), random_spd(rng, 5), rng.normal(size=5))
        again = derive_hyperparameters(model.within_precision,
                                       model.between_precision, model.mean)
        for name in ("cross_weight", "self_weight", "linear_weight",
                     "pooled_cov", "single_cov"):
            assert np.allclose(getattr(model, name), getattr(again, name),
                               rtol=1e-9, atol=1e-12)
        assert model.offset == pytest.approx(again.offset, rel=1e-9)

    def test_non_spd_rejected(self):
        with pytest.raises(ConditioningError):
            derive_hyperparameters(-np.eye(2), np.eye(2), np.zeros(2))
        with pytest.raises(ConditioningError):
            derive_hyperparameters(np.array([[1.0, 0.5], [0.4, 1.0]]),
                                   np.eye(2), np.zeros(2))


class TestScoring:
    def test_identity_case_discriminative(self, identity_model):
        e1 = np.array([1.0, 0.0])
        assert score_discriminative(identity_model, e1, e1) \
            == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_identity_case_full(self, identity_model):
        e1 = np.array([1.0, 0.0])
        expected = 1.0 / 6.0 + 2.0 * math.log(3.0 / 4.0)
        assert score_full(identity_model, e1, e1) == pytest.approx(expected, abs=1e-12)
        assert score_full(identity_model, e1, e1) == pytest.approx(-0.40870, abs=5e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        model = derive_hyperparameters(
            random_spd(rng, 3), random_spd(rng, 3), rng.normal(size=3))
        for _ in range(20):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            assert score_full(model, x, y) \
                == pytest.approx(score_full(model, y, x), abs=1e-12)

    def test_zero_pair_isolates_constant(self, identity_model):
        z = np.zeros(2)
        assert score_full(identity_model, z, z) == identity_model.offset
        assert score_discriminative(identity_model, z, z) == 0.0

    def test_full_minus_discriminative_decomposition(self):
        rng = np.random.default_rng(8)
        model = derive_hyperparameters(
            random_spd(rng, 4), random_spd(rng, 4), rng.normal(size=4))
        for _ in range(20):
            x = rng.normal(size=4)
            y = rng.normal(size=4)
            residual = (score_full(model, x, y) - score_discriminative(model, x, y)
                        - float(model.linear_weight @ (x + y)) - model.offset)
            assert abs(residual) <= 1e-12

    def test_shape_mismatch(self, identity_model):
        with pytest.raises(ShapeError):
            score_full(identity_model, np.zeros(3), np.zeros(2))

    def test_target_scores_exceed_nontarget_on_synthetic_data(self):
        corpus = make_corpus(12, 10, 6, seed=99)
        w_prec, b_prec, mu = estimate_covariances(corpus)
        model = derive_hyperparameters(w_prec, b_prec, mu)
        groups = corpus.by_speaker()
        speakers = sorted(groups)
        tar, non = [], []
        for i, spk in enumerate(speakers):
            rows = groups[spk]
            tar.append(score_full(model, rows[0], rows[1]))
            other = groups[speakers[(i + 1) % len(speakers)]]
            non.append(score_full(model, rows[0], other[0]))
        assert np.mean(tar) > np.mean(non)


class TestModelFile:
    def test_roundtrip_with_derived(self, tmp_path):
        rng = np.random.default_rng(9)
        model = derive_hyperparameters(
            random_spd(rng, 3), random_spd(rng, 3), rng.normal(size=3))
        path = tmp_path / "model.json"
        twocov.save_model(model, path)
        loaded = twocov.load_model(path)
        assert np.array_equal(loaded.cross_weight, model.cross_weight)
        assert loaded.offset == model.offset

    def test_derived_recomputed_when_absent(self, tmp_path):
        rng = np.random.default_rng(10)
        model = derive_hyperparameters(
            random_spd(rng, 3), random_spd(rng, 3), rng.normal(size=3))
        doc = twocov.model_to_dict(model, include_derived=False)
        loaded = twocov.model_from_dict(doc)
        assert np.allclose(loaded.cross_weight, model.cross_weight, rtol=1e-12)
        assert loaded.offset == pytest.approx(model.offset, rel=1e-12)
