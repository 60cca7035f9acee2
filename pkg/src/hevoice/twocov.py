"""Two-covariance generative speaker comparator.

The model is parameterized by within- and between-speaker precision
matrices (inverse covariances) and a global mean. Scoring uses the
closed-form log-likelihood-ratio

    S(X, Y) = X' A Y + Y' A X + X' G X + Y' G Y + c'(X + Y) + k

where A (`cross_weight`), G (`self_weight`), c (`linear_weight`) and the
constant k (`offset`) derive from the precisions via two posterior
covariances: `pooled_cov` = (B + 2W)^-1 for the same-source hypothesis and
`single_cov` = (B + W)^-1 for independent sources.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    ConditioningError,
    EstimationError,
    FileFormatError,
    NormalizationError,
    ShapeError,
)

MODEL_FILE_FORMAT = "hevoice-twocov-model"
MODEL_FILE_VERSION = 1

DEFAULT_REGULARIZATION = 1e-6


@dataclass
class LabeledCorpus:
    """N x F vectors with one speaker label per row."""

    vectors: np.ndarray
    speaker_ids: list

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2:
            raise ShapeError("corpus vectors must form an N x F array")
        if len(self.speaker_ids) != self.vectors.shape[0]:
            raise ShapeError("one speaker id per vector required")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def by_speaker(self) -> dict:
        groups: dict = {}
        for label, row in zip(self.speaker_ids, self.vectors):
            groups.setdefault(label, []).append(row)
        return {k: np.array(v) for k, v in groups.items()}


@dataclass
class WhitenTransform:
    """Centering mean plus the matrix mapping the corpus to identity covariance."""

    mean: np.ndarray
    matrix: np.ndarray


@dataclass
class TwoCovModel:
    within_precision: np.ndarray
    between_precision: np.ndarray
    mean: np.ndarray
    cross_weight: np.ndarray
    self_weight: np.ndarray
    linear_weight: np.ndarray
    offset: float
    log_det_offset: float
    pooled_cov: np.ndarray
    single_cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def length_normalize(v) -> np.ndarray:
    """Project onto the unit sphere."""
    arr = np.asarray(v, dtype=float)
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise NormalizationError("cannot length-normalize the zero vector")
    return arr / norm


def whiten_fit(data, regularization: float = DEFAULT_REGULARIZATION) -> WhitenTransform:
    """Fit a zero-mean, identity-covariance transform to the corpus.

    Accepts a LabeledCorpus or a raw N x F array; labels are not used.
    """
    vectors = np.asarray(getattr(data, "vectors", data), dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] < 2:
        raise EstimationError("whitening needs at least two vectors")
    mean = vectors.mean(axis=0)
    centered = vectors - mean
    cov = centered.T @ centered / vectors.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    trace = float(np.trace(cov))
    if trace <= 0.0:
        raise ConditioningError("covariance is zero: nothing to whiten")
    # only deficient directions are lifted to the regularization floor, so a
    # well-conditioned corpus whitens exactly
    floor = regularization * trace / cov.shape[0]
    lifted = np.maximum(eigvals, floor)
    matrix = (eigvecs / np.sqrt(lifted)) @ eigvecs.T
    return WhitenTransform(mean=mean, matrix=matrix)


def whiten_apply(transform: WhitenTransform, v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    return transform.matrix @ (arr - transform.mean)


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def _precision_from_scatter(scatter: np.ndarray, eps: float,
                            what: str) -> np.ndarray:
    trace = float(np.trace(scatter))
    eigvals, eigvecs = np.linalg.eigh(scatter)
    n_deficient = int(np.sum(eigvals <= 1e-12 * max(trace, 0.0)))
    if trace <= 0.0 or n_deficient == scatter.shape[0]:
        raise ConditioningError(
            f"{what} scatter is degenerate: {n_deficient} deficient dimensions")
    # inverse of scatter + eps*tr/F*I, symmetric by construction
    lifted = eigvals + eps * trace / scatter.shape[0]
    return (eigvecs / lifted) @ eigvecs.T


def estimate_covariances(corpus: LabeledCorpus,
                         regularization: float = DEFAULT_REGULARIZATION
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ML covariance estimates, returned as precisions (W, B) plus the mean.

    Within-class: average centered scatter over all samples. Between-class:
    scatter of per-speaker means around the global mean (each speaker
    weighted equally). Both are regularized with eps * trace/F * I before
    inversion.
    """
    groups = corpus.by_speaker()
    if len(groups) < 2:
        raise EstimationError("need at least two speakers")
    for label, rows in groups.items():
        if rows.shape[0] < 2:
            raise EstimationError(f"speaker {label!r} has fewer than two vectors")

    dim = corpus.dim
    mu = corpus.vectors.mean(axis=0)
    within = np.zeros((dim, dim))
    between = np.zeros((dim, dim))
    for rows in groups.values():
        centered = rows - rows.mean(axis=0)
        within += centered.T @ centered
        d = rows.mean(axis=0) - mu
        between += np.outer(d, d)
    within /= corpus.vectors.shape[0]
    between /= len(groups)

    w_prec = _precision_from_scatter(within, regularization, "within-class")
    b_prec = _precision_from_scatter(between, regularization, "between-class")
    return w_prec, b_prec, mu


def _check_spd(m: np.ndarray, name: str) -> np.ndarray:
    arr = _as_square(m)
    if not np.allclose(arr, arr.T, rtol=1e-9, atol=1e-9):
        raise ConditioningError(f"{name} precision is not symmetric")
    try:
        np.linalg.cholesky(arr)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"{name} precision is not positive definite") from exc
    return arr


def _as_square(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def derive_hyperparameters(within_precision, between_precision, mean) -> TwoCovModel:
    """Closed-form scoring hyper-parameters from precisions and mean."""
    w = _check_spd(within_precision, "within")
    b = _check_spd(between_precision, "between")
    mu = np.asarray(mean, dtype=float)
    if mu.shape != (w.shape[0],):
        raise ShapeError("mean dimension does not match the precisions")

    pooled = _symmetrize(np.linalg.inv(b + 2.0 * w))
    single = _symmetrize(np.linalg.inv(b + w))
    cross = 0.5 * w.T @ pooled @ w
    self_w = 0.5 * w.T @ (pooled - single) @ w
    b_mu = b @ mu
    linear = w.T @ (pooled - single) @ b_mu
    _, logdet_single = np.linalg.slogdet(single)
    _, logdet_pooled = np.linalg.slogdet(pooled)
    _, logdet_b = np.linalg.slogdet(b)
    log_det_offset = (2.0 * logdet_single - logdet_pooled - logdet_b
                      + float(mu @ b_mu))
    offset = log_det_offset + 0.5 * float(b_mu @ (pooled - 2.0 * single) @ b_mu)

    return TwoCovModel(
        within_precision=w, between_precision=b, mean=mu,
        cross_weight=cross, self_weight=self_w, linear_weight=linear,
        offset=float(offset), log_det_offset=float(log_det_offset),
        pooled_cov=pooled, single_cov=single)


def _check_pair(model: TwoCovModel, x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != (model.dim,) or ya.shape != (model.dim,):
        raise ShapeError(
            f"trial vectors must have dimension {model.dim}, "
            f"got {xa.shape} and {ya.shape}")
    return xa, ya


def score_discriminative(model: TwoCovModel, x, y) -> float:
    """Score without the linear and constant calibration terms."""
    xa, ya = _check_pair(model, x, y)
    cross = model.cross_weight
    self_w = model.self_weight
    return float(xa @ cross @ ya + ya @ cross @ xa
                 + xa @ self_w @ xa + ya @ self_w @ ya)


def score_full(model: TwoCovModel, x, y) -> float:
    """Calibrated log-likelihood-ratio score, symmetric in (x, y)."""
    xa, ya = _check_pair(model, x, y)
    return (score_discriminative(model, xa, ya)
            + float(model.linear_weight @ (xa + ya)) + model.offset)


# model file: versioned JSON with row-major grids; derived fields optional
# and recomputed on load when absent.

def model_to_dict(model: TwoCovModel, include_derived: bool = True) -> dict:
    doc = {
        "format": MODEL_FILE_FORMAT,
        "version": MODEL_FILE_VERSION,
        "dim": model.dim,
        "within_precision": model.within_precision.tolist(),
        "between_precision": model.between_precision.tolist(),
        "mean": model.mean.tolist(),
    }
    if include_derived:
        doc["derived"] = {
            "cross_weight": model.cross_weight.tolist(),
            "self_weight": model.self_weight.tolist(),
            "linear_weight": model.linear_weight.tolist(),
            "offset": model.offset,
            "log_det_offset": model.log_det_offset,
            "pooled_cov": model.pooled_cov.tolist(),
            "single_cov": model.single_cov.tolist(),
        }
    return doc


def model_from_dict(doc: dict) -> TwoCovModel:
    if doc.get("format") != MODEL_FILE_FORMAT:
        raise FileFormatError(f"not a {MODEL_FILE_FORMAT} document")
    if doc.get("version") != MODEL_FILE_VERSION:
        raise FileFormatError(f"unsupported model version {doc.get('version')}")
    model = derive_hyperparameters(
        np.array(doc["within_precision"], dtype=float),
        np.array(doc["between_precision"], dtype=float),
        np.array(doc["mean"], dtype=float))
    derived = doc.get("derived")
    if derived:
        model.cross_weight = np.array(derived["cross_weight"], dtype=float)
        model.self_weight = np.array(derived["self_weight"], dtype=float)
        model.linear_weight = np.array(derived["linear_weight"], dtype=float)
        model.offset = float(derived["offset"])
        model.log_det_offset = float(derived["log_det_offset"])
        model.pooled_cov = np.array(derived["pooled_cov"], dtype=float)
        model.single_cov = np.array(derived["single_cov"], dtype=float)
    return model


def save_model(model: TwoCovModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path: str | Path) -> TwoCovModel:
    return model_from_dict(json.loads(Path(path).read_text()))
