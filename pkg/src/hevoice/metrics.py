"""Verification metrics and linear score calibration.

ROCCH-EER reads the equal-error rate off the convex hull of the ROC,
computed with pool-adjacent-violators; Cllr treats scores as natural-log
likelihood ratios; min-Cllr is Cllr after PAV-optimal (monotone)
calibration, so min_cllr <= cllr holds by construction. The linear
calibration fit minimizes Cllr of a*s + b over the development scores.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .exceptions import CalibrationFitError, InputError

LOG2 = float(np.log(2.0))

DEFAULT_P_TARGET = 0.01
DEFAULT_C_MISS = 1.0
DEFAULT_C_FA = 1.0


@dataclass
class ScoreSet:
    target_scores: np.ndarray
    nontarget_scores: np.ndarray

    def __post_init__(self):
        self.target_scores = np.asarray(self.target_scores, dtype=float).ravel()
        self.nontarget_scores = np.asarray(self.nontarget_scores, dtype=float).ravel()

    def validate(self) -> "ScoreSet":
        if self.target_scores.size == 0 or self.nontarget_scores.size == 0:
            raise InputError("both score classes must be non-empty")
        return self


@dataclass
class CalibrationTransform:
    slope: float
    offset: float

    def apply(self, scores):
        return self.slope * np.asarray(scores, dtype=float) + self.offset


def _pav(values: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Least-squares non-decreasing fit; returns fitted values and block widths."""
    blocks: list[list[float]] = []  # [total, width]
    for v in values:
        blocks.append([float(v), 1])
        while (len(blocks) > 1
               and blocks[-2][0] * blocks[-1][1] >= blocks[-1][0] * blocks[-2][1]):
            total, width = blocks.pop()
            blocks[-1][0] += total
            blocks[-1][1] += width
    fitted = np.concatenate([np.full(w, t / w) for t, w in blocks])
    return fitted, [w for _, w in blocks]


def _sorted_ideal(s: ScoreSet) -> np.ndarray:
    """Ideal 0/1 posteriors sorted by score; targets first inside ties so
    tied opposite-class scores get pooled instead of split."""
    scores = np.concatenate([s.target_scores, s.nontarget_scores])
    ideal = np.concatenate([np.ones(s.target_scores.size),
                            np.zeros(s.nontarget_scores.size)])
    order = np.lexsort((-ideal, scores))
    return ideal[order]


def rocch(s: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the ROC convex hull as (pmiss, pfa) arrays."""
    s.validate()
    n_tar = s.target_scores.size
    n_non = s.nontarget_scores.size
    total = n_tar + n_non
    ideal = _sorted_ideal(s)
    _, widths = _pav(ideal)

    pmiss = np.zeros(len(widths) + 1)
    pfa = np.zeros(len(widths) + 1)
    left = 0
    miss = 0
    fa = n_non
    for i, width in enumerate(widths):
        pmiss[i] = miss / n_tar
        pfa[i] = fa / n_non
        left += width
        miss = int(ideal[:left].sum())
        fa = total - left - int(ideal[left:].sum())
    pmiss[-1] = miss / n_tar
    pfa[-1] = fa / n_non
    return pmiss, pfa


def rocch_eer(s: ScoreSet) -> float:
    """Equal-error rate of the ROC convex hull, in [0, 0.5]."""
    pmiss, pfa = rocch(s)
    eer = 0.0
    for i in range(len(pmiss) - 1):
        x0, y0 = pfa[i], pmiss[i]
        x1, y1 = pfa[i + 1], pmiss[i + 1]
        det = x0 * y1 - x1 * y0
        if det == 0.0:
            continue  # segment collinear with the origin cannot cross y = x
        a = (y1 - y0) / det
        b = (x0 - x1) / det
        if a + b != 0.0:
            eer = max(eer, 1.0 / (a + b))
    return eer


def _error_rates(s: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    """Pmiss/Pfa over the threshold sweep eta in {-inf} + sorted scores."""
    tar = np.sort(s.target_scores)
    non = np.sort(s.nontarget_scores)
    thresholds = np.unique(np.concatenate([tar, non, [np.inf]]))
    # accept iff eta <= score: misses are targets strictly below eta
    pmiss = np.searchsorted(tar, thresholds, side="left") / tar.size
    pfa = (non.size - np.searchsorted(non, thresholds, side="left")) / non.size
    pmiss = np.concatenate([[0.0], pmiss])
    pfa = np.concatenate([[1.0], pfa])
    return pmiss, pfa


def min_dcf(s: ScoreSet, p_target: float = DEFAULT_P_TARGET,
            c_miss: float = DEFAULT_C_MISS, c_fa: float = DEFAULT_C_FA) -> float:
    """Minimum normalized detection cost over all thresholds."""
    s.validate()
    if not (0.0 < p_target < 1.0) or c_miss <= 0.0 or c_fa <= 0.0:
        raise InputError("prior must lie in (0,1) and costs must be positive")
    pmiss, pfa = _error_rates(s)
    dcf = p_target * c_miss * pmiss + (1.0 - p_target) * c_fa * pfa
    return float(dcf.min() / min(p_target * c_miss, (1.0 - p_target) * c_fa))


def cllr(s: ScoreSet) -> float:
    """Log-likelihood-ratio cost of scores interpreted as natural-log LRs."""
    s.validate()
    tar_term = np.logaddexp(0.0, -s.target_scores).mean()
    non_term = np.logaddexp(0.0, s.nontarget_scores).mean()
    return float(0.5 * (tar_term + non_term) / LOG2)


def min_cllr(s: ScoreSet) -> float:
    """Cllr after PAV-optimal calibration; never exceeds cllr(s)."""
    s.validate()
    n_tar = s.target_scores.size
    n_non = s.nontarget_scores.size
    ideal = _sorted_ideal(s)
    posterior, _ = _pav(ideal)
    with np.errstate(divide="ignore"):
        log_odds = np.log(posterior) - np.log1p(-posterior)
    llr = log_odds - np.log(n_tar / n_non)
    calibrated = ScoreSet(llr[ideal == 1.0], llr[ideal == 0.0])
    return cllr(calibrated)


def fit_linear_calibration(dev: ScoreSet) -> CalibrationTransform:
    """Affine transform minimizing Cllr on the development scores."""
    dev.validate()
    if dev.target_scores.size < 2 or dev.nontarget_scores.size < 2:
        raise CalibrationFitError("need at least two scores per class to fit")
    tar = dev.target_scores
    non = dev.nontarget_scores

    def objective(params):
        a, b = params
        value = 0.5 * (np.logaddexp(0.0, -(a * tar + b)).mean()
                       + np.logaddexp(0.0, a * non + b).mean()) / LOG2
        grad_a = 0.5 * ((-tar * expit(-(a * tar + b))).mean()
                        + (non * expit(a * non + b)).mean()) / LOG2
        grad_b = 0.5 * ((-expit(-(a * tar + b))).mean()
                        + expit(a * non + b).mean()) / LOG2
        return value, np.array([grad_a, grad_b])

    result = minimize(objective, x0=np.array([1.0, 0.0]), jac=True,
                      method="L-BFGS-B")
    fitted = CalibrationTransform(slope=float(result.x[0]),
                                  offset=float(result.x[1]))
    # the identity is feasible, so a fit that ends up worse (pathological
    # optimizer exit) falls back to it
    if cllr(ScoreSet(fitted.apply(tar), fitted.apply(non))) > cllr(dev):
        return CalibrationTransform(slope=1.0, offset=0.0)
    return fitted


def det_points(s: ScoreSet) -> list[tuple[float, float]]:
    """ROCCH vertices as (FNMR, FMR) pairs for external plotting."""
    pmiss, pfa = rocch(s)
    return list(zip(pmiss.tolist(), pfa.tolist()))


def metric_report(s: ScoreSet, p_target: float = DEFAULT_P_TARGET,
                  c_miss: float = DEFAULT_C_MISS,
                  c_fa: float = DEFAULT_C_FA) -> dict:
    return {
        "n_target": int(s.target_scores.size),
        "n_nontarget": int(s.nontarget_scores.size),
        "rocch_eer": rocch_eer(s),
        "min_dcf": min_dcf(s, p_target, c_miss, c_fa),
        "min_dcf_params": {"p_target": p_target, "c_miss": c_miss, "c_fa": c_fa},
        "cllr": cllr(s),
        "min_cllr": min_cllr(s),
    }


# score files: CSV with columns (trial_id, label in {target, nontarget}, score)

def write_scores(path: str | Path, s: ScoreSet,
                 trial_ids: tuple[list, list] | None = None) -> None:
    tar_ids, non_ids = trial_ids if trial_ids is not None else (
        [f"tar-{i:06d}" for i in range(s.target_scores.size)],
        [f"non-{i:06d}" for i in range(s.nontarget_scores.size)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_id", "label", "score"])
        for tid, score in zip(tar_ids, s.target_scores):
            writer.writerow([tid, "target", repr(float(score))])
        for tid, score in zip(non_ids, s.nontarget_scores):
            writer.writerow([tid, "nontarget", repr(float(score))])


def read_scores(path: str | Path) -> ScoreSet:
    tar: list[float] = []
    non: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"label", "score"}:
            raise InputError("score CSV needs 'label' and 'score' columns")
        for row in reader:
            label = row["label"].strip()
            if label == "target":
                tar.append(float(row["score"]))
            elif label == "nontarget":
                non.append(float(row["score"]))
            else:
                raise InputError(f"unknown label {label!r} in score file")
    return ScoreSet(np.array(tar), np.array(non))


def write_det_points(path: str | Path, s: ScoreSet) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fnmr", "fmr"])
        for fnmr, fmr in det_points(s):
            writer.writerow([repr(fnmr), repr(fmr)])


def write_report(path: str | Path, report: dict) -> None:
    Path(path).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
