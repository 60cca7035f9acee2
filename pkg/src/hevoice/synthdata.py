"""Synthetic labeled corpora: Gaussian speakers with configurable covariances.

Speaker means are drawn from N(mean, between_cov) and observations from
N(speaker_mean, within_cov). The generator stands in for non-redistributable
evaluation data; everything is reproducible from a single seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import FileFormatError, ParameterError
from .twocov import LabeledCorpus

CORPUS_FILE_FORMAT = "hevoice-corpus"
CORPUS_FILE_VERSION = 1


def make_corpus(n_speakers: int, n_per_speaker: int, dim: int, seed: int,
                within_cov=None, between_cov=None, mean=None) -> LabeledCorpus:
    if n_speakers < 1 or n_per_speaker < 1 or dim < 1:
        raise ParameterError("speakers, vectors per speaker and dim must be >= 1")
    rng = np.random.default_rng(seed)
    within = np.eye(dim) * 0.25 if within_cov is None else np.asarray(within_cov, float)
    between = np.eye(dim) if between_cov is None else np.asarray(between_cov, float)
    mu = np.zeros(dim) if mean is None else np.asarray(mean, float)

    vectors = []
    labels = []
    for s in range(n_speakers):
        center = rng.multivariate_normal(mu, between)
        samples = rng.multivariate_normal(center, within, size=n_per_speaker)
        vectors.append(samples)
        labels.extend([f"spk{s:04d}"] * n_per_speaker)
    return LabeledCorpus(np.vstack(vectors), labels)


@dataclass
class TrialSet:
    """Verification trials against enrolled (averaged) references."""

    references: dict  # speaker id -> enrolment mean vector
    probes: list      # (claimed speaker id, probe vector, is_target)


def make_trials(corpus: LabeledCorpus, n_enroll: int, seed: int,
                max_nontarget_per_probe: int = 1) -> TrialSet:
    """Split each speaker's vectors into enrolment and probe halves.

    The first `n_enroll` vectors per speaker are averaged into the
    reference; the rest probe their own reference (target trials) and
    `max_nontarget_per_probe` other references (nontarget trials).
    """
    groups = corpus.by_speaker()
    rng = np.random.default_rng(seed)
    speakers = sorted(groups)
    references = {}
    probe_pool = []
    for spk in speakers:
        rows = groups[spk]
        if rows.shape[0] <= n_enroll:
            raise ParameterError(
                f"speaker {spk!r} needs more than {n_enroll} vectors to probe")
        references[spk] = rows[:n_enroll].mean(axis=0)
        for row in rows[n_enroll:]:
            probe_pool.append((spk, row))

    probes = []
    for spk, vector in probe_pool:
        probes.append((spk, vector, True))
        others = [s for s in speakers if s != spk]
        picks = rng.choice(len(others), size=min(max_nontarget_per_probe,
                                                 len(others)), replace=False)
        for idx in picks:
            probes.append((others[int(idx)], vector, False))
    return TrialSet(references=references, probes=probes)


def corpus_to_dict(corpus: LabeledCorpus) -> dict:
    return {
        "format": CORPUS_FILE_FORMAT,
        "version": CORPUS_FILE_VERSION,
        "dim": corpus.dim,
        "speaker_ids": list(corpus.speaker_ids),
        "vectors": corpus.vectors.tolist(),
    }


def corpus_from_dict(doc: dict) -> LabeledCorpus:
    if doc.get("format") != CORPUS_FILE_FORMAT:
        raise FileFormatError(f"not a {CORPUS_FILE_FORMAT} document")
    if doc.get("version") != CORPUS_FILE_VERSION:
        raise FileFormatError(f"unsupported corpus version {doc.get('version')}")
    return LabeledCorpus(np.array(doc["vectors"], dtype=float),
                         list(doc["speaker_ids"]))


def save_corpus(corpus: LabeledCorpus, path: str | Path) -> None:
    Path(path).write_text(json.dumps(corpus_to_dict(corpus), sort_keys=True) + "\n")


def load_corpus(path: str | Path) -> LabeledCorpus:
    return corpus_from_dict(json.loads(Path(path).read_text()))
