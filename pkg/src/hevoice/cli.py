"""Command-line entry point.

Commands: keygen | synth | train | enroll | verify | simulate | complexity |
metrics. Every command is deterministic under a fixed --seed. Exit codes:
0 success, 1 usage, 2 data, 3 crypto. Errors print one machine-parseable
line `error:<code>: <message>` to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from pathlib import Path

import numpy as np

from . import comparators, metrics, paillier, protocol, synthdata, twocov
from .counters import OpCounter
from .exceptions import (
    CalibrationFitError,
    CiphertextArithmeticError,
    ConditioningError,
    ConfigurationError,
    EncodingDomainError,
    EstimationError,
    FileFormatError,
    HevoiceError,
    InputError,
    KeyGenerationError,
    KeyMismatchError,
    LookupError_,
    MagnitudeError,
    NormalizationError,
    OverflowBandError,
    ParameterError,
    PlaintextRangeError,
    PrecisionOverflowError,
    ShapeError,
)
from .protocol import VendorKeySet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CRYPTO = 3

KEY_DIR_ENV = "HEVOICE_KEY_DIR"

_CRYPTO_ERRORS = (KeyMismatchError, PlaintextRangeError, CiphertextArithmeticError,
                  KeyGenerationError, OverflowBandError, PrecisionOverflowError,
                  MagnitudeError, EncodingDomainError)
_DATA_ERRORS = (FileFormatError, ShapeError, EstimationError, ConditioningError,
                InputError, CalibrationFitError, LookupError_, NormalizationError,
                ConfigurationError, OSError, json.JSONDecodeError, KeyError)

COMPARATORS = ("euclidean", "cosine", "2cov-subject", "2cov-vendor")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is 1
        raise _UsageError(message)


def _key_dir(args) -> Path:
    if getattr(args, "key_dir", None):
        return Path(args.key_dir)
    return Path(os.environ.get(KEY_DIR_ENV, "."))


def _default_key_path(value: str | None, filename: str) -> str:
    """Explicit path, or `filename` inside the default key directory."""
    if value:
        return value
    return str(Path(os.environ.get(KEY_DIR_ENV, ".")) / filename)


def _emit(doc: dict, out: str | None = None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _parse_probe(args) -> np.ndarray:
    if args.probe_file:
        return np.array(json.loads(Path(args.probe_file).read_text()), dtype=float)
    if args.probe:
        return np.array([float(v) for v in args.probe.split(",")], dtype=float)
    raise _UsageError("provide --probe or --probe-file")


def _speaker_mean(corpus, speaker) -> np.ndarray:
    groups = corpus.by_speaker()
    if speaker not in groups:
        raise LookupError_(f"speaker {speaker!r} not in corpus")
    return groups[speaker].mean(axis=0)


def _check_dim(expected: int, actual: int, what: str) -> None:
    if expected != actual:
        raise ShapeError(f"{what}: expected dimension {expected}, got {actual}")


# ---------------------------------------------------------------- commands

def cmd_keygen(args) -> int:
    directory = _key_dir(args)
    directory.mkdir(parents=True, exist_ok=True)
    pk, sk = paillier.keygen(args.bits, seed=args.seed)
    pub = directory / f"{args.name}-public.json"
    sec = directory / f"{args.name}-secret.json"
    paillier.save_keypair(pk, sk, pub, sec)
    _emit({"fingerprint": pk.fingerprint, "bits": pk.bit_length,
           "insecure": pk.bit_length < paillier.SECURE_BIT_LENGTH,
           "public_key": str(pub), "secret_key": str(sec)})
    return EXIT_OK


def cmd_synth(args) -> int:
    corpus = synthdata.make_corpus(
        args.speakers, args.per_speaker, args.F, seed=args.seed,
        within_cov=np.eye(args.F) * args.within_scale,
        between_cov=np.eye(args.F) * args.between_scale)
    synthdata.save_corpus(corpus, args.out)
    _emit({"corpus": args.out, "speakers": args.speakers,
           "vectors": corpus.vectors.shape[0], "F": args.F})
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = synthdata.load_corpus(args.corpus)
    vectors = corpus.vectors
    if args.length_normalize:
        vectors = np.array([twocov.length_normalize(v) for v in vectors])
        corpus = twocov.LabeledCorpus(vectors, corpus.speaker_ids)
    w_prec, b_prec, mu = twocov.estimate_covariances(corpus)
    model = twocov.derive_hyperparameters(w_prec, b_prec, mu)
    twocov.save_model(model, args.out)
    _emit({"model": args.out, "F": model.dim,
           "offset": model.offset, "speakers": len(set(corpus.speaker_ids))})
    return EXIT_OK


def cmd_enroll(args) -> int:
    pk = paillier.load_public_key(
        _default_key_path(args.public_key, "paillier-public.json"))
    corpus = synthdata.load_corpus(args.corpus)
    rng = random.Random(args.seed)
    speakers = sorted(corpus.by_speaker()) if args.speaker == "all" \
        else [args.speaker]
    model = twocov.load_model(args.model) if args.model else None
    if args.comparator == "2cov-subject" and model is None:
        raise _UsageError("--model is required for 2cov-subject enrolment")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for speaker in speakers:
        reference = _speaker_mean(corpus, speaker)
        if model is not None:
            _check_dim(model.dim, reference.shape[0], "model vs corpus")
        if args.comparator == "euclidean":
            ref = comparators.enroll_euclidean(pk, reference, rng=rng)
        elif args.comparator == "cosine":
            ref = comparators.enroll_cosine(
                pk, twocov.length_normalize(reference), rng=rng)
        elif args.comparator == "2cov-subject":
            ref = comparators.enroll_2cov_subject(
                pk, model.self_weight, reference, rng=rng)
        else:
            ref = comparators.enroll_2cov_vendor(pk, reference, rng=rng)
        path = out_dir / f"{args.comparator}-{speaker}.json"
        comparators.save_template(ref, path)
        written.append(str(path))
    _emit({"templates": written, "comparator": args.comparator,
           "key_fingerprint": pk.fingerprint})
    return EXIT_OK


def _write_run_outputs(result, out_dir: str | None) -> dict:
    summary = result.summary()
    if out_dir:
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "transcript.jsonl").write_text(result.transcript_text())
        (directory / "ledger.json").write_text(
            json.dumps(summary["channels"], sort_keys=True, indent=2) + "\n")
        (directory / "decision.json").write_text(
            json.dumps(summary["decision"], sort_keys=True, indent=2) + "\n")
    return summary


def cmd_verify(args) -> int:
    probe = _parse_probe(args)
    template = comparators.load_template(args.template)
    _check_dim(len(template.elements), probe.shape[0], "template vs probe")
    refs = {"claim": template}
    public_path = _default_key_path(args.public_key, "paillier-public.json")
    secret_path = _default_key_path(args.secret_key, "paillier-secret.json")

    if args.comparator == "2cov-vendor":
        if not (args.vendor_public_key and args.vendor_secret_key and args.model):
            raise _UsageError("2cov-vendor verify needs --vendor-public-key, "
                              "--vendor-secret-key and --model")
        pk1 = paillier.load_public_key(public_path)
        _, sk1 = paillier.load_secret_key(secret_path)
        pk2 = paillier.load_public_key(args.vendor_public_key)
        _, sk2 = paillier.load_secret_key(args.vendor_secret_key)
        model = twocov.load_model(args.model)
        enc_model = comparators.encrypt_model(
            pk2, model, rng=random.Random(args.seed))
        keys = VendorKeySet(pk1=pk1, sk1=sk1, pk2=pk2, sk2=sk2)
        result = protocol.run_2cov_vendor(keys, enc_model, refs, "claim",
                                          probe, args.eta, seed=args.seed)
    else:
        pk = paillier.load_public_key(public_path)
        _, sk = paillier.load_secret_key(secret_path)
        if args.comparator == "euclidean":
            result = protocol.run_euclidean(pk, sk, refs, "claim", probe,
                                            args.eta, seed=args.seed)
        elif args.comparator == "cosine":
            result = protocol.run_cosine(pk, sk, refs, "claim", probe,
                                         args.eta, seed=args.seed)
        else:
            if not args.model:
                raise _UsageError("2cov-subject verify needs --model")
            model = twocov.load_model(args.model)
            result = protocol.run_2cov_subject(pk, sk, model, refs, "claim",
                                               probe, args.eta, seed=args.seed)
    protocol.audit_key_hygiene(result)
    _emit(_write_run_outputs(result, args.out_dir))
    return EXIT_OK if result.decision.accepted or not args.fail_on_reject \
        else EXIT_DATA


def cmd_simulate(args) -> int:
    rng_seed = args.seed
    pk, sk = paillier.keygen(args.bits, seed=rng_seed)
    corpus = synthdata.make_corpus(args.speakers, args.per_speaker, args.F,
                                   seed=rng_seed + 1)
    w_prec, b_prec, mu = twocov.estimate_covariances(corpus)
    model = twocov.derive_hyperparameters(w_prec, b_prec, mu)
    trials = synthdata.make_trials(corpus, n_enroll=args.per_speaker // 2,
                                   seed=rng_seed + 2)
    enroll_rng = random.Random(rng_seed + 3)

    refs = {}
    for speaker, reference in sorted(trials.references.items()):
        if args.comparator == "euclidean":
            refs[speaker] = comparators.enroll_euclidean(pk, reference,
                                                         rng=enroll_rng)
        elif args.comparator == "cosine":
            refs[speaker] = comparators.enroll_cosine(
                pk, twocov.length_normalize(reference), rng=enroll_rng)
        elif args.comparator == "2cov-subject":
            refs[speaker] = comparators.enroll_2cov_subject(
                pk, model.self_weight, reference, rng=enroll_rng)
        else:
            refs[speaker] = comparators.enroll_2cov_vendor(pk, reference,
                                                           rng=enroll_rng)

    vendor_keys = None
    enc_model = None
    if args.comparator == "2cov-vendor":
        pk2, sk2 = paillier.keygen(args.bits, seed=rng_seed + 4)
        vendor_keys = VendorKeySet(pk1=pk, sk1=sk, pk2=pk2, sk2=sk2)
        enc_model = comparators.encrypt_model(pk2, model, rng=enroll_rng)

    plain_tar, plain_non = [], []
    enc_tar, enc_non = [], []
    totals = OpCounter()
    transcript_parts = []
    selected = trials.probes[: args.trials] if args.trials else trials.probes
    for i, (claim, probe, is_target) in enumerate(selected):
        if args.comparator == "cosine":
            probe_used = twocov.length_normalize(probe)
            plain = float(probe_used @ twocov.length_normalize(
                trials.references[claim]))
        elif args.comparator == "euclidean":
            probe_used = probe
            plain = float(np.sum((probe - trials.references[claim]) ** 2))
        else:
            probe_used = probe
            plain = twocov.score_discriminative(model, probe,
                                                trials.references[claim])
        if args.comparator == "2cov-vendor":
            result = protocol.run_2cov_vendor(vendor_keys, enc_model, refs,
                                              claim, probe_used, args.eta,
                                              seed=rng_seed + 10 + i)
        elif args.comparator == "2cov-subject":
            result = protocol.run_2cov_subject(pk, sk, model, refs, claim,
                                               probe_used, args.eta,
                                               seed=rng_seed + 10 + i)
        elif args.comparator == "cosine":
            result = protocol.run_cosine(pk, sk, refs, claim, probe_used,
                                         args.eta, seed=rng_seed + 10 + i)
        else:
            result = protocol.run_euclidean(pk, sk, refs, claim, probe_used,
                                            args.eta, seed=rng_seed + 10 + i)
        totals.merge(result.counters)
        transcript_parts.append(result.transcript_text())
        (plain_tar if is_target else plain_non).append(plain)
        (enc_tar if is_target else enc_non).append(result.score)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Euclidean emits distances (lower is genuine); score files and metrics
    # use the negated value so higher-is-genuine holds for every comparator
    sign = -1.0 if args.comparator == "euclidean" else 1.0
    plain_scores = metrics.ScoreSet(sign * np.array(plain_tar),
                                    sign * np.array(plain_non))
    enc_scores = metrics.ScoreSet(sign * np.array(enc_tar),
                                  sign * np.array(enc_non))
    metrics.write_scores(out_dir / "scores-plain.csv", plain_scores)
    metrics.write_scores(out_dir / "scores-encrypted.csv", enc_scores)
    transcript_text = "".join(transcript_parts)
    (out_dir / "transcripts.jsonl").write_text(transcript_text)
    report = {
        "comparator": args.comparator,
        "F": args.F,
        "trials": len(selected),
        "score_polarity": ("negated_distance" if args.comparator == "euclidean"
                           else "similarity"),
        "operations": totals.as_dict(),
        "metrics_plain": metrics.metric_report(plain_scores),
        "metrics_encrypted": metrics.metric_report(enc_scores),
        "transcript_sha256": hashlib.sha256(transcript_text.encode()).hexdigest(),
    }
    metrics.write_report(out_dir / "report.json", report)
    _emit(report)
    return EXIT_OK


def cmd_complexity(args) -> int:
    nu_bytes = args.nu_kib * 1024.0
    report = protocol.complexity_report(args.comparator, args.F, nu_bytes,
                                        args.p_bits)
    if args.comparator == "2cov-vendor":
        report["preload"] = protocol.preload_analysis(args.F, nu_bytes)
    _emit(report, args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    scores = metrics.read_scores(args.scores)
    if args.calibrate:
        dev = metrics.read_scores(args.calibrate)
        transform = metrics.fit_linear_calibration(dev)
        scores = metrics.ScoreSet(transform.apply(scores.target_scores),
                                  transform.apply(scores.nontarget_scores))
    report = metrics.metric_report(scores, args.p_target, args.c_miss, args.c_fa)
    if args.calibrate:
        report["calibration"] = {"slope": transform.slope,
                                 "offset": transform.offset}
    if args.det_out:
        metrics.write_det_points(args.det_out, scores)
        report["det_points"] = args.det_out
    _emit(report, args.out)
    return EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> _Parser:
    parser = _Parser(prog="hevoice",
                     description="Homomorphically encrypted speaker verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a keypair")
    p.add_argument("--bits", type=int, default=2048)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--name", default="paillier")
    p.add_argument("--key-dir", default=None,
                   help=f"output directory (default ${KEY_DIR_ENV} or .)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--F", type=int, default=16)
    p.add_argument("--speakers", type=int, default=20)
    p.add_argument("--per-speaker", type=int, default=20)
    p.add_argument("--within-scale", type=float, default=0.25)
    p.add_argument("--between-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit the two-covariance comparator")
    p.add_argument("--corpus", required=True)
    p.add_argument("--length-normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("enroll", help="write protected reference templates")
    p.add_argument("--comparator", choices=COMPARATORS, required=True)
    p.add_argument("--public-key", default=None,
                   help=f"defaults to ${KEY_DIR_ENV}/paillier-public.json")
    p.add_argument("--corpus", required=True)
    p.add_argument("--speaker", default="all",
                   help="speaker id or 'all' (averaged enrolment vectors)")
    p.add_argument("--model", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("verify", help="run one verification protocol exchange")
    p.add_argument("--comparator", choices=COMPARATORS, required=True)
    p.add_argument("--public-key", default=None,
                   help=f"defaults to ${KEY_DIR_ENV}/paillier-public.json")
    p.add_argument("--secret-key", default=None,
                   help=f"defaults to ${KEY_DIR_ENV}/paillier-secret.json")
    p.add_argument("--vendor-public-key", default=None)
    p.add_argument("--vendor-secret-key", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--template", required=True)
    p.add_argument("--probe", default=None,
                   help="comma-separated values; use --probe=-0.1,... when "
                        "the first component is negative")
    p.add_argument("--probe-file", default=None, help="JSON array file")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--fail-on-reject", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate",
                       help="seeded end-to-end pipeline over synthetic trials")
    p.add_argument("--comparator", choices=COMPARATORS, required=True)
    p.add_argument("--F", type=int, default=16)
    p.add_argument("--speakers", type=int, default=20)
    p.add_argument("--per-speaker", type=int, default=20)
    p.add_argument("--trials", type=int, default=0,
                   help="limit the number of trials (0: all)")
    p.add_argument("--bits", type=int, default=512)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("complexity", help="closed-form complexity tables")
    p.add_argument("--comparator", choices=COMPARATORS, required=True)
    p.add_argument("--F", type=int, default=250)
    p.add_argument("--nu-kib", type=float, default=0.5,
                   help="per-ciphertext channel cost in KiB (2n bits)")
    p.add_argument("--p-bits", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("metrics", help="metric report from a score CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--calibrate", default=None,
                   help="development score CSV for linear calibration")
    p.add_argument("--p-target", type=float, default=metrics.DEFAULT_P_TARGET)
    p.add_argument("--c-miss", type=float, default=metrics.DEFAULT_C_MISS)
    p.add_argument("--c-fa", type=float, default=metrics.DEFAULT_C_FA)
    p.add_argument("--det-out", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _CRYPTO_ERRORS as exc:
        print(f"error:crypto: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except _DATA_ERRORS as exc:
        print(f"error:data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except HevoiceError as exc:
        print(f"error:data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
