"""Command-line entry points: single-pair scoring, CSV batch scoring, training."""

from __future__ import annotations

import argparse
import csv
import sys
import warnings

import numpy as np

from .audio_io import DurationWarning, load_wav, prepare_pair
from .errors import (
    CorruptModelError,
    DurationTooShortError,
    EmptyAudioError,
    MalformedFileError,
    NoPatchesError,
    RefmosError,
    SampleRateMismatchError,
    UnsupportedEncodingError,
    VersionMismatchError,
    WrongModeRateError,
)
from .mos_mapping import load_model, save_model, train_svr
from .pipeline import Config, QualityResult, compare

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3

_IO_ERRORS = (
    OSError,
    MalformedFileError,
    UnsupportedEncodingError,
    EmptyAudioError,
    CorruptModelError,
    VersionMismatchError,
)
_VALIDATION_ERRORS = (
    SampleRateMismatchError,
    WrongModeRateError,
    DurationTooShortError,
    NoPatchesError,
)


def _build_config(args) -> Config:
    mode = "speech" if args.use_speech_mode else "audio"
    overrides = {}
    if args.similarity_to_quality_model:
        with open(args.similarity_to_quality_model, "rb") as fh:
            overrides["svr_model"] = load_model(fh.read())
        overrides["model"] = "svr"
    return Config.for_mode(mode, **overrides)


def _score_pair(ref_path: str, deg_path: str, cfg: Config) -> QualityResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DurationWarning)  # reported via result
        ref = load_wav(ref_path)
        deg = load_wav(deg_path)
        prepare_pair(ref, deg, cfg.mode)
    return compare(ref, deg, cfg)


def _print_result(result: QualityResult, verbose: bool) -> None:
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    if verbose:
        print(f"Conformance version: {result.conformance_version}")
        print(f"Overall NSIM: {result.overall_nsim:.6f}")
        print("FVNSIM:")
        for freq, value in zip(result.center_freqs_hz, result.fvnsim):
            print(f"  {freq:.2f} Hz: {value:.6f}")
        frames = " ".join(f"{v:.6f}" for v in result.per_frame_nsim)
        print(f"Per-frame NSIM: {frames}")
    print(f"MOS-LQO: {result.mos:.5f}")


def _run_single(args) -> int:
    try:
        cfg = _build_config(args)
        result = _score_pair(args.reference_file, args.degraded_file, cfg)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # unexpected: internal
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _print_result(result, args.verbose)
    return EXIT_OK


def _run_batch(args) -> int:
    try:
        cfg = _build_config(args)
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with open(args.batch_input_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"reference", "degraded"} <= set(
                reader.fieldnames
            ):
                print("error: batch CSV needs a 'reference,degraded' header",
                      file=sys.stderr)
                return EXIT_IO
            rows = [(row["reference"], row["degraded"]) for row in reader]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    results = []
    for ref_path, deg_path in rows:
        try:
            result = _score_pair(ref_path, deg_path, cfg)
            results.append((ref_path, deg_path, f"{result.mos:.5f}", ""))
        except (RefmosError, OSError) as exc:
            results.append((ref_path, deg_path, "", str(exc)))

    out = open(args.results_csv, "w", newline="") if args.results_csv else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["reference", "degraded", "moslqo", "error"])
        writer.writerows(results)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refmos",
        description="Full-reference audio/speech quality: estimate MOS for a "
                    "degraded signal against its clean reference.",
    )
    parser.add_argument("--reference_file", help="clean reference WAV")
    parser.add_argument("--degraded_file", help="degraded WAV to score")
    parser.add_argument("--batch_input_csv",
                        help="CSV with 'reference,degraded' header for batch scoring")
    parser.add_argument("--results_csv",
                        help="where to write batch results (default: stdout)")
    parser.add_argument("--use_speech_mode", action="store_true",
                        help="16 kHz speech mode (default is 48 kHz audio mode)")
    parser.add_argument("--similarity_to_quality_model",
                        help="path to a trained similarity-to-quality model file")
    parser.add_argument("--verbose", action="store_true",
                        help="print conformance version, NSIM and per-band detail")
    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    if args.batch_input_csv:
        if args.reference_file or args.degraded_file:
            parser.error("--batch_input_csv cannot be combined with single-pair flags")
        return _run_batch(args)
    if not (args.reference_file and args.degraded_file):
        parser.error("need --reference_file and --degraded_file, or --batch_input_csv")
    return _run_single(args)


def _extract_training_rows(path: str):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"reference", "degraded", "mos"} <= set(
            reader.fieldnames
        ):
            raise ValueError("training CSV needs a 'reference,degraded,mos' header")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                mos = float(row["mos"])
            except (TypeError, ValueError):
                raise ValueError(f"line {i}: mos {row.get('mos')!r} is not a number")
            if not (1.0 <= mos <= 5.0):
                raise ValueError(f"line {i}: mos {mos} outside [1, 5]")
            rows.append((row["reference"], row["degraded"], mos))
    if not rows:
        raise ValueError("training CSV has no data rows")
    return rows


def train_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="refmos-train",
        description="Train a similarity-to-quality SVR model from a CSV of "
                    "reference,degraded,mos rows.",
    )
    parser.add_argument("--train_csv", required=True,
                        help="CSV with 'reference,degraded,mos' rows")
    parser.add_argument("--output_model", required=True,
                        help="where to write the trained model file")
    parser.add_argument("--use_speech_mode", action="store_true",
                        help="extract features in 16 kHz speech mode")
    args = parser.parse_args(argv)

    mode = "speech" if args.use_speech_mode else "audio"
    cfg = Config.for_mode(mode)
    try:
        rows = _extract_training_rows(args.train_csv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    features = []
    labels = []
    try:
        for ref_path, deg_path, mos in rows:
            result = _score_pair(ref_path, deg_path, cfg)
            features.append(result.fvnsim)
            labels.append(mos)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RefmosError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    model, report = train_svr(np.array(features), np.array(labels))
    with open(args.output_model, "wb") as fh:
        fh.write(save_model(model))

    print("CV RMSE grid (rows: C, cols: gamma):")
    header = " ".join(f"{g:>9.4g}" for g in report.gamma_values)
    print(f"{'':>9} {header}")
    for c, row in zip(report.c_values, report.rmse):
        cells = " ".join(f"{v:>9.4f}" for v in row)
        print(f"{c:>9.4g} {cells}")
    print(f"best C={report.best_c:g} gamma={report.best_gamma:g} "
          f"rmse={report.best_rmse:.4f}")
    print(f"model written to {args.output_model}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
