"""Command-line pipeline: factorize, gram, train, predict, grid-search,
bands, synth.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
non-convergence. The first line on standard error for any failure is
machine-parsable: ``error: <code>: <message>``.

Scalar and grid flags accept plain decimals, ``2^k`` powers, comma lists,
and ``2^a..2^b`` inclusive ranges (grids only).
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from . import data
from ._textio import DataFileError, format_value, write_lines
from .core import ConvergenceError, SymmetricMatrix
from .experiment import (
    ExperimentReport,
    GridSpec,
    grid_search,
    render_report,
    report_csv,
)
from .factorization import FactorizationConfig, factorize, objective
from .baselines import clustering_coefficients, edge_features
from .kernel import (
    RbfParams,
    build_cross_gram,
    build_gram,
    load_gram,
    psd_report,
    save_gram,
    vector_cross_gram,
    vector_gram,
)
from .svm import SvmConfig, accuracy, load_model, predict, save_model, train_multiclass
from .core import frobenius_residual


class UsageError(Exception):
    """Bad flags or malformed flag values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_POWER = re.compile(r"2\^(-?\d+)$")
_RANGE = re.compile(r"2\^(-?\d+)\.\.2\^(-?\d+)$")


def _parse_atom(text: str) -> float:
    m = _POWER.match(text)
    if m:
        return float(2.0 ** int(m.group(1)))
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None


def parse_scalar(text: str) -> float:
    """One numeric flag value; accepts decimals and 2^k."""
    return _parse_atom(text.strip())


def parse_grid(text: str, integer: bool = False) -> tuple:
    """Comma list of atoms and/or 2^a..2^b ranges."""
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise UsageError(f"empty element in grid {text!r}")
        m = _RANGE.match(part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise UsageError(f"descending range in grid {part!r}")
            values.extend(float(2.0**e) for e in range(lo, hi + 1))
        else:
            values.append(_parse_atom(part))
    if integer:
        out = []
        for v in values:
            if v != int(v):
                raise UsageError(f"grid {text!r} must hold integers")
            out.append(int(v))
        return tuple(out)
    return tuple(values)


def _require_labels(manifest: data.SampleManifest, path: str) -> list[str]:
    if not manifest.has_labels:
        raise DataFileError(f"{path}: manifest has no labels, required here")
    return [row.label for row in manifest.rows]


def _load_matrices(manifest: data.SampleManifest) -> list[SymmetricMatrix]:
    matrices = []
    for row in manifest.rows:
        x = data.load_matrix(manifest.resolved_path(row))
        if matrices and x.dim != matrices[0].dim:
            raise DataFileError(
                f"{row.path}: dimension {x.dim} != {matrices[0].dim} of the first sample"
            )
        matrices.append(x)
    return matrices


def _load_factor_sets(manifest: data.SampleManifest):
    sets = []
    for row in manifest.rows:
        f = data.load_factors(manifest.resolved_path(row))
        if sets and f.dim != sets[0].dim:
            raise DataFileError(
                f"{row.path}: dimension {f.dim} != {sets[0].dim} of the first sample"
            )
        sets.append(f)
    return sets


def _out_path(out_dir: str, rel: str, suffix: str) -> str:
    stem, _ = os.path.splitext(rel)
    return f"{stem}{suffix}"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def cmd_factorize(args) -> int:
    config = FactorizationConfig(
        rank=args.rank, lam=args.lam, max_iters=args.max_iters, rel_tol=args.rel_tol
    )

    def run_one(x: SymmetricMatrix, label: str):
        result = factorize(x, config)
        obj = objective(x, result.factors, args.lam)
        res = frobenius_residual(x, result.factors)
        print(
            f"{label}: objective={format_value(obj)} residual={format_value(res)} "
            f"iterations={result.iterations} "
            f"converged={'yes' if result.converged else 'no'}"
        )
        return result.factors

    if args.input is not None:
        factors = run_one(data.load_matrix(args.input), args.input)
        _ensure_parent(args.out)
        data.save_factors(factors, args.out)
        return 0

    manifest = data.load_manifest(args.manifest)
    rows = []
    for row in manifest.rows:
        x = data.load_matrix(manifest.resolved_path(row))
        factors = run_one(x, row.path)
        rel = _out_path(args.out, row.path, ".factors.txt")
        target = os.path.join(args.out, rel)
        _ensure_parent(target)
        data.save_factors(factors, target)
        rows.append(data.ManifestRow(rel, row.label, row.group))
    data.save_manifest(
        data.SampleManifest(tuple(rows), args.out), os.path.join(args.out, "manifest.csv")
    )
    return 0


def cmd_gram(args) -> int:
    manifest = data.load_manifest(args.manifest)
    ids = [row.path for row in manifest.rows]
    params = RbfParams(args.gamma)
    if args.method == "ssgk":
        gram = build_gram(
            _load_factor_sets(manifest), params, normalize=args.normalize, row_ids=ids
        )
    else:
        if args.normalize:
            raise UsageError("--normalize applies only to --method ssgk")
        feats = _feature_rows(_load_matrices(manifest), args.method, args.cc_mean)
        gram = vector_gram(feats, params, row_ids=ids)
    _ensure_parent(args.out)
    save_gram(gram, args.out)
    report = psd_report(gram)
    print(
        f"psd: min_eig={format_value(report.min_eig)} "
        f"is_psd={'true' if report.is_psd else 'false'}",
        file=sys.stderr,
    )
    return 0


def _feature_rows(matrices, method: str, cc_mean: bool) -> np.ndarray:
    if method == "edge":
        return np.vstack([edge_features(x) for x in matrices])
    if cc_mean:
        return np.array([[clustering_coefficients(x, mean=True)] for x in matrices])
    return np.vstack([clustering_coefficients(x) for x in matrices])


def cmd_train(args) -> int:
    gram = load_gram(args.gram)
    manifest = data.load_manifest(args.manifest)
    if gram.size != len(manifest.rows):
        raise DataFileError(
            f"{args.gram}: {gram.size} Gram rows for {len(manifest.rows)} manifest rows"
        )
    labels = _require_labels(manifest, args.manifest)
    if args.method == "ssgk" and (args.rank is None or args.lam is None):
        raise UsageError("--rank and --lam are required with --method ssgk")
    config = SvmConfig(c=args.c, kkt_tol=args.kkt_tol, seed=args.seed)
    model = train_multiclass(gram, labels, config)
    meta = {"method": args.method, "c": args.c, "gamma": args.gamma}
    if args.method == "ssgk":
        meta.update(rank=args.rank, lam=args.lam, normalize=args.normalize)
    if args.method == "cc":
        meta["cc_mean"] = args.cc_mean
    _ensure_parent(args.out)
    save_model(args.out, model, meta)
    train_acc = accuracy(predict(model, gram.values), labels)
    print(f"train_acc: {train_acc:.2f}")
    return 0


def cmd_predict(args) -> int:
    model, meta = load_model(args.model)
    train_manifest = data.load_manifest(args.train)
    if model.n_train != len(train_manifest.rows):
        raise DataFileError(
            f"{args.train}: {len(train_manifest.rows)} rows for a model trained on "
            f"{model.n_train} samples"
        )
    test_manifest = data.load_manifest(args.manifest)
    params = RbfParams(meta["gamma"])
    if meta["method"] == "ssgk":
        train_sets = _load_factor_sets(train_manifest)
        config = FactorizationConfig(rank=meta["rank"], lam=meta["lam"])
        test_sets = [
            factorize(data.load_matrix(test_manifest.resolved_path(row)), config).factors
            for row in test_manifest.rows
        ]
        cross = build_cross_gram(
            test_sets, train_sets, params, normalize=meta.get("normalize", False)
        )
    else:
        cc_mean = meta.get("cc_mean", False)
        train_feats = _feature_rows(
            _load_matrices(train_manifest), meta["method"], cc_mean
        )
        test_feats = _feature_rows(
            _load_matrices(test_manifest), meta["method"], cc_mean
        )
        cross = vector_cross_gram(test_feats, train_feats, params)
    predictions = predict(model, cross)

    with_truth = test_manifest.has_labels
    lines = ["path,predicted,truth" if with_truth else "path,predicted"]
    for row, pred in zip(test_manifest.rows, predictions):
        lines.append(
            f"{row.path},{pred},{row.label}" if with_truth else f"{row.path},{pred}"
        )
    _ensure_parent(args.out)
    write_lines(args.out, lines)
    if with_truth:
        acc = accuracy(predictions, [row.label for row in test_manifest.rows])
        print(f"accuracy: {acc:.2f}")
    else:
        print("accuracy omitted: manifest has no labels", file=sys.stderr)
    return 0


def cmd_grid_search(args) -> int:
    manifest = data.load_manifest(args.manifest)
    labels = _require_labels(manifest, args.manifest)
    matrices = _load_matrices(manifest)
    test_matrices = test_labels = None
    if args.test_manifest is not None:
        test_manifest = data.load_manifest(args.test_manifest)
        test_labels = _require_labels(test_manifest, args.test_manifest)
        test_matrices = _load_matrices(test_manifest)
    grid = GridSpec(
        c_values=args.c_grid,
        gamma_values=args.gamma_grid,
        r_values=args.r_grid,
        lambda_values=args.lam_grid,
    )
    report = grid_search(
        matrices,
        labels,
        grid,
        method=args.method,
        folds=args.folds,
        seed=args.seed,
        jobs=args.jobs,
        normalize=args.normalize,
        cc_mean=args.cc_mean,
        test_matrices=test_matrices,
        test_labels=test_labels,
    )
    if args.out is not None:
        _ensure_parent(args.out)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(render_report(report))
    if args.csv is not None:
        _ensure_parent(args.csv)
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_csv(report))
    _print_summary(report)
    return 0


def _print_summary(report: ExperimentReport) -> None:
    b = report.best
    rank = "-" if b.rank is None else b.rank
    lam = "-" if b.lam is None else f"{b.lam:g}"
    print(
        f"best: rank={rank} lam={lam} gamma={b.gamma:g} c={b.c:g} "
        f"val_acc={b.val_accuracy:.2f}"
    )
    if report.test_accuracy is not None:
        print(f"test_acc: {report.test_accuracy:.2f}")
    print(f"wall_time_s: {report.wall_time_s:.2f}")


def cmd_bands(args) -> int:
    band = _band(args.band)
    manifest = data.load_manifest(args.manifest)
    rows = []
    for row in manifest.rows:
        tensor = data.load_stacked(manifest.resolved_path(row))
        averaged = data.band_average(tensor, band)
        rel = _out_path(args.out, row.path, f".{band.name}.txt")
        target = os.path.join(args.out, rel)
        _ensure_parent(target)
        data.save_matrix(averaged, target)
        rows.append(data.ManifestRow(rel, row.label, row.group))
    data.save_manifest(
        data.SampleManifest(tuple(rows), args.out), os.path.join(args.out, "manifest.csv")
    )
    return 0


def _band(name: str) -> data.BandSpec:
    try:
        return data.band_by_name(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def cmd_synth(args) -> int:
    config = data.SyntheticConfig(
        num_classes=args.classes,
        dim=args.dim,
        template_rank=args.template_rank,
        noise_sigma=args.sigma,
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        seed=args.seed,
    )
    dataset = data.generate_synthetic(config)
    for manifest, matrices, name in (
        (dataset.train_manifest, dataset.train_matrices, "train.csv"),
        (dataset.test_manifest, dataset.test_matrices, "test.csv"),
    ):
        for row, x in zip(manifest.rows, matrices):
            target = os.path.join(args.out, row.path)
            _ensure_parent(target)
            data.save_matrix(x, target)
        data.save_manifest(
            data.SampleManifest(manifest.rows, args.out), os.path.join(args.out, name)
        )
    n_train = len(dataset.train_manifest.rows)
    n_test = len(dataset.test_manifest.rows)
    print(f"wrote {n_train} train and {n_test} test matrices to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ssgk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factorize", help="factor connectivity matrices")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="single matrix file")
    src.add_argument("--manifest", help="manifest of matrix files")
    p.add_argument("--rank", type=int, required=True, help="number of factors R")
    p.add_argument("--lam", type=parse_scalar, default=0.0, help="l1 penalty weight")
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--rel-tol", type=float, default=1e-9)
    p.add_argument(
        "--out",
        required=True,
        help="factor file (with --input) or output directory (with --manifest)",
    )
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("gram", help="build and save a kernel matrix")
    p.add_argument("--manifest", required=True, help="factor files (ssgk) or matrices")
    p.add_argument("--gamma", type=parse_scalar, required=True)
    p.add_argument("--method", choices=("ssgk", "edge", "cc"), default="ssgk")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--cc-mean", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("train", help="train a multiclass SVM on a saved Gram")
    p.add_argument("--gram", required=True)
    p.add_argument("--manifest", required=True, help="labels, aligned with Gram rows")
    p.add_argument("--c", type=parse_scalar, required=True)
    p.add_argument("--gamma", type=parse_scalar, required=True, help="recorded for prediction")
    p.add_argument("--method", choices=("ssgk", "edge", "cc"), default="ssgk")
    p.add_argument("--rank", type=int)
    p.add_argument("--lam", type=parse_scalar)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--cc-mean", action="store_true")
    p.add_argument("--kkt-tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels for a test manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True, help="test matrices, labels optional")
    p.add_argument("--train", required=True, help="training factor files or matrices")
    p.add_argument("--out", required=True, help="predictions CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid-search", help="cross-validated hyperparameter search")
    p.add_argument("--manifest", required=True, help="training matrices with labels")
    p.add_argument("--test-manifest", help="optional held-out set")
    p.add_argument("--method", choices=("ssgk", "edge", "cc"), default="ssgk")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--cc-mean", action="store_true")
    p.add_argument("--c-grid", type=parse_grid, default=parse_grid("2^-8..2^8"))
    p.add_argument("--gamma-grid", type=parse_grid, default=parse_grid("2^-8..2^8"))
    p.add_argument(
        "--r-grid",
        type=lambda t: parse_grid(t, integer=True),
        default=tuple(range(1, 13)),
    )
    p.add_argument("--lam-grid", type=parse_grid, default=parse_grid("2^-2..2^8"))
    p.add_argument("--out", help="report file")
    p.add_argument("--csv", help="optional CSV of all rows")
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("bands", help="average stacked tensors over a frequency band")
    p.add_argument("--manifest", required=True, help="stacked tensor files")
    p.add_argument("--band", required=True, help="delta, theta, alpha, beta, or all")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--template-rank", type=int, default=3)
    p.add_argument("--sigma", type=parse_scalar, default=0.2)
    p.add_argument("--train-per-class", type=int, default=20)
    p.add_argument("--test-per-class", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"error: convergence: {exc}", file=sys.stderr)
        return 3
    except (DataFileError, ValueError, OSError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
