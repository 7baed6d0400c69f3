"""Command-line front end.

    protosel select    fit prototypes at one radius and write a model document
    protosel cv        cross-validate over a radius grid
    protosel classify  apply a model document to new points
    protosel quantiles print the radius grid

Exit codes: 0 ok, 2 usage error, 3 data error, 4 solver failure.
"""

import argparse
import io
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from . import dissim
from .classify import evaluate_classifier, predict
from .cover import LabeledDataset, make_problem
from .errors import InputError, SolverError, StateError
from .greedy import write_trace_csv
from .io import (atomic_write, dump_json, load_model, read_features, read_labels,
                 read_matrix, solution_document)
from .select import SOLVERS, augment_candidates_kmeans, cross_validate, solve

log = logging.getLogger("protosel")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- argument parsing ----------------------------------------------------------

def _add_input_args(p):
    p.add_argument("--input", required=True, help="CSV with features or a square matrix")
    p.add_argument("--input-kind", choices=("features", "dissimilarity", "kernel"),
                   default="features")
    p.add_argument("--labels-col", help="label column (header name or 1-based index)")
    p.add_argument("--labels", help="separate one-column label file")
    p.add_argument("--metric", choices=("l1", "l2", "rank", "precomputed"), default=None,
                   help="default: l2 for features, precomputed for matrices")
    p.add_argument("--base-metric", choices=("l1", "l2"), default="l2",
                   help="metric under the rank transform for feature input")


def _add_solver_args(p):
    p.add_argument("--lambda", dest="lam", default="1/n",
                   help="cost per prototype: a number, a fraction a/b, or 1/n (default)")
    p.add_argument("--solver", choices=SOLVERS, default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmeans", type=int, default=None, metavar="K",
                   help="add K per-class k-means centroids to the candidates")


def _add_output_args(p):
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="protosel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="fit a prototype model")
    _add_input_args(p)
    p.add_argument("--epsilon", required=True, help="ball radius, or q:P for a quantile level")
    _add_solver_args(p)
    _add_output_args(p)
    p.add_argument("--trace-out", help="write the greedy trace as CSV")

    p = sub.add_parser("cv", help="cross-validate over a radius grid")
    _add_input_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=int, default=20,
                   help="number of quantile levels from min to median distance")
    g.add_argument("--epsilons", help="comma-separated explicit radii")
    p.add_argument("--folds", type=int, default=10)
    _add_solver_args(p)
    _add_output_args(p)

    p = sub.add_parser("classify", help="classify new points with a model document")
    p.add_argument("--model", required=True)
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--queries", help="feature CSV of query points")
    q.add_argument("--query-dissim", help="queries x candidates dissimilarity CSV")
    p.add_argument("--labels-col", help="true label column in --queries, for error reporting")
    p.add_argument("--labels", help="true labels file, for error reporting")
    _add_output_args(p)

    p = sub.add_parser("quantiles", help="radius grid from distance quantiles")
    _add_input_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=int, default=20)
    g.add_argument("--probs", help="comma-separated quantile levels")
    _add_output_args(p)
    return parser


# -- data loading --------------------------------------------------------------

class TrainingData:
    """Everything the solvers need, resolved from the input flags."""

    def __init__(self, args, need_labels=True):
        kind = args.input_kind
        metric = args.metric or ("l2" if kind == "features" else "precomputed")
        if kind == "kernel" and metric not in ("precomputed", "rank"):
            raise UsageError("kernel input implies --metric precomputed (or rank)")
        if kind == "dissimilarity" and metric not in ("precomputed", "rank"):
            raise UsageError("dissimilarity input needs --metric precomputed or rank")
        if kind == "features" and metric == "precomputed":
            raise UsageError("feature input needs --metric l1, l2 or rank")
        self.kind, self.metric = kind, metric
        self.base_metric = args.base_metric if (kind == "features" and metric == "rank") else (
            metric if kind == "features" else None)

        labels = None
        if kind == "features":
            self.features, labels, _ = read_features(args.input, args.labels_col)
            base = dissim.compute_dissimilarity(self.features, self.base_metric)
        else:
            if args.labels_col:
                raise UsageError("--labels-col only applies to feature input; use --labels")
            self.features = None
            m = read_matrix(args.input, square=True)
            base = dissim.kernel_to_distance(m) if kind == "kernel" else dissim.check_dissimilarity(m)
        if args.labels:
            labels = read_labels(args.labels)
        if need_labels and labels is None:
            raise UsageError("labels required: give --labels-col or --labels")
        if labels is not None and len(labels) != base.shape[0]:
            raise InputError(f"{base.shape[0]} data rows but {len(labels)} labels")
        self.labels = labels
        self.base = base
        self.dataset = LabeledDataset.from_labels(labels) if labels is not None else None

    @property
    def n(self):
        return self.base.shape[0]

    def training_matrix(self):
        """Square matrix in the working dissimilarity (rank-transformed if asked)."""
        if self.metric == "rank":
            return dissim.rank_transform(self.base)
        return self.base


def _parse_epsilon(spec, d):
    spec = str(spec).strip()
    if spec.startswith("q:"):
        try:
            p = float(spec[2:])
        except ValueError:
            raise UsageError(f"bad quantile spec {spec!r}") from None
        return dissim.distance_quantiles(d, [p])[0]
    try:
        eps = float(spec)
    except ValueError:
        raise UsageError(f"bad epsilon {spec!r}") from None
    if not eps > 0:
        raise UsageError("epsilon must be positive")
    return eps


def _parse_lambda(spec, n):
    spec = str(spec).strip()
    if spec == "1/n":
        return None if n is None else 1.0 / n
    try:
        lam = float(Fraction(spec))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad lambda {spec!r}") from None
    if lam < 0:
        raise UsageError("lambda must be nonnegative")
    return lam


def _emit(args, text):
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------------

def cmd_select(args):
    data = TrainingData(args)
    d_train = data.training_matrix()
    eps = _parse_epsilon(args.epsilon, d_train)
    lam = _parse_lambda(args.lam, data.n)

    synthetic = None
    cand_features = data.features
    rank_reference = None
    if args.kmeans:
        aug = augment_candidates_kmeans(data.features, data.dataset, args.kmeans, seed=args.seed)
        cand_features, synthetic = aug.features, aug.synthetic
        base = dissim.cross_dissimilarity(data.features, cand_features, data.base_metric)
    else:
        base = data.base
    d = dissim.rank_transform(base) if data.metric == "rank" else base
    if data.metric == "rank":
        rank_reference = np.sort(base, axis=0).T

    problem = make_problem(data.dataset, d, eps, lam)
    solution = solve(problem, args.solver, seed=args.seed)
    doc = solution_document(
        solution, problem, data.dataset.classes, metric=data.metric, epsilon=eps,
        lam=problem.lam, input_kind=data.kind,
        candidate_features=cand_features, synthetic=synthetic,
        base_metric=data.base_metric, rank_reference=rank_reference,
        solver=args.solver, seed=args.seed)

    if args.format == "json":
        text = dump_json(doc)
    else:
        buf = io.StringIO()
        buf.write("class_id,order,candidate,synthetic\n")
        for entry in doc["per_class"]:
            for k, p in enumerate(entry["prototypes"], start=1):
                buf.write(f"{entry['class_id']},{k},{p['candidate']},{int(p['synthetic'])}\n")
        text = buf.getvalue()
    _emit(args, text)
    if args.trace_out and solution.trace is not None:
        buf = io.StringIO()
        write_trace_csv(buf, solution.trace, data.dataset.classes)
        atomic_write(args.trace_out, buf.getvalue())
    log.info("objective %.6g with %d prototypes", solution.objective, solution.n_prototypes)
    return EXIT_OK


def cmd_cv(args):
    data = TrainingData(args)
    if args.epsilons:
        try:
            grid = sorted(float(v) for v in args.epsilons.split(","))
        except ValueError:
            raise UsageError(f"bad --epsilons {args.epsilons!r}") from None
    else:
        grid = dissim.default_grid(data.training_matrix(), size=args.grid)
    if args.kmeans and data.features is None:
        raise UsageError("--kmeans needs feature input")
    lam = _parse_lambda(args.lam, None)
    report = cross_validate(
        data.dataset, d=data.base, grid=grid, folds=args.folds, lam=lam, solver=args.solver,
        seed=args.seed, features=data.features, metric=data.base_metric or "l2",
        kmeans_k=args.kmeans, rank=data.metric == "rank")
    _emit(args, report.to_json() if args.format == "json" else report.to_csv())
    return EXIT_OK


def _model_sets(doc):
    sets, coords, refs = [], [], []
    for entry in doc["per_class"]:
        s = []
        for p in entry["prototypes"]:
            s.append(p["candidate"])
            coords.append(p.get("coordinates"))
            refs.append(p.get("rank_reference"))
        sets.append(s)
    return sets, coords, refs


def cmd_classify(args):
    doc = load_model(args.model)
    classes = doc["classes"]
    sets, coords, refs = _model_sets(doc)
    if not coords:
        raise StateError(f"{args.model}: model has no prototypes in any class")
    true_labels = None
    if args.queries:
        if any(c is None for c in coords):
            raise UsageError("model has no prototype coordinates; use --query-dissim")
        q, true_labels, _ = read_features(args.queries, args.labels_col)
        base_metric = doc.get("base_metric") or "l2"
        protos = np.asarray(coords, dtype=np.float64).reshape(len(coords), -1)
        dq = dissim.cross_dissimilarity(q, protos, base_metric)
        if doc["metric"] == "rank":
            dq = np.column_stack([np.searchsorted(np.asarray(r), dq[:, k], side="right")
                                  for k, r in enumerate(refs)]).astype(np.float64)
        # columns of dq follow the prototype order, so re-index the sets locally
        local, k = [], 0
        for s in sets:
            local.append(list(range(k, k + len(s))))
            k += len(s)
        sets = local
    else:
        dq = read_matrix(args.query_dissim)
        n_cand = doc.get("n_candidates")
        if n_cand is not None and dq.shape[1] != n_cand:
            raise InputError(f"{args.query_dissim}: expected {n_cand} candidate columns, "
                             f"got {dq.shape[1]}")
        if args.labels_col:
            raise UsageError("--labels-col needs --queries; use --labels")
    if args.labels:
        true_labels = read_labels(args.labels)

    pred = predict(sets, dq)
    out = {"predictions": [classes[k] for k in pred.labels.tolist()]}
    if true_labels is not None:
        lookup = {c: k for k, c in enumerate(classes)}
        try:
            y = [lookup[v] for v in true_labels]
        except KeyError as exc:
            raise InputError(f"query label {exc.args[0]!r} is not a model class") from None
        rep = evaluate_classifier(sets, dq, y, len(classes))
        out["error"] = rep.error
        out["confusion"] = rep.confusion.tolist()
    if args.format == "json":
        text = json.dumps(out, indent=2) + "\n"
    else:
        text = "query,predicted\n" + "".join(
            f"{k},{v}\n" for k, v in enumerate(out["predictions"]))
    _emit(args, text)
    return EXIT_OK


def cmd_quantiles(args):
    data = TrainingData(args, need_labels=False)
    d = data.training_matrix()
    if args.probs:
        try:
            probs = [float(v) for v in args.probs.split(",")]
        except ValueError:
            raise UsageError(f"bad --probs {args.probs!r}") from None
    else:
        if args.grid < 1:
            raise UsageError("--grid must be at least 1")
        probs = np.linspace(0.0, 0.5, args.grid).tolist() if args.grid > 1 else [0.0]
    eps = dissim.distance_quantiles(d, probs)
    if args.format == "json":
        text = json.dumps({"probs": probs, "epsilon": eps}, indent=2) + "\n"
    else:
        text = "prob,epsilon\n" + "".join(f"{p!r},{e!r}\n" for p, e in zip(probs, eps))
    _emit(args, text)
    return EXIT_OK


COMMANDS = {"select": cmd_select, "cv": cmd_cv, "classify": cmd_classify,
            "quantiles": cmd_quantiles}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"protosel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, StateError) as exc:
        print(f"protosel: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"protosel: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
