"""Command-line entry point: ``blmix {preprocess,synth,fit,eval,sweep}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import PreprocessConfig, corpus_stats, default_stopwords, load_dtm, preprocess, save_dtm
from .errors import BLMixError
from .evaluation import coherence_report, encode_labels, evaluate_clustering
from .generative import MixtureHyperparams, block_topics, sample_corpus
from .inference import FitConfig, FitResult, fit

logger = logging.getLogger("blmix")

DEFAULT_DELTAS = (-0.5, -0.4, -0.3, -0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
SUMMARY_HEADER = ["delta", "best_elbo", "accuracy", "ari", "mean_coherence", "mean_runtime_seconds"]


class UsageError(Exception):
    pass


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _require_dir(path, flag):
    path = Path(path)
    if not (path.is_dir() and os.access(path, os.R_OK)):
        raise UsageError(f"{flag}: cannot read directory {path}")
    return path


def _require_file(path, flag):
    path = Path(path)
    if not (path.is_file() and os.access(path, os.R_OK)):
        raise UsageError(f"{flag}: cannot read file {path}")
    return path


# ------------------------------------------------------------------ preprocess


def read_raw_documents(path: Path, labeled: bool):
    """Documents from a directory tree or from a file with one document per line.

    A directory with subdirectories yields one document per file, labeled by
    its subdirectory; a flat directory yields unlabeled documents. In a file,
    ``--labeled`` lines read ``label<TAB>text``.
    """
    docs, labels, ids = [], [], []
    if path.is_dir():
        subdirs = sorted(p for p in path.iterdir() if p.is_dir())
        if subdirs:
            for sub in subdirs:
                for f in sorted(p for p in sub.iterdir() if p.is_file()):
                    docs.append(f.read_text(encoding="utf-8", errors="replace"))
                    labels.append(sub.name)
                    ids.append(f"{sub.name}/{f.name}")
        else:
            for f in sorted(p for p in path.iterdir() if p.is_file()):
                docs.append(f.read_text(encoding="utf-8", errors="replace"))
                ids.append(f.name)
        return docs, (labels or None), ids
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if labeled:
                if "\t" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'label<TAB>text'")
                lab, line = line.split("\t", 1)
                labels.append(lab)
            docs.append(line)
            ids.append(str(lineno))
    return docs, (labels if labeled else None), ids


def cmd_preprocess(args):
    src = Path(args.input)
    if not (src.exists() and os.access(src, os.R_OK)):
        raise UsageError(f"--input: cannot read {src}")
    stopwords = default_stopwords()
    if args.stopwords:
        words = _require_file(args.stopwords, "--stopwords").read_text(encoding="utf-8").split()
        stopwords = frozenset(w.lower() for w in words)
    try:
        config = PreprocessConfig(
            min_token_len=args.min_len,
            max_token_len=args.max_len,
            stopword_list=stopwords,
            stemmer="none" if args.no_stem else "english-snowball",
            min_doc_freq=args.min_doc_freq,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    docs, labels, ids = read_raw_documents(src, args.labeled)
    dtm = preprocess(docs, config, labels=labels, doc_ids=ids)
    save_dtm(dtm, args.out)
    stats = corpus_stats(dtm)
    print(
        f"n={stats.n} p={stats.p} sparsity={stats.sparsity:.4f} "
        f"mean_terms_per_doc={stats.mean_terms_per_doc:.2f}"
    )
    return 0


# ----------------------------------------------------------------------- synth


def cmd_synth(args):
    if args.docs < 1:
        raise UsageError("--docs must be at least 1")
    if args.groups < 1:
        raise UsageError("--groups must be at least 1")
    if args.vocab_size < 2:
        raise UsageError("--vocab-size must be at least 2")
    if args.doc_length < 1:
        raise UsageError("--doc-length must be at least 1")
    hyper = _hyper_from_args(args, args.groups, args.vocab_size)
    topics = None
    if args.block_mass is not None:
        try:
            topics = block_topics(args.groups, args.vocab_size, args.block_mass)
        except BLMixError as exc:
            raise UsageError(str(exc)) from None
    rng = np.random.default_rng(args.seed)
    corpus = sample_corpus(hyper, args.docs, args.doc_length, args.length_law, rng, topics=topics)
    truth = {
        "config": {
            "groups": args.groups,
            "vocab_size": args.vocab_size,
            "docs": args.docs,
            "doc_length": args.doc_length,
            "length_law": args.length_law,
            "block_mass": args.block_mass,
            "seed": args.seed,
            "hyperparams": hyper.to_dict(),
        },
        "true_labels": corpus.true_labels.tolist(),
        "true_weights": corpus.true_weights.tolist(),
        "true_topics": corpus.true_topics.tolist(),
        "doc_lengths": corpus.doc_lengths.tolist(),
    }
    save_dtm(corpus.dtm, args.out)
    write_atomic(Path(args.out) / "truth.json", dump_json(truth))
    stats = corpus_stats(corpus.dtm)
    print(f"n={stats.n} p={stats.p} sparsity={stats.sparsity:.4f} mean_terms_per_doc={stats.mean_terms_per_doc:.2f}")
    return 0


# ------------------------------------------------------------------------- fit


def _hyper_from_args(args, G, p):
    prior = getattr(args, "prior", "bl")
    delta = getattr(args, "delta", None)
    if prior == "dirichlet":
        if delta is not None:
            raise UsageError("--delta only applies to --prior bl")
        if getattr(args, "beta", None) is not None:
            raise UsageError("--beta only applies to --prior bl")
        return MixtureHyperparams.dirichlet(G, p, theta=args.theta if args.theta is not None else 1.0, psi=args.psi)
    if getattr(args, "theta", None) is not None:
        raise UsageError("--theta only applies to --prior dirichlet")
    delta = 0.0 if delta is None else delta
    if not delta > -1:
        raise UsageError("--delta must exceed -1")
    beta = args.beta if getattr(args, "beta", None) is not None else 1.0
    return MixtureHyperparams.beta_liouville(G, p, delta=delta, beta=beta, psi=args.psi)


def _fit_config_from_args(args):
    try:
        return FitConfig(
            algorithm=args.algorithm,
            max_iter=args.iters,
            kappa=args.kappa,
            restarts=args.restarts,
            seed=args.seed,
            elbo_every=args.elbo_every,
            tol=args.tol,
            phi_alpha_mode=args.phi_alpha,
            beta_slot=args.beta_slot,
            jobs=args.jobs,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run_fit(dtm, args, delta=None):
    if delta is not None:
        args = argparse.Namespace(**{**vars(args), "delta": delta})
    config = _fit_config_from_args(args)
    hyper = _hyper_from_args(args, args.groups, dtm.p)
    if args.groups < 1:
        raise UsageError("--groups must be at least 1")
    return fit(dtm, hyper, config)


def write_fit(result: FitResult, out: Path):
    write_atomic(out / "fit.json", result.to_json())
    write_atomic(out / "elbo.csv", result.trace_csv())


def cmd_fit(args):
    if args.groups < 1:
        raise UsageError("--groups must be at least 1")
    dtm = load_dtm(_require_dir(args.dtm, "--dtm"))
    result = run_fit(dtm, args)
    out = Path(args.out)
    write_fit(result, out)
    print(
        f"best ELBO {result.final_elbo:.6f} (restart {result.metadata['best_restart']}), "
        f"mean runtime {result.runtime_seconds:.3f}s per restart"
    )
    return 0


# ------------------------------------------------------------------------ eval


def evaluate_fit(result: FitResult, dtm, labels=None, top=10) -> dict:
    meta = result.metadata
    dropped = meta.get("dropped_documents", [])
    n_input = meta.get("n_input_documents", dtm.n)
    n_fitted = meta.get("n_fitted_documents", len(result.assignments))
    if dtm.n != n_input:
        raise UsageError(f"the corpus has {dtm.n} documents but the fit was run on {n_input}")
    keep = np.setdiff1d(np.arange(dtm.n), np.asarray(dropped, dtype=np.int64))
    fitted = dtm.select_rows(keep)

    clustering = None
    if labels is not None:
        if len(labels) == n_input:
            labels = [labels[i] for i in keep]
        elif len(labels) != n_fitted:
            raise UsageError(
                f"{len(labels)} labels, but the fit covers {n_fitted} documents "
                f"({n_input} input, dropped indices {dropped})"
            )
        codes, names = encode_labels(labels)
        G = max(result.hyperparams.G, len(names))
        clustering = evaluate_clustering(codes, result.assignments, G)
        clustering = {
            **clustering.to_dict(),
            "label_names": names,
            "component_to_label": {str(g): names[t - 1] for g, t in sorted(clustering.best_permutation.items())
                                   if t <= len(names)},
        }

    top = min(top, fitted.p)
    report = coherence_report(fitted, result.topic_estimates, result.weight_estimates, top)
    return {
        "clustering": clustering,
        "coherence": report.to_dict(),
        "config": {
            "top": top,
            "fit_config": result.config.to_dict(),
            "hyperparams": result.hyperparams.to_dict(),
            "seed": result.seed,
        },
    }


def cmd_eval(args):
    fit_path = _require_file(args.fit, "--fit")
    dtm = load_dtm(_require_dir(args.dtm, "--dtm"))
    result = FitResult.from_json(fit_path.read_text(encoding="utf-8"))
    labels = None
    if args.labels:
        labels = _require_file(args.labels, "--labels").read_text(encoding="utf-8").splitlines()
    elif dtm.labels is not None:
        labels = list(dtm.labels)
    if args.top < 2:
        raise UsageError("--top must be at least 2")
    report = evaluate_fit(result, dtm, labels, args.top)
    out = Path(args.out) if args.out else fit_path.with_name("eval.json")
    write_atomic(out, dump_json(report))
    if report["clustering"]:
        c = report["clustering"]
        print(f"accuracy={c['accuracy']:.4f} ari={c['ari']:.4f} mean_coherence={report['coherence']['mean_coherence']:.4f}")
    else:
        print(f"mean_coherence={report['coherence']['mean_coherence']:.4f}")
    return 0


# ----------------------------------------------------------------------- sweep


def _delta_dirname(delta):
    return f"delta_{delta:+.2f}"


def cmd_sweep(args):
    if args.prior != "bl":
        raise UsageError("sweep varies delta and needs --prior bl")
    deltas = DEFAULT_DELTAS if args.deltas is None else tuple(args.deltas)
    if any(not d > -1 for d in deltas):
        raise UsageError("every delta must exceed -1")
    if args.groups < 1:
        raise UsageError("--groups must be at least 1")
    _fit_config_from_args(args)
    dtm = load_dtm(_require_dir(args.dtm, "--dtm"))
    labels = list(dtm.labels) if dtm.labels is not None else None
    out = Path(args.out)
    rows, failures = [], {}
    for delta in deltas:
        try:
            result = run_fit(dtm, args, delta=delta)
            report = evaluate_fit(result, dtm, labels, args.top)
            sub = out / _delta_dirname(delta)
            write_fit(result, sub)
            write_atomic(sub / "eval.json", dump_json(report))
            clus = report["clustering"] or {}
            rows.append([delta, result.final_elbo, clus.get("accuracy", math.nan), clus.get("ari", math.nan),
                         report["coherence"]["mean_coherence"], result.runtime_seconds])
            logger.info("delta %+.2f done", delta)
        except (BLMixError, ArithmeticError, ValueError) as exc:
            failures[str(delta)] = f"{type(exc).__name__}: {exc}"
            print(f"delta {delta:+.2f} failed: {exc}", file=sys.stderr)
            rows.append([delta] + [math.nan] * 5)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    write_atomic(out / "summary.csv", buf.getvalue())
    write_atomic(
        out / "sweep.json",
        dump_json({"deltas": list(deltas), "failures": failures, "fit_config": _fit_config_from_args(args).to_dict(),
                   "top": args.top, "psi": args.psi, "beta": args.beta}),
    )
    print(buf.getvalue(), end="")
    return 1 if failures else 0


# ---------------------------------------------------------------------- parser


def _add_fit_flags(p, sweep=False):
    p.add_argument("--dtm", required=True, help="corpus directory (dtm.mtx, vocab.txt, ...)")
    p.add_argument("--groups", "-G", type=int, required=True, help="number of mixture components")
    p.add_argument("--prior", choices=("bl", "dirichlet"), default="bl")
    if not sweep:
        p.add_argument("--delta", type=float, default=None, help="alpha = alpha0 * (1 + delta); BL only (default 0)")
    p.add_argument("--beta", type=float, default=None, help="BL beta (default 1)")
    p.add_argument("--theta", type=float, default=None, help="Dirichlet concentration (default 1)")
    p.add_argument("--psi", type=float, default=None, help="weight concentration (default 5/G)")
    p.add_argument("--algorithm", choices=("svi", "cavi"), default="svi")
    p.add_argument("--kappa", type=float, default=0.6, help="forgetting rate in (0.5, 1]")
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--elbo-every", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6, help="relative ELBO tolerance (CAVI)")
    p.add_argument("--beta-slot", choices=("last", "least-frequent"), default="last",
                   help="which term takes the Beta-Liouville beta slot")
    p.add_argument("--phi-alpha", choices=("conjugate", "fixed"), default="conjugate",
                   help="update rule of the variational alpha parameter")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for restarts")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="raw texts -> document-term matrix")
    p.add_argument("--input", required=True, help="directory of text files, or a file with one document per line")
    p.add_argument("--out", required=True)
    p.add_argument("--labeled", action="store_true", help="input lines read 'label<TAB>text'")
    p.add_argument("--min-doc-freq", type=float, default=0.01)
    p.add_argument("--min-len", type=int, default=4)
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--no-stem", action="store_true")
    p.add_argument("--stopwords", help="whitespace-separated stopword file replacing the bundled list")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("synth", help="sample a synthetic corpus")
    p.add_argument("--groups", "-G", type=int, required=True)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--doc-length", type=float, default=40)
    p.add_argument("--length-law", choices=("poisson", "fixed"), default="poisson")
    p.add_argument("--prior", choices=("bl", "dirichlet"), default="bl")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--psi", type=float, default=None)
    p.add_argument("--block-mass", type=float, default=None,
                   help="use disjoint-block topics with this much mass on each block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a mixture; writes fit.json and elbo.csv")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="accuracy, ARI and coherence of a fit")
    p.add_argument("--fit", required=True, help="fit.json")
    p.add_argument("--dtm", required=True)
    p.add_argument("--labels", help="gold labels, one per line (default: the corpus labels.txt)")
    p.add_argument("--top", type=int, default=10, help="top terms per topic for coherence")
    p.add_argument("--out", help="output path (default: eval.json next to fit.json)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="fit and evaluate over a grid of delta values")
    _add_fit_flags(p, sweep=True)
    p.add_argument("--deltas", type=float, nargs="+", default=None, help="default: 0, +-0.05, +-0.1, +-0.2 ... +-0.5")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (BLMixError, OSError, ArithmeticError) as exc:
        print(f"blmix: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
