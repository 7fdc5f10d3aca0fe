"""Command line front end.

Subcommands: ``score`` (per-discourse scorecards plus a frame dump),
``permute`` (permutation coherence scores), ``correlate`` (correlation and
mutual information between a score column and coreference F1),
``coref-eval`` (MUC / B-cubed / CEAF-phi4 between two corpora) and
``fit-recency`` (forget-function grid search against system outputs).

Every run writes a manifest next to its outputs; rerunning with the same
inputs and parameters reproduces every output byte for byte. Delimited
outputs carry the manifest hash in a leading comment line (CSV) or a
``manifest_hash`` field (JSON). Set ``CENTERING_KIT_LOG`` to adjust
verbosity.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Callable, Iterable, Sequence

from . import __version__
from .conll import ConllParseError, Document, read_conll
from .core import (
    Discourse,
    InstantiationConfig,
    MentionMap,
    Weighting,
    discourse_from_document,
    run_centering,
)
from .evalstats import (
    AnalysisReport,
    analyze,
    corpus_coref_counts,
    fisher_z,
    fisher_z_compare,
    validate_chain_set,
)
from .metrics import (
    SCORECARD_CSV_HEADER,
    Metric,
    compute_scorecard,
    scorecard_csv_row,
)
from .recency import RecencyConfig, fit_forget, run_centering_recency
from .scorer import PermutationPlan, UnscorableDiscourse, coherence_scores

log = logging.getLogger(__name__)

METRIC_ORDER = [
    Metric.NOCB,
    Metric.CHEAP,
    Metric.COHERENCE,
    Metric.SALIENCE,
    Metric.KP,
    Metric.TRAN,
]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_EMPTY = 3
EXIT_CONSTANT = 4


class EmptyCorpus(Exception):
    pass


class ConstantColumn(Exception):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} is constant; nothing to correlate")
        self.column = column


def _setup_logging() -> None:
    level_name = os.environ.get("CENTERING_KIT_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _load_config(args: argparse.Namespace) -> tuple[InstantiationConfig, RecencyConfig | None]:
    config = InstantiationConfig()
    recency = None
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConllParseError(args.config, exc.lineno, f"invalid JSON: {exc.msg}")
        if not isinstance(data, dict):
            raise ConllParseError(args.config, 1, "config must be a JSON object")
        rec_data = data.pop("recency", None)
        config = InstantiationConfig.from_json(data)
        if rec_data is not None:
            recency = RecencyConfig.from_json(rec_data)
    if getattr(args, "seed", None) is not None:
        config = replace(config, rng_seed=args.seed)
    return config, recency


def _read_corpus(paths: Sequence[str]) -> list[Document]:
    docs: list[Document] = []
    for path in paths:
        if not os.path.exists(path):
            raise ConllParseError(path, 0, "no such file")
        docs.extend(read_conll(path))
    if not docs:
        raise EmptyCorpus()
    return docs


def _discourses(docs: Sequence[Document], config: InstantiationConfig) -> list[Discourse]:
    if config.weighting is Weighting.SEMANTIC_ROLE:
        missing = [d.key for d in docs if not d.has_srl()]
        if missing:
            log.warning(
                "semantic weighting requested but %d document(s) carry no argument "
                "spans; their mentions fall back to the Other rank (first: %s)",
                len(missing),
                missing[0],
            )
    out = [discourse_from_document(d, config) for d in docs]
    out.sort(key=lambda d: d.doc_id)
    return out


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _float_cell(value: float) -> str:
    return repr(float(value))


class _OutputSet:
    """Collects run outputs, stamps them with the manifest hash, writes once."""

    def __init__(self, out_dir: str, command: str, parameters: dict, inputs: Sequence[str]):
        self.out_dir = out_dir
        self.command = command
        self.parameters = parameters
        self.inputs = list(inputs)
        self.csv_files: dict[str, str] = {}
        self.json_files: dict[str, dict] = {}
        self.text_files: dict[str, str] = {}
        self.figure_jobs: list[tuple[str, Callable[[str], None]]] = []

    def add_csv(self, name: str, text: str) -> None:
        self.csv_files[name] = text

    def add_json(self, name: str, payload: dict) -> None:
        self.json_files[name] = payload

    def add_text(self, name: str, text: str) -> None:
        self.text_files[name] = text

    def add_figure(self, name: str, render: Callable[[str], None]) -> None:
        self.figure_jobs.append((name, render))

    def write(self) -> str:
        os.makedirs(self.out_dir, exist_ok=True)
        names = sorted(
            list(self.csv_files)
            + list(self.json_files)
            + list(self.text_files)
            + [name for name, _ in self.figure_jobs]
        )
        manifest = {
            "tool": "centering-kit",
            "version": __version__,
            "command": self.command,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "outputs": names,
        }
        mhash = hashlib.sha256(
            json.dumps(manifest, sort_keys=True).encode("utf8")
        ).hexdigest()
        manifest["manifest_hash"] = mhash

        def _write(name: str, text: str) -> None:
            with open(os.path.join(self.out_dir, name), "w", encoding="utf8", newline="") as fh:
                fh.write(text)

        _write("manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        for name, text in self.csv_files.items():
            _write(name, f"# manifest={mhash}\n{text}")
        for name, payload in self.json_files.items():
            stamped = dict(payload)
            stamped["manifest_hash"] = mhash
            _write(name, json.dumps(stamped, sort_keys=True, indent=2) + "\n")
        for name, text in self.text_files.items():
            _write(name, text)
        for name, render in self.figure_jobs:
            render(os.path.join(self.out_dir, name))
        return mhash


def _pmap(jobs: int, fn: Callable, items: Sequence) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _frame_record(doc_id: str, frame) -> dict:
    return {
        "doc_id": doc_id,
        "ordinal": frame.ordinal,
        "cf": {str(e): w for e, w in sorted(frame.cf.items())},
        "cp": frame.cp,
        "cb": frame.cb,
        "transition": frame.transition.value,
    }


def _score_worker(payload: tuple[Discourse, InstantiationConfig, RecencyConfig | None]):
    disc, config, recency = payload
    if recency is not None and not recency.is_vanilla():
        frames = run_centering_recency(disc.utterances, disc.mention_map, config, recency)
    else:
        frames = run_centering(disc.utterances, disc.mention_map, config)
    return disc.doc_id, frames, compute_scorecard(frames)


def cmd_score(args: argparse.Namespace) -> int:
    config, recency = _load_config(args)
    docs = _read_corpus(args.corpus)
    discourses = _discourses(docs, config)
    results = _pmap(args.jobs, _score_worker, [(d, config, recency) for d in discourses])

    rows = [scorecard_csv_row(doc_id, card) for doc_id, _, card in results]
    frame_lines = []
    transition_totals: dict[str, int] = {}
    for doc_id, frames, _ in results:
        for frame in frames:
            frame_lines.append(json.dumps(_frame_record(doc_id, frame), sort_keys=True))
            label = frame.transition.value
            transition_totals[label] = transition_totals.get(label, 0) + 1

    parameters: dict = {"config": config.to_json()}
    if recency is not None:
        parameters["recency"] = recency.to_json()
    out = _OutputSet(args.out, "score", parameters, args.corpus)
    out.add_csv("scorecards.csv", _csv_text(SCORECARD_CSV_HEADER, rows))
    out.add_text("frames.jsonl", "".join(line + "\n" for line in frame_lines))
    if not args.no_figures:
        totals = dict(sorted(transition_totals.items()))

        def _render(path: str, totals=totals) -> None:
            from .figures import save_transition_figure

            save_transition_figure(totals, path)

        out.add_figure("transitions.png", _render)
    out.write()
    log.info("scored %d discourse(s) into %s", len(results), args.out)
    return EXIT_OK


def _permute_worker(
    payload: tuple[Discourse, InstantiationConfig, tuple[Metric, ...], PermutationPlan]
):
    disc, config, metrics, plan = payload
    try:
        results = coherence_scores(
            disc.utterances, disc.mention_map, config, metrics, plan, disc.doc_id
        )
        return disc.doc_id, results, None
    except UnscorableDiscourse as exc:
        return disc.doc_id, None, str(exc)


def cmd_permute(args: argparse.Namespace) -> int:
    config, _ = _load_config(args)
    docs = _read_corpus(args.corpus)
    discourses = _discourses(docs, config)
    metrics = METRIC_ORDER if args.metric == "all" else [Metric(args.metric)]
    plan = PermutationPlan(
        sample_size=args.sample_size,
        threshold=args.threshold,
        seed=args.seed if args.seed is not None else config.rng_seed,
    )
    outcomes = _pmap(
        args.jobs,
        _permute_worker,
        [(d, config, tuple(metrics), plan) for d in discourses],
    )

    rows = []
    by_metric: dict[Metric, list[float]] = {m: [] for m in metrics}
    skipped = 0
    for doc_id, results, failure in outcomes:
        if failure is not None:
            log.warning("skipping discourse: %s", failure)
            skipped += 1
            continue
        for metric in metrics:
            res = results[metric]
            by_metric[metric].append(res.ch)
            rows.append(
                [
                    doc_id,
                    metric.value,
                    str(res.n_utterances),
                    str(res.worse),
                    str(res.equal),
                    str(res.better),
                    _float_cell(res.ch),
                ]
            )
    if not rows:
        raise EmptyCorpus()

    summary_rows = [
        [
            metric.value,
            str(len(by_metric[metric])),
            str(skipped),
            _float_cell(sum(by_metric[metric]) / len(by_metric[metric])),
        ]
        for metric in metrics
        if by_metric[metric]
    ]

    out = _OutputSet(
        args.out,
        "permute",
        {
            "config": config.to_json(),
            "metrics": [m.value for m in metrics],
            "plan": {
                "sample_size": plan.sample_size,
                "threshold": plan.threshold,
                "seed": plan.seed,
            },
        },
        args.corpus,
    )
    out.add_csv(
        "permute.csv",
        _csv_text(
            ["doc_id", "metric", "n_utt", "worse", "equal", "better", "ch"], rows
        ),
    )
    out.add_csv(
        "permute_summary.csv",
        _csv_text(["metric", "n_docs", "n_skipped", "mean_ch"], summary_rows),
    )
    if not args.no_figures:
        means = {
            metric.value: sum(chs) / len(chs)
            for metric, chs in by_metric.items()
            if chs
        }

        def _render(path: str, means=means) -> None:
            from .figures import save_coherence_figure

            save_coherence_figure(means, path)

        out.add_figure("coherence.png", _render)
    out.write()
    return EXIT_OK


def _read_scores_csv(path: str) -> tuple[list[str], list[float], list[float]]:
    if not os.path.exists(path):
        raise ConllParseError(path, 0, "no such file")
    ids: list[str] = []
    scores: list[float] = []
    f1s: list[float] = []
    with open(path, encoding="utf8", newline="") as handle:
        filtered = (line for line in handle if not line.startswith("#"))
        reader = csv.DictReader(filtered)
        fields = reader.fieldnames or []
        needed = {"id", "centering_score", "conll_f1"}
        if not needed.issubset(fields):
            raise ConllParseError(
                path, 1, f"need columns {sorted(needed)}, found {fields}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                scores.append(float(row["centering_score"]))
                f1s.append(float(row["conll_f1"]))
            except (TypeError, ValueError):
                raise ConllParseError(path, lineno, "non-numeric score cell") from None
            ids.append(row["id"])
    return ids, scores, f1s


def cmd_correlate(args: argparse.Namespace) -> int:
    _, scores, f1s = _read_scores_csv(args.scores)
    for name, series in (("centering_score", scores), ("conll_f1", f1s)):
        if series and max(series) - min(series) == 0:
            raise ConstantColumn(name)
    report = analyze(scores, f1s, args.nbins)
    payload = report.to_json()
    if args.bits:
        import math

        payload["mi_bits"] = report.mi / math.log(2.0)
    parameters = {"nbins": report.nbins, "bits": bool(args.bits)}
    inputs = [args.scores]
    if args.compare:
        with open(args.compare, encoding="utf8") as handle:
            other = AnalysisReport.from_json(json.load(handle))
        payload["compare"] = {
            "other": os.path.basename(args.compare),
            "other_r": other.pearson_r,
            "other_n": other.n,
            "z": fisher_z(report.pearson_r, report.n, other.pearson_r, other.n),
            "p_value": fisher_z_compare(
                report.pearson_r, report.n, other.pearson_r, other.n
            ),
        }
        inputs.append(args.compare)

    out = _OutputSet(args.out, "correlate", parameters, inputs)
    out.add_json("analysis.json", payload)
    if not args.no_figures:
        caption = f"r={report.pearson_r:.3f}, p={report.p_value:.2e}"

        def _render(path: str, xs=tuple(scores), ys=tuple(f1s), caption=caption) -> None:
            from .figures import save_correlation_figure

            save_correlation_figure(xs, ys, caption, path)

        out.add_figure("correlation.png", _render)
    out.write()
    print(json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_OK


def _chain_sets_by_doc(docs: Sequence[Document]) -> dict[str, list[frozenset]]:
    out = {}
    for doc in docs:
        chains = [
            frozenset(m.key for m in chain) for _, chain in sorted(doc.chains.items())
        ]
        validate_chain_set(chains)
        out[doc.key] = chains
    return out


def cmd_coref_eval(args: argparse.Namespace) -> int:
    gold = _chain_sets_by_doc(_read_corpus([args.gold]))
    pred = _chain_sets_by_doc(_read_corpus([args.pred]))
    if set(gold) != set(pred):
        only_gold = sorted(set(gold) - set(pred))
        only_pred = sorted(set(pred) - set(gold))
        raise ValueError(
            f"document sets differ (gold-only: {only_gold}, pred-only: {only_pred})"
        )
    pairs = [(gold[key], pred[key]) for key in sorted(gold)]
    totals = corpus_coref_counts(pairs)
    payload: dict = {}
    for name, counts in totals.items():
        p, r, f1 = counts.prf
        payload[name] = {"p": p, "r": r, "f1": f1}
    payload["conll_f1"] = sum(payload[k]["f1"] for k in ("muc", "b3", "ceaf4")) / 3.0

    out = _OutputSet(args.out, "coref-eval", {}, [args.gold, args.pred])
    out.add_json("coref_eval.json", payload)
    out.write()
    print(json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_fit_recency(args: argparse.Namespace) -> int:
    config, _ = _load_config(args)
    gold_docs = _read_corpus([args.gold])
    corpus = _discourses(gold_docs, config)
    gold_chains = _chain_sets_by_doc(gold_docs)

    variants = []
    variant_names = []
    pred_paths = args.pred or []
    if args.include_gold:
        maps = {d.doc_id: d.mention_map for d in corpus}
        variants.append((maps, 1.0))
        variant_names.append("gold")
    from .evalstats import corpus_conll_f1

    for path in pred_paths:
        pred_docs = _read_corpus([path])
        pred_chains = _chain_sets_by_doc(pred_docs)
        if set(pred_chains) != set(gold_chains):
            raise ValueError(f"{path}: document set differs from gold corpus")
        maps = {}
        for doc in pred_docs:
            maps[doc.key] = MentionMap({m.key: m.chain_id for m in doc.mentions})
        f1 = corpus_conll_f1(
            [(gold_chains[key], pred_chains[key]) for key in sorted(gold_chains)]
        )
        variants.append((maps, f1))
        variant_names.append(os.path.basename(path))

    result = fit_forget(corpus, variants, config, family=args.family)
    payload = result.to_json()
    payload["variants"] = [
        {"name": name, "conll_f1": f1}
        for name, (_, f1) in zip(variant_names, variants)
    ]

    out = _OutputSet(
        args.out,
        "fit-recency",
        {
            "config": config.to_json(),
            "family": args.family,
            "include_gold": bool(args.include_gold),
        },
        [args.gold, *pred_paths],
    )
    out.add_json("fit.json", payload)
    if not args.no_figures:
        points = []
        for p in result.grid:
            fj = p.forget.to_json()
            if fj["kind"] == "exponential_decay":
                label = f"g={fj['gamma']:.2f}"
            elif fj["kind"] == "affine":
                label = f"a={fj['a']:g},b={fj['b']:g}"
            else:
                label = "zero"
            points.append((label, p.r))

        def _render(path: str, points=tuple(points)) -> None:
            from .figures import save_fit_figure

            save_fit_figure(points, path)

        out.add_figure("fit.png", _render)
    out.write()
    print(json.dumps({"best": payload["best"], "best_r": payload["best_r"],
                      "baseline_r": payload["baseline_r"]}, sort_keys=True, indent=2))
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, with_jobs: bool = True) -> None:
    parser.add_argument("--config", help="JSON file with model configuration")
    parser.add_argument("--out", default="centering_out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering"
    )
    if with_jobs:
        parser.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centering-kit",
        description="Local-coherence scoring over coreference-annotated corpora",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="per-discourse scorecards and frame dump")
    p.add_argument("corpus", nargs="+", help="corpus files")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("permute", help="permutation coherence scores")
    p.add_argument("corpus", nargs="+", help="corpus files")
    p.add_argument(
        "--metric",
        default="kp",
        choices=[m.value for m in METRIC_ORDER] + ["all"],
    )
    p.add_argument("--sample-size", type=int, default=100)
    p.add_argument("--threshold", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_permute)

    p = sub.add_parser("correlate", help="correlation and mutual information")
    p.add_argument("--scores", required=True, help="CSV with id,centering_score,conll_f1")
    p.add_argument("--nbins", type=int, default=None)
    p.add_argument("--bits", action="store_true", help="also report MI in bits")
    p.add_argument("--compare", help="previous analysis.json to compare against")
    _add_common(p, with_jobs=False)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("coref-eval", help="coreference metrics between two corpora")
    p.add_argument("gold")
    p.add_argument("pred")
    _add_common(p, with_jobs=False)
    p.set_defaults(func=cmd_coref_eval)

    p = sub.add_parser("fit-recency", help="fit a forget function against system output")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", action="append", help="system output file (repeatable)")
    p.add_argument("--family", default="exponential_decay",
                   choices=["exponential_decay", "affine"])
    p.add_argument("--include-gold", dest="include_gold", action="store_true",
                   default=True)
    p.add_argument("--no-include-gold", dest="include_gold", action="store_false")
    _add_common(p, with_jobs=False)
    p.set_defaults(func=cmd_fit_recency)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConllParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyCorpus:
        print("error: no document to score in the given corpus", file=sys.stderr)
        return EXIT_EMPTY
    except ConstantColumn as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTANT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry_point() -> None:
    sys.exit(main(sys.argv[1:]))
