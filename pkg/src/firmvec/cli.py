"""Command-line entry points for the pipeline stages and the query service.

Exit codes: 0 on success, 2 on input/data errors, 1 on internal failures.
Stochastic subcommands (segment fit/elbow, evaluate) require --seed so every
run is reproducible. The C2V_SNAPSHOT environment variable supplies the
default snapshot path.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .embed import (
    CompanyRecord,
    EmbeddingStrategy,
    build_embedding_matrix,
    load_company_dataset,
    save_company_dataset,
)
from .errors import EngineError, InputError, ParseError
from .evaluate import (
    balance_training_set,
    evaluate_model,
    fit_classifier,
    labeled_dataset_from_matrix,
    naive_baseline,
    stratified_split,
)
from .ingest import (
    DEFAULT_TIMEOUT,
    DEFAULT_USER_AGENT,
    read_image_labels,
    read_url_list,
    robots_allows,
    scrape_page,
)
from .pca import DEFAULT_MAX_COMPONENTS, DEFAULT_VARIANCE_THRESHOLD, fit_pca, transform_matrix
from .peers import peers_for_firm, peers_for_firm_selective, peers_for_portfolio
from .preprocess import DEFAULT_TOP_N, build_frequency_filter, normalize_and_tokenize
from .segment import DEFAULT_K, DEFAULT_MAX_ITER, distortion_curve, elbow_k, fit_kmeans
from .semantics import SemanticQueryContext, top_n_words
from .store import (
    EngineSnapshot,
    join_metadata,
    load_snapshot,
    save_snapshot,
    snapshot_digest,
)
from .wordvec import load_word_vectors

log = logging.getLogger(__name__)

STRATEGY_CHOICES = [s.value for s in EmbeddingStrategy]


def _snapshot_arg(parser: argparse.ArgumentParser, required: bool = True) -> None:
    default = os.environ.get("C2V_SNAPSHOT")
    parser.add_argument(
        "--snapshot",
        default=default,
        required=required and default is None,
        help="snapshot file (defaults to $C2V_SNAPSHOT)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firmvec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"firmvec {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="fetch pages and extract raw channels")
    p.add_argument("--urls", required=True, help="file with one URL per line")
    p.add_argument("--out", required=True, help="output scrape file (JSON lines)")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--user-agent", default=DEFAULT_USER_AGENT)
    p.add_argument("--respect-robots", action="store_true", help="honor robots.txt")

    p = sub.add_parser("preprocess", help="join, tokenize, and write the dataset file")
    p.add_argument("--scraped", required=True, help="scrape file from `ingest`")
    p.add_argument("--companies", required=True, help="company metadata file (TSV)")
    p.add_argument("--stopwords", required=True, help="stopword file")
    p.add_argument("--labels", help="image labels file (id<TAB>a;b;c)")
    p.add_argument("--top-n", type=int, default=DEFAULT_TOP_N, help="frequent words to drop")
    p.add_argument("--out", required=True, help="output dataset file (TSV)")

    p = sub.add_parser("embed", help="build the company embedding matrix")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vectors", required=True, help="pretrained word-vector file")
    p.add_argument("--vector-format", choices=["text", "binary"], default="text")
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="append_tokens")
    p.add_argument("--out", required=True, help="output snapshot file")

    p = sub.add_parser("pca", help="fit the dimensionality reduction and transform the matrix")
    _snapshot_arg(p)
    p.add_argument("--out", required=True)
    p.add_argument("--variance-threshold", type=float, default=DEFAULT_VARIANCE_THRESHOLD)
    p.add_argument("--max-components", type=int, default=DEFAULT_MAX_COMPONENTS)
    p.add_argument("--standardize", action="store_true", help="unit-variance scale before fit")

    p = sub.add_parser("segment", help="k-means segmentation")
    seg_sub = p.add_subparsers(dest="segment_command", required=True)
    pf = seg_sub.add_parser("fit", help="fit k-means and store it in the snapshot")
    _snapshot_arg(pf)
    pf.add_argument("--out", required=True)
    pf.add_argument("--k", type=int, default=DEFAULT_K)
    pf.add_argument("--seed", type=int, required=True)
    pf.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    pe = seg_sub.add_parser("elbow", help="distortion curve over a k range")
    _snapshot_arg(pe)
    pe.add_argument("--k-min", type=int, required=True)
    pe.add_argument("--k-max", type=int, required=True)
    pe.add_argument("--step", type=int, default=1)
    pe.add_argument("--seed", type=int, required=True)
    pe.add_argument("--restarts", type=int, default=4)

    p = sub.add_parser("evaluate", help="industry-prediction evaluation table")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--vector-format", choices=["text", "binary"], default="text")
    p.add_argument("--strategies", default=",".join(STRATEGY_CHOICES))
    p.add_argument("--classifiers", default="logistic_regression,knn")
    p.add_argument("--level", choices=["level1", "level2"], default="level1")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--balanced", action="store_true", help="SMOTE + undersample the training set")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the report table here instead of stdout")
    p.add_argument("--confusion-out", help="write per-cell confusion matrices to this file")

    p = sub.add_parser("peers", help="firm-centric peers from a snapshot")
    _snapshot_arg(p)
    p.add_argument("--firm", required=True, help="company id")
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--full-sort", action="store_true", help="sort all scores instead of selecting")

    p = sub.add_parser("portfolio", help="portfolio-centric peers from a snapshot")
    _snapshot_arg(p)
    p.add_argument("--firms", required=True, help="comma-separated company ids")
    p.add_argument("--n", type=int, default=15)

    p = sub.add_parser("topwords", help="most similar vocabulary words for a firm")
    _snapshot_arg(p)
    p.add_argument("--vectors", required=True)
    p.add_argument("--vector-format", choices=["text", "binary"], default="text")
    p.add_argument("--firm", required=True)
    p.add_argument("--n", type=int, default=10)

    p = sub.add_parser("serve", help="run the HTTP query service")
    _snapshot_arg(p)
    p.add_argument("--vectors", help="word-vector file enabling /topwords")
    p.add_argument("--vector-format", choices=["text", "binary"], default="text")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_ingest(args) -> int:
    urls = read_url_list(args.urls)
    with open(args.out, "w", encoding="utf-8") as out:
        for url in urls:
            if args.respect_robots and not robots_allows(
                url, timeout=args.timeout, user_agent=args.user_agent
            ):
                log.info("skipping %s (robots.txt)", url)
                result_row = {"url": url, "http_status": 0, "text": "", "alt": ""}
            else:
                result, channels = scrape_page(
                    url, timeout=args.timeout, user_agent=args.user_agent
                )
                result_row = {
                    "url": url,
                    "http_status": result.http_status,
                    "text": channels.text,
                    "alt": channels.alt,
                }
            out.write(json.dumps(result_row, ensure_ascii=False) + "\n")
    print(f"ingested {len(urls)} urls -> {args.out}")
    return 0


def _read_scrape_file(path: str) -> dict[str, dict]:
    rows: dict[str, dict] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: bad JSON ({exc})") from exc
        rows.setdefault(row["url"], row)
    return rows


def _read_company_metadata(path: str) -> list[CompanyRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if lineno == 1 and parts[0] == "id":
            continue
        if len(parts) < 3:
            raise ParseError(f"{path}:{lineno}: expected at least id, name, url")
        parts += [""] * (5 - len(parts))
        records.append(
            CompanyRecord(
                id=parts[0],
                name=parts[1],
                url=parts[2],
                nace_level1=parts[3] or None,
                nace_level2=parts[4] or None,
            )
        )
    if not records:
        raise ParseError(f"{path}: no company metadata rows")
    return records


def _cmd_preprocess(args) -> int:
    scraped_raw = _read_scrape_file(args.scraped)
    records = _read_company_metadata(args.companies)
    labels = read_image_labels(args.labels) if args.labels else {}

    filt = build_frequency_filter(
        [row.get("text", "") for row in scraped_raw.values()],
        stopword_file=args.stopwords,
        top_n=args.top_n,
    )
    by_id_labels = {r.id: labels.get(r.id, []) for r in records}
    scraped_tokens = {
        url: (
            normalize_and_tokenize(row.get("text", ""), filt),
            [],  # image labels attach per record id below
            normalize_and_tokenize(row.get("alt", ""), filt),
        )
        for url, row in scraped_raw.items()
    }
    joined = join_metadata(records, scraped_tokens)
    for record in joined:
        record.image_tokens = [
            tok
            for label in by_id_labels.get(record.id, [])
            for tok in normalize_and_tokenize(label, filt)
        ]
    save_company_dataset(joined, args.out)
    print(f"wrote {len(joined)} company records -> {args.out}")
    return 0


def _cmd_embed(args) -> int:
    records = load_company_dataset(args.dataset)
    table = load_word_vectors(args.vectors, format=args.vector_format)
    strategy = EmbeddingStrategy.parse(args.strategy)
    matrix = build_embedding_matrix(records, table, strategy)
    snapshot = EngineSnapshot(
        matrix=matrix,
        strategy=strategy.value,
        provenance={
            "dataset": str(args.dataset),
            "vectors": str(args.vectors),
            "word_dim": table.dim,
        },
    )
    save_snapshot(snapshot, args.out)
    masked = int(matrix.empty_mask.sum())
    print(f"embedded {matrix.size} firms (dim {matrix.dim}, {masked} empty) -> {args.out}")
    return 0


def _cmd_pca(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    if snapshot.pca is not None:
        raise InputError("snapshot already carries a PCA; start from the embed output")
    model = fit_pca(
        snapshot.matrix,
        variance_threshold=args.variance_threshold,
        max_components=args.max_components,
        standardize=args.standardize,
    )
    reduced = transform_matrix(model, snapshot.matrix)
    out = EngineSnapshot(
        matrix=reduced,
        strategy=snapshot.strategy,
        pca=model,
        provenance={
            **snapshot.provenance,
            "pca_variance_threshold": args.variance_threshold,
            "pca_max_components": args.max_components,
        },
    )
    save_snapshot(out, args.out)
    kept = float(model.explained_ratio.sum())
    print(
        f"reduced {model.input_dim} -> {model.output_dim} dims "
        f"({kept:.4f} variance kept) -> {args.out}"
    )
    return 0


def _cmd_segment(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    if args.segment_command == "fit":
        model = fit_kmeans(snapshot.matrix, k=args.k, seed=args.seed, max_iter=args.max_iter)
        out = EngineSnapshot(
            matrix=snapshot.matrix,
            strategy=snapshot.strategy,
            pca=snapshot.pca,
            segmentation=model,
            provenance={**snapshot.provenance, "kmeans_k": args.k, "kmeans_seed": args.seed},
        )
        save_snapshot(out, args.out)
        print(
            f"fit k={args.k} in {model.iterations_run} iterations "
            f"(distortion {model.distortion_history[-1]:.4f}) -> {args.out}"
        )
        return 0

    ks = list(range(args.k_min, args.k_max + 1, args.step))
    if len(ks) < 3:
        raise InputError("elbow needs at least 3 k values; widen the range")
    curve = distortion_curve(snapshot.matrix, ks, seed=args.seed, restarts=args.restarts)
    print("k\tdistortion")
    for k, d in curve:
        print(f"{k}\t{d:.6f}")
    print(f"elbow\t{elbow_k(curve)}")
    return 0


def _cmd_evaluate(args) -> int:
    records = load_company_dataset(args.dataset)
    table = load_word_vectors(args.vectors, format=args.vector_format)
    strategies = [EmbeddingStrategy.parse(s) for s in args.strategies.split(",") if s]
    classifiers = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    labels = [r.label(args.level) for r in records]

    lines = ["strategy\tclassifier\tbalanced\ttop1\ttop3"]
    confusion_blocks: list[str] = []
    baseline_reported = False
    for strategy in strategies:
        matrix = build_embedding_matrix(records, table, strategy)
        ds = labeled_dataset_from_matrix(matrix, labels, args.level)
        train, test = stratified_split(ds, args.test_fraction, seed=args.seed)
        if not baseline_reported:
            label, prob = naive_baseline(test.y)
            print(f"# naive baseline on test labels: class {label} at {prob:.4f}")
            baseline_reported = True
        if args.balanced:
            train = balance_training_set(train, seed=args.seed)
        for kind in classifiers:
            model = fit_classifier(train, kind)
            result = evaluate_model(model, test)
            lines.append(
                f"{strategy.value}\t{kind}\t{str(args.balanced).lower()}"
                f"\t{result.top1:.4f}\t{result.top3:.4f}"
            )
            block = [f"# {strategy.value} / {kind}", "\t".join(result.class_list)]
            block += ["\t".join(str(v) for v in row) for row in result.confusion]
            confusion_blocks.append("\n".join(block))

    report = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(report + "\n", encoding="utf-8")
        print(f"wrote report -> {args.out}")
    else:
        print(report)
    if args.confusion_out:
        Path(args.confusion_out).write_text("\n\n".join(confusion_blocks) + "\n", encoding="utf-8")
        print(f"wrote confusion matrices -> {args.confusion_out}")
    return 0


def _print_peers(results) -> None:
    for r in results:
        print(f"{r.company_id}\t{r.name}\t{r.similarity:.6f}")
    if not results:
        print("# empty embedding: no peers", file=sys.stderr)


def _cmd_peers(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    row = snapshot.matrix.row_index(args.firm)
    query = peers_for_firm if args.full_sort else peers_for_firm_selective
    _print_peers(query(snapshot.matrix, row, args.n))
    return 0


def _cmd_portfolio(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    ids = [f for f in args.firms.split(",") if f]
    if not ids:
        raise InputError("--firms must name at least one company id")
    rows = [snapshot.matrix.row_index(f) for f in ids]
    _print_peers(peers_for_portfolio(snapshot.matrix, rows, args.n))
    return 0


def _cmd_topwords(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    if snapshot.pca is None:
        raise InputError("snapshot has no PCA model; run the pca stage first")
    table = load_word_vectors(args.vectors, format=args.vector_format)
    ctx = SemanticQueryContext(table=table, pca=snapshot.pca, matrix=snapshot.matrix)
    for word, sim in top_n_words(ctx, args.firm, args.n):
        print(f"{word}\t{sim:.6f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    snapshot = load_snapshot(args.snapshot)
    table = (
        load_word_vectors(args.vectors, format=args.vector_format) if args.vectors else None
    )
    app = create_app(snapshot, digest=snapshot_digest(args.snapshot), word_table=table)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "embed": _cmd_embed,
    "pca": _cmd_pca,
    "segment": _cmd_segment,
    "evaluate": _cmd_evaluate,
    "peers": _cmd_peers,
    "portfolio": _cmd_portfolio,
    "topwords": _cmd_topwords,
    "serve": _cmd_serve,
}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    if getattr(args, "n", None) is not None and args.n < 1:
        print(f"error: --n must be >= 1, got {args.n}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
