"""Command-line entry point.

Exit codes: 0 success, 1 input/validation error, 2 runtime error. All
randomness derives from one --seed; reports are deterministic JSON (no
timestamps) written to stdout or --out.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import analogy as analogy_mod
from . import cluster as cluster_mod
from . import harddebias, pairs, resources, sentdebias, store, weat
from .errors import EmbiasError, FormatError, OovFloorError, ValidationError


def derive_seed(seed: int, module: str) -> int:
    """Stable per-module seed from the single CLI seed."""
    digest = hashlib.sha256(f"{seed}:{module}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(report: dict, out: str | None) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _arrow(before, after, fmt="{:.3f}") -> str:
    return f"{fmt.format(before)} → {fmt.format(after)}"


def _load_embeddings(path: str, fmt: str) -> store.EmbeddingSet:
    return store.load_embeddings(path, fmt)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker cap; results do not depend on it",
    )
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument(
        "--pretty", action="store_true", help="print a human-readable summary"
    )


def _add_embedding_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embeddings", required=True, help="embedding file")
    parser.add_argument(
        "--format", default="word2vec-text", choices=store.FORMATS, dest="fmt"
    )
    parser.add_argument(
        "--debiased", help="second embedding file for before/after comparison"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="embias", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weat", help="word-level association test")
    _add_embedding_args(p)
    p.add_argument("--spec", required=True, help="test spec JSON")
    p.add_argument("--max-samples", type=int, default=100_000)
    p.add_argument("--strategy", default="exact-if-feasible", choices=weat.STRATEGIES)
    p.add_argument("--min-per-list", type=int, default=2)
    p.add_argument("--std", default="population", choices=weat.STD_CONVENTIONS)
    _add_common(p)

    p = sub.add_parser("seat", help="sentence-level association test")
    p.add_argument("--spec", required=True, help="word-level test spec JSON")
    p.add_argument("--templates", required=True, help="template file")
    p.add_argument(
        "--emit-sentences",
        metavar="BASE",
        help="write BASE.sentences.tsv and BASE.manifest.tsv for encoding, then exit",
    )
    p.add_argument("--vectors", help="sentence-vector file")
    p.add_argument("--manifest", help="sentence manifest TSV")
    p.add_argument("--debiased-vectors", help="second vector file for comparison")
    p.add_argument("--max-samples", type=int, default=100_000)
    p.add_argument("--strategy", default="exact-if-feasible", choices=weat.STRATEGIES)
    p.add_argument("--min-per-list", type=int, default=2)
    p.add_argument("--std", default="population", choices=weat.STD_CONVENTIONS)
    _add_common(p)

    p = sub.add_parser("cluster", help="gender-direction clustering audit")
    _add_embedding_args(p)
    p.add_argument("--male-anchor", default="man")
    p.add_argument("--female-anchor", default="vrouw")
    p.add_argument("--k", type=int, default=500)
    p.add_argument("--lists", help="debias lists JSON; gender_specific is excluded")
    p.add_argument("--normalized", action="store_true", help="score on unit rows")
    p.add_argument("--plot-data", help="write scatter-plot TSV here")
    _add_common(p)

    p = sub.add_parser("debias-hard", help="neutralize and equalize word embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--format", default="word2vec-text", choices=store.FORMATS, dest="fmt")
    p.add_argument("--lists", required=True, help="debias lists JSON")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out-embeddings", required=True, dest="out_embeddings")
    p.add_argument("--subspace", help="write the fitted subspace JSON here")
    _add_common(p)

    p = sub.add_parser("pairs-gen", help="generate gendered sentence pairs")
    p.add_argument("--corpus", required=True, help="plain UTF-8 corpus")
    p.add_argument("--pairs", required=True, help="pair list JSON")
    p.add_argument("--excluded", default="zij,ze", help="comma-separated tokens")
    p.add_argument("--max-tokens", type=int, default=512)
    p.add_argument("--limit", type=int, default=30_000)
    p.add_argument("--manifest-out", required=True)
    p.add_argument("--sentences-out", required=True)
    _add_common(p)

    p = sub.add_parser("sent-fit", help="fit a sentence bias subspace")
    p.add_argument("--vectors", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--subspace-out", required=True)
    _add_common(p)

    p = sub.add_parser("sent-apply", help="remove a bias subspace from sentence vectors")
    p.add_argument("--vectors", required=True)
    p.add_argument("--subspace", required=True)
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--out-vectors", required=True, dest="out_vectors")
    _add_common(p)

    p = sub.add_parser("analogy", help="relation-identification accuracy")
    _add_embedding_args(p)
    p.add_argument("--questions", required=True)
    p.add_argument("--offset", default="b-a+c", choices=analogy_mod.OFFSET_FORMULAS)
    _add_common(p)

    return parser


def _plan(args, module: str) -> weat.PermutationPlan:
    return weat.PermutationPlan(
        max_samples=args.max_samples,
        seed=derive_seed(args.seed, module),
        strategy=args.strategy,
    )


def _run_weat(args) -> dict:
    spec = resources.load_test_spec(args.spec)
    plan = _plan(args, "weat")

    def one(path: str) -> dict:
        embeddings = _load_embeddings(path, args.fmt)
        result, dropped = weat.run_test(
            embeddings,
            spec,
            plan,
            min_per_list=args.min_per_list,
            std_convention=args.std,
            threads=args.threads,
        )
        return weat.to_report(result, dropped, args.std, plan.seed)

    before = one(args.embeddings)
    if args.debiased is None:
        if args.pretty:
            print(
                f"{before['test_id']}: d {before['effect_size']:.3f}"
                f"{before['significance']}  p {before['p_value']:.4g}"
            )
        return before
    after = one(args.debiased)
    if args.pretty:
        print(
            f"{before['test_id']}: d "
            + _arrow(before["effect_size"], after["effect_size"])
            + f"  p {_arrow(before['p_value'], after['p_value'], '{:.4g}')}"
        )
    return {"before": before, "after": after}


def _run_seat(args) -> dict | None:
    spec = resources.load_test_spec(args.spec)
    templates = resources.load_templates(args.templates)
    expanded = resources.expand_templates(templates, spec)

    if args.emit_sentences:
        manifest: dict[str, sentdebias.SentenceMeta] = {}
        counter = 0
        for wl in expanded.lists().values():
            for sentence in wl.items:
                manifest[f"s{counter}"] = sentdebias.SentenceMeta(
                    text=sentence, group=wl.name, pair_id=None
                )
                counter += 1
        base = args.emit_sentences
        sentdebias.save_manifest(manifest, f"{base}.manifest.tsv")
        with open(f"{base}.sentences.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for sid, meta in manifest.items():
                fh.write(f"{sid}\t{meta.text}\n")
        return None

    if not args.vectors or not args.manifest:
        raise ValidationError("seat needs --vectors and --manifest (or --emit-sentences)")
    plan = _plan(args, "seat")
    manifest = sentdebias.load_manifest(args.manifest)

    def one(path: str) -> dict:
        svs = sentdebias.load_sentence_vectors(path, manifest)
        result, dropped = weat.run_test(
            svs.text_vectors(),
            expanded,
            plan,
            min_per_list=args.min_per_list,
            std_convention=args.std,
            threads=args.threads,
        )
        return weat.to_report(result, dropped, args.std, plan.seed)

    before = one(args.vectors)
    if args.debiased_vectors is None:
        if args.pretty:
            print(
                f"{before['test_id']}: d {before['effect_size']:.3f}"
                f"{before['significance']}  p {before['p_value']:.4g}"
            )
        return before
    after = one(args.debiased_vectors)
    if args.pretty:
        print(
            f"{before['test_id']}: d "
            + _arrow(before["effect_size"], after["effect_size"])
        )
    return {"before": before, "after": after}


def _run_cluster(args) -> dict:
    embeddings = _load_embeddings(args.embeddings, args.fmt)
    exclusions: frozenset[str] = frozenset()
    if args.lists:
        exclusions = resources.load_debias_lists(args.lists).gender_specific

    def audit(target: store.EmbeddingSet, select_from=None) -> cluster_mod.ClusterAuditResult:
        return cluster_mod.run_cluster_audit(
            target,
            male_anchor=args.male_anchor,
            female_anchor=args.female_anchor,
            k=args.k,
            exclusions=exclusions,
            normalized=args.normalized,
            select_from=select_from,
        )

    before = audit(embeddings)
    if args.plot_data:
        cluster_mod.write_plot_data(before, embeddings, args.plot_data)
    if args.debiased is None:
        if args.pretty:
            print(f"cluster accuracy {before.accuracy:.3f} (k={args.k})")
        return before.to_report()
    debiased = _load_embeddings(args.debiased, args.fmt)
    after = audit(debiased, select_from=embeddings)
    if args.pretty:
        print(f"cluster accuracy {_arrow(before.accuracy, after.accuracy)} (k={args.k})")
    return {"before": before.to_report(), "after": after.to_report()}


def _run_debias_hard(args) -> dict:
    embeddings = _load_embeddings(args.embeddings, args.fmt)
    lists = resources.load_debias_lists(args.lists)
    debiased, subspace, report = harddebias.hard_debias(embeddings, lists, k=args.k)
    store.save_embeddings(debiased, args.out_embeddings)
    if args.subspace:
        harddebias.save_subspace(subspace, args.subspace)
    out = report.to_dict()
    out["out_embeddings"] = args.out_embeddings
    if args.pretty:
        print(
            f"debiased {len(debiased)} words (k={args.k}, "
            f"explained variance {out['explained_variance']})"
        )
    return out


def _run_pairs_gen(args) -> dict:
    pair_list = pairs.load_pair_list(args.pairs)
    excluded = [tok for tok in args.excluded.split(",") if tok]
    generated, stats = pairs.generate_pairs(
        Path(args.corpus),
        pair_list,
        excluded=excluded,
        max_tokens=args.max_tokens,
        limit=args.limit,
    )
    pairs.emit_manifest(generated, args.manifest_out, args.sentences_out)
    report = stats.to_dict()
    report["manifest"] = args.manifest_out
    report["sentences"] = args.sentences_out
    if args.pretty:
        print(f"emitted {stats.emitted} pairs from {stats.sentences_seen} sentences")
    return report


def _run_sent_fit(args) -> dict:
    manifest = sentdebias.load_manifest(args.manifest)
    svs = sentdebias.load_sentence_vectors(args.vectors, manifest)
    subspace = sentdebias.fit_sentence_subspace(svs, k=args.k)
    harddebias.save_subspace(subspace, args.subspace_out)
    report = {
        "k": subspace.k,
        "dim": subspace.dim,
        "explained_variance": [float(v) for v in subspace.explained_variance],
        "subspace": args.subspace_out,
    }
    if args.pretty:
        print(f"fitted k={subspace.k} subspace, explained variance {report['explained_variance']}")
    return report


def _run_sent_apply(args) -> dict:
    svs = sentdebias.load_sentence_vectors(args.vectors)
    subspace = harddebias.load_subspace(args.subspace)
    debiased = sentdebias.debias_batch(svs, subspace, renormalize=args.renormalize)
    sentdebias.save_sentence_vectors(debiased, args.out_vectors)
    report = {
        "n_vectors": len(debiased),
        "dim": debiased.dim,
        "renormalized": args.renormalize,
        "out_vectors": args.out_vectors,
    }
    if args.pretty:
        print(f"debiased {len(debiased)} sentence vectors")
    return report


def _run_analogy(args) -> dict:
    dataset = analogy_mod.load_analogy_dataset(args.questions)

    def one(path: str) -> dict:
        embeddings = _load_embeddings(path, args.fmt)
        return analogy_mod.run_analogy_task(embeddings, dataset, args.offset).to_dict()

    before = one(args.embeddings)
    if args.debiased is None:
        if args.pretty:
            print(f"analogy accuracy {before['overall']}")
        return before
    after = one(args.debiased)
    if args.pretty:
        overall_b = before["overall"] if before["overall"] is not None else float("nan")
        overall_a = after["overall"] if after["overall"] is not None else float("nan")
        print(f"analogy accuracy {_arrow(overall_b, overall_a, '{:.4f}')}")
    return {"before": before, "after": after}


_RUNNERS = {
    "weat": _run_weat,
    "seat": _run_seat,
    "cluster": _run_cluster,
    "debias-hard": _run_debias_hard,
    "pairs-gen": _run_pairs_gen,
    "sent-fit": _run_sent_fit,
    "sent-apply": _run_sent_apply,
    "analogy": _run_analogy,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = _RUNNERS[args.command](args)
        if report is not None:
            _emit(report, args.out)
        return 0
    except (ValidationError, OovFloorError, FormatError, FileNotFoundError) as exc:
        print(f"embias {args.command}: {exc}", file=sys.stderr)
        return 1
    except EmbiasError as exc:
        print(f"embias {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"embias {args.command}: unexpected error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
