"""Batch command-line interface.

Exit codes: 0 success, 1 at least one per-assembly error (listed in the
report), 2 invocation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path

from mateforge.config import ConfigError, load_config
from mateforge.fixtures import FIXTURE_NAMES, generate_fixture
from mateforge.geometry import assembly_contact_tol, axis_ambiguity, candidate_axes, min_distance, shared_axes
from mateforge.io import (
    DocumentError,
    dumps_canonical,
    load_annotations,
    load_assembly,
    save_assembly,
    write_atomic,
)
from mateforge.motion import relative_motion
from mateforge.pipeline import run_pipeline
from mateforge.predict import consensus_labels, evaluate_assemblies, predict_assembly

EXIT_OK, EXIT_ASSEMBLY_ERRORS, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("mateforge")


class UsageError(Exception):
    pass


def _corpus_files(directory: str) -> list:
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {directory}")
    return sorted(p for p in d.glob("*.json") if p.is_file())


def _load_corpus(directory: str):
    """All loadable assemblies plus a list of per-file errors."""
    assemblies, errors = [], []
    for path in _corpus_files(directory):
        try:
            assemblies.append(load_assembly(path))
        except (DocumentError, OSError) as exc:
            errors.append({"file": path.name, "error": f"{type(exc).__name__}: {exc}"})
    ids = [a.id for a in assemblies]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        errors.extend({"file": "", "error": f"duplicate assembly id {i!r}"} for i in dupes)
        assemblies = [a for a in assemblies if a.id not in dupes]
    return assemblies, errors


def _emit(report: dict, path) -> None:
    text = dumps_canonical(report)
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _parallel_map(fn, items, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# --- commands -------------------------------------------------------------------------


def cmd_filter(args, config) -> int:
    corpus, errors = _load_corpus(args.dir)
    res = run_pipeline(corpus, config, args.jobs)
    errors = errors + res.errors
    for a in res.kept if args.out else ():
        save_assembly(a if args.command == "densify" else _original(corpus, a.id), Path(args.out) / f"{a.id}.json")
    report = {
        "command": args.command,
        "config": config.to_dict(),
        "outcomes": [o.to_dict() for o in res.outcomes],
        "kept": [a.id for a in res.kept],
        "stats": res.stats.to_dict(),
        "errors": errors,
    }
    if args.command == "densify":
        report["densified"] = {
            a.id: [m.id for m in a.mates if m.provenance.value == "densified"] for a in res.kept
        }
    _emit(report, args.report)
    return EXIT_ASSEMBLY_ERRORS if errors else EXIT_OK


def _original(corpus, aid):
    return next(a for a in corpus if a.id == aid)


def cmd_stats(args, config) -> int:
    corpus, errors = _load_corpus(args.dir)
    res = run_pipeline(corpus, config, args.jobs)
    stats = res.stats
    for _ in errors:
        stats.add_error()
    errors = errors + res.errors
    _emit({"stats": stats.to_dict(), "errors": errors}, args.report)
    return EXIT_ASSEMBLY_ERRORS if errors else EXIT_OK


def analyze_assembly(a, config) -> dict:
    candidates = candidate_axes(a, config)
    tol = assembly_contact_tol(a, config)
    contacts = []
    for pa, pb in combinations(sorted(p.id for p in a.parts), 2):
        rep = min_distance(a.part(pa), a.part(pb), tol)
        shared = shared_axes(pa, pb, candidates, config)
        contacts.append({**rep.to_dict(), "shared_axes": [l.to_dict() for l in shared]})
    mates = []
    for m in sorted(a.mates, key=lambda m: m.id):
        amb = axis_ambiguity(a, m, candidates, config)
        mates.append(
            {
                "id": m.id,
                "type": m.tag,
                "ambiguous": amb.ambiguous,
                "axis_in_shared": amb.mate_axis_in_shared,
                "equivalent_axes": [l.to_dict() for l in amb.equivalent_axes],
            }
        )
    motions = []
    ids = sorted(p.id for p in a.parts)
    for pa, pb in combinations(ids, 2):
        try:
            g = relative_motion(a, pa, pb, config)
        except ValueError:
            continue
        motions.append({"pair": [pa, pb], "motion": g.to_dict()})
    return {
        "id": a.id,
        "contact_tol": tol,
        "candidate_axes": candidates.to_dict(),
        "contacts": contacts,
        "mates": mates,
        "relative_motions": motions,
    }


def cmd_analyze(args, config) -> int:
    try:
        a = load_assembly(args.assembly)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    except DocumentError as exc:
        _emit({"errors": [{"file": Path(args.assembly).name, "error": f"{type(exc).__name__}: {exc}"}]}, args.report)
        return EXIT_ASSEMBLY_ERRORS
    _emit(analyze_assembly(a, config), args.report)
    return EXIT_OK


def _predict_one(item):
    a, config = item
    try:
        pred, skipped = predict_assembly(a, config)
        return pred, skipped, None
    except Exception as exc:
        return None, [], f"{type(exc).__name__}: {exc}"


def cmd_predict(args, config) -> int:
    corpus, errors = _load_corpus(args.dir)
    results = _parallel_map(_predict_one, [(a, config) for a in corpus], args.jobs)
    skipped = {}
    for a, (pred, skip, err) in zip(corpus, results):
        if err:
            errors.append({"assembly_id": a.id, "error": err})
            continue
        if skip:
            skipped[a.id] = skip
        if args.out:
            save_assembly(pred, Path(args.out) / f"{a.id}.json")
    report = {
        "command": "predict",
        "predicted": [a.id for a, r in zip(corpus, results) if r[2] is None],
        "skipped_mates": skipped,
        "errors": errors,
    }
    _emit(report, args.report)
    return EXIT_ASSEMBLY_ERRORS if errors else EXIT_OK


def cmd_evaluate(args, config) -> int:
    preds, errors = _load_corpus(args.pred_dir)
    truths, terr = _load_corpus(args.truth_dir)
    errors += terr
    truth_map = {a.id: a for a in truths}
    pairs = []
    for p in preds:
        truth = truth_map.get(p.id)
        if truth is None:
            errors.append({"assembly_id": p.id, "error": "no ground-truth assembly with this id"})
            continue
        unlabelled = sorted(m.id for m in truth.mates if m.mate_type is None)
        if unlabelled:
            errors.append(
                {"assembly_id": p.id, "error": f"ground-truth mates with non-whitelisted types: {', '.join(unlabelled)}"}
            )
            continue
        pairs.append((p, truth))
    try:
        report = evaluate_assemblies(pairs, config).to_dict()
    except ValueError as exc:
        errors.append({"assembly_id": "", "error": str(exc)})
        report = {}
    if args.annotations:
        try:
            anns, original = load_annotations(args.annotations)
        except (DocumentError, OSError) as exc:
            raise UsageError(f"annotations: {exc}") from exc
        report["expert_agreement"] = consensus_labels(anns, original).to_dict()
    _emit({"report": report, "errors": errors}, args.report)
    return EXIT_ASSEMBLY_ERRORS if errors else EXIT_OK


def cmd_fixtures(args, config) -> int:
    names = args.names or list(FIXTURE_NAMES)
    for n in names:
        if n not in FIXTURE_NAMES:
            raise UsageError(f"unknown fixture {n!r}; choose from {', '.join(FIXTURE_NAMES)}")
    out = Path(args.out_dir)
    for n in names:
        save_assembly(generate_fixture(n, seed=args.seed), out / f"{n}.json")
    _emit({"command": "fixtures", "written": sorted(names), "seed": args.seed}, args.report)
    return EXIT_OK


# --- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="ToleranceConfig JSON (falls back to $MATEFORGE_CONFIG)")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mateforge", description="Assembly mate curation and motion analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("filter", "run the curation filters over a corpus directory"),
        ("densify", "filter, then add mates to reach maximal connectivity"),
        ("stats", "corpus statistics"),
        ("predict", "predict mate types and axes with the geometric heuristics"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("dir")
        if name != "stats":
            p.add_argument("--out", help="directory for output assemblies")

    p = sub.add_parser("analyze", parents=[common], help="geometric report for one assembly")
    p.add_argument("assembly")

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against ground truth")
    p.add_argument("pred_dir")
    p.add_argument("truth_dir")
    p.add_argument("--annotations", help="expert annotation JSON for agreement statistics")

    p = sub.add_parser("fixtures", parents=[common], help="write the synthetic fixture corpus")
    p.add_argument("out_dir")
    p.add_argument("names", nargs="*", help="subset of fixtures (default: all)")
    return parser


COMMANDS = {
    "filter": cmd_filter,
    "densify": cmd_filter,
    "stats": cmd_stats,
    "analyze": cmd_analyze,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "fixtures": cmd_fixtures,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args.config, args.seed)
        return COMMANDS[args.command](args, config)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
