"""Corpus curation: heuristic filters, geometric consistency, mate densification."""

from __future__ import annotations

import enum
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import networkx as nx

from mateforge.config import DEFAULT_CONFIG, ToleranceConfig
from mateforge.geometry import (
    CandidateAxisSet,
    assembly_contact_tol,
    axis_ambiguity,
    candidate_axes,
    min_distance,
    shared_axes,
)
from mateforge.lines import canonicalize_line, directions_parallel, lines_coincident
from mateforge.model import MATE_TYPE_ORDER, Assembly, Mate, MateType, Provenance
from mateforge.motion import GroupKind, MotionGroup, group_to_mate_type, relative_motion

log = logging.getLogger(__name__)


class Stage(str, enum.Enum):
    MOVING_PART = "moving_part"
    CONNECTIVITY = "connectivity"
    COMPOUND_MATE = "compound_mate"
    TYPE_WHITELIST = "type_whitelist"
    GEOMETRIC_CONSISTENCY = "geometric_consistency"
    DENSIFY_COMPLEX = "densify_complex"


STAGE_ORDER = tuple(Stage)


class Verdict(str, enum.Enum):
    KEPT = "kept"
    REJECTED = "rejected"


@dataclass(frozen=True)
class FilterOutcome:
    assembly_id: str
    verdict: Verdict
    stage: Optional[Stage]
    detail: str = ""

    @property
    def kept(self) -> bool:
        return self.verdict is Verdict.KEPT

    def to_dict(self) -> dict:
        return {
            "assembly_id": self.assembly_id,
            "verdict": self.verdict.value,
            "stage": self.stage.value if self.stage else None,
            "detail": self.detail,
        }


def _kept(a: Assembly, stage: Optional[Stage], detail: str = "") -> FilterOutcome:
    return FilterOutcome(a.id, Verdict.KEPT, stage, detail)


def _rejected(a: Assembly, stage: Stage, detail: str) -> FilterOutcome:
    return FilterOutcome(a.id, Verdict.REJECTED, stage, detail)


# --- graph filters --------------------------------------------------------------------


def filter_moving_part(a: Assembly) -> FilterOutcome:
    moving = [m.id for m in a.mates if m.mate_type is not MateType.FASTEN]
    if moving:
        return _kept(a, Stage.MOVING_PART)
    return _rejected(a, Stage.MOVING_PART, "no mate allows motion")


def filter_connectivity(a: Assembly) -> FilterOutcome:
    g = nx.Graph()
    g.add_nodes_from(p.id for p in a.parts)
    g.add_edges_from((m.part_a, m.part_b) for m in a.mates)
    n = nx.number_connected_components(g) if len(g) else 0
    if n <= 1:
        return _kept(a, Stage.CONNECTIVITY)
    return _rejected(a, Stage.CONNECTIVITY, f"mate graph has {n} components")


def filter_compound(a: Assembly) -> FilterOutcome:
    counts = Counter(m.pair_key for m in a.mates)
    multi = sorted(pair for pair, c in counts.items() if c > 1)
    if not multi:
        return _kept(a, Stage.COMPOUND_MATE)
    return _rejected(a, Stage.COMPOUND_MATE, f"multiple mates between {multi[0][0]} and {multi[0][1]}")


def filter_type_whitelist(a: Assembly) -> FilterOutcome:
    bad = sorted({m.tag for m in a.mates if m.mate_type is None})
    if not bad:
        return _kept(a, Stage.TYPE_WHITELIST)
    return _rejected(a, Stage.TYPE_WHITELIST, f"non-whitelisted mate types: {', '.join(bad)}")


# --- geometry-dependent stages --------------------------------------------------------


class ContactCache:
    """Lazily computed pairwise contact reports for one assembly."""

    def __init__(self, a: Assembly, config: ToleranceConfig):
        self.assembly = a
        self.tol = assembly_contact_tol(a, config)
        self._reports: dict = {}

    def report(self, pa: str, pb: str):
        key = tuple(sorted((pa, pb)))
        if key not in self._reports:
            self._reports[key] = min_distance(
                self.assembly.part(key[0]), self.assembly.part(key[1]), self.tol
            )
        return self._reports[key]

    def in_contact(self, pa: str, pb: str) -> bool:
        return self.report(pa, pb).in_contact


def filter_geometric_consistency(
    a: Assembly,
    candidates: Optional[CandidateAxisSet] = None,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    contacts: Optional[ContactCache] = None,
) -> FilterOutcome:
    """Every mated pair must touch, and each mate axis must be a shared candidate axis."""
    candidates = candidates or candidate_axes(a, tol)
    contacts = contacts or ContactCache(a, tol)
    for m in sorted(a.mates, key=lambda m: m.id):
        rep = contacts.report(m.part_a, m.part_b)
        if not rep.in_contact:
            return _rejected(
                a,
                Stage.GEOMETRIC_CONSISTENCY,
                f"mate {m.id}: parts {m.part_a}/{m.part_b} are {rep.min_distance:.6g} apart "
                f"(contact tol {rep.contact_tol:.6g})",
            )
        if tol.require_axis_on_candidates:
            shared = shared_axes(m.part_a, m.part_b, candidates, tol)
            if not any(lines_coincident(m.axis, s, tol) for s in shared):
                return _rejected(
                    a, Stage.GEOMETRIC_CONSISTENCY, f"mate {m.id}: axis matches no shared candidate axis"
                )
    return _kept(a, Stage.GEOMETRIC_CONSISTENCY)


@dataclass
class DensifyResult:
    assembly: Assembly
    outcome: FilterOutcome
    added: list = field(default_factory=list)


def snap_axis(group: MotionGroup, shared: list, tol: ToleranceConfig):
    """Pick the mate axis for a derived group from the pair's shared axes.

    Returns ``(axis, snapped)``; ``snapped`` is False when no shared axis
    fits and the derived axis is kept as is.
    """
    if group.kind is GroupKind.FIXED:
        return shared[0], True
    if group.kind is GroupKind.TRANSLATION:
        for s in shared:
            if directions_parallel(s, group.direction, tol):
                return s, True
        return canonicalize_line(shared[0].point, group.direction), False
    for s in shared:
        if lines_coincident(s, group.axis, tol):
            return s, True
    return group.axis, False


def densify_pairs(
    a: Assembly,
    candidates: CandidateAxisSet,
    tol: ToleranceConfig,
    contacts: ContactCache,
) -> list:
    """Unmated pairs that should be mated: touching and sharing at least one axis."""
    mated = a.mated_pairs()
    out = []
    for pa, pb in combinations(sorted(p.id for p in a.parts), 2):
        if (pa, pb) in mated:
            continue
        shared = shared_axes(pa, pb, candidates, tol)
        if shared and contacts.in_contact(pa, pb):
            out.append((pa, pb, shared))
    return out


def densify(
    a: Assembly,
    candidates: Optional[CandidateAxisSet] = None,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    contacts: Optional[ContactCache] = None,
) -> DensifyResult:
    """Mate every touching, axis-sharing pair using the motion implied by existing mates.

    Relative motions are derived from the input mates only, so the order in
    which pairs are visited does not matter. A pair whose derived motion is
    not one of the four simple groups rejects the assembly.
    """
    candidates = candidates or candidate_axes(a, tol)
    contacts = contacts or ContactCache(a, tol)
    added = []
    notes = []
    for pa, pb, shared in densify_pairs(a, candidates, tol, contacts):
        group = relative_motion(a, pa, pb, tol)
        mate_type = group_to_mate_type(group)
        if mate_type is None:
            return DensifyResult(
                a,
                _rejected(a, Stage.DENSIFY_COMPLEX, f"parts {pa}/{pb} touch but their relative motion is complex"),
            )
        axis, snapped = snap_axis(group, shared, tol)
        if not snapped:
            notes.append(f"{pa}/{pb}: derived axis kept (no shared axis coincides)")
        added.append(Mate(f"densified:{pa}:{pb}", pa, pb, mate_type, axis, Provenance.DENSIFIED))
    detail = f"added {len(added)} mate(s)"
    if notes:
        detail += "; " + "; ".join(notes)
    out = a.with_mates(list(a.mates) + added)
    return DensifyResult(out, _kept(a, Stage.DENSIFY_COMPLEX, detail), added)


# --- corpus runner --------------------------------------------------------------------


GRAPH_FILTERS = (filter_moving_part, filter_connectivity, filter_compound, filter_type_whitelist)


@dataclass
class AssemblyResult:
    outcome: FilterOutcome
    assembly: Optional[Assembly] = None
    densified: int = 0
    type_counts: dict = field(default_factory=dict)
    ambiguous: int = 0
    mates: int = 0


def process_assembly(a: Assembly, config: ToleranceConfig = DEFAULT_CONFIG) -> AssemblyResult:
    """Run every stage in order on one assembly; stops at the first rejection."""
    for f in GRAPH_FILTERS:
        out = f(a)
        if not out.kept:
            return AssemblyResult(out)
    candidates = candidate_axes(a, config)
    contacts = ContactCache(a, config)
    out = filter_geometric_consistency(a, candidates, config, contacts)
    if not out.kept:
        return AssemblyResult(out)
    res = densify(a, candidates, config, contacts)
    if not res.outcome.kept:
        return AssemblyResult(res.outcome)
    dense = res.assembly
    counts = Counter(m.mate_type.value for m in dense.mates)
    ambiguous = sum(axis_ambiguity(dense, m, candidates, config).ambiguous for m in dense.mates)
    return AssemblyResult(
        _kept(a, None, res.outcome.detail),
        dense,
        len(res.added),
        dict(counts),
        ambiguous,
        len(dense.mates),
    )


@dataclass
class CorpusStats:
    """Order-independent tallies; ``merge`` is associative and commutative."""

    total: int = 0
    kept: int = 0
    errors: int = 0
    rejected: dict = field(default_factory=lambda: {s.value: 0 for s in STAGE_ORDER})
    densified_mates: int = 0
    mate_types: dict = field(default_factory=lambda: {t.value: 0 for t in MATE_TYPE_ORDER})
    mates: int = 0
    ambiguous_mates: int = 0

    def add(self, r: AssemblyResult) -> None:
        self.total += 1
        if r.outcome.kept:
            self.kept += 1
            self.densified_mates += r.densified
            for k, v in r.type_counts.items():
                self.mate_types[k] = self.mate_types.get(k, 0) + v
            self.mates += r.mates
            self.ambiguous_mates += r.ambiguous
        else:
            self.rejected[r.outcome.stage.value] += 1

    def add_error(self) -> None:
        self.total += 1
        self.errors += 1

    def merge(self, other: "CorpusStats") -> "CorpusStats":
        out = CorpusStats(
            self.total + other.total,
            self.kept + other.kept,
            self.errors + other.errors,
            {k: self.rejected.get(k, 0) + other.rejected.get(k, 0) for k in self.rejected | other.rejected},
            self.densified_mates + other.densified_mates,
            {k: self.mate_types.get(k, 0) + other.mate_types.get(k, 0) for k in self.mate_types | other.mate_types},
            self.mates + other.mates,
            self.ambiguous_mates + other.ambiguous_mates,
        )
        return out

    @property
    def ambiguous_fraction(self) -> float:
        return self.ambiguous_mates / self.mates if self.mates else 0.0

    def stage_table(self) -> list:
        """Per stage: how many assemblies reached it, passed it, were rejected by it."""
        rows = []
        remaining = self.total - self.errors
        for s in STAGE_ORDER:
            rej = self.rejected.get(s.value, 0)
            rows.append({"stage": s.value, "entered": remaining, "passed": remaining - rej, "rejected": rej})
            remaining -= rej
        return rows

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "errors": self.errors,
            "rejected": {s.value: self.rejected.get(s.value, 0) for s in STAGE_ORDER},
            "stages": self.stage_table(),
            "densified_mates": self.densified_mates,
            "mate_types": {t.value: self.mate_types.get(t.value, 0) for t in MATE_TYPE_ORDER},
            "mates": self.mates,
            "ambiguous_mates": self.ambiguous_mates,
            "ambiguous_fraction": self.ambiguous_fraction,
        }


@dataclass
class PipelineResult:
    kept: list
    stats: CorpusStats
    outcomes: list
    errors: list = field(default_factory=list)


def _safe_process(args):
    a, config = args
    try:
        return process_assembly(a, config), None
    except Exception as exc:  # per-assembly failures never abort the corpus
        log.warning("assembly %s failed: %s", a.id, exc)
        return None, f"{type(exc).__name__}: {exc}"


def run_pipeline(corpus, config: ToleranceConfig = DEFAULT_CONFIG, jobs: int = 1) -> PipelineResult:
    """Curate a corpus. Results are sorted by assembly id, whatever the input order or ``jobs``."""
    corpus = sorted(corpus, key=lambda a: a.id)
    work = [(a, config) for a in corpus]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_safe_process, work))
    else:
        results = [_safe_process(w) for w in work]
    stats = CorpusStats()
    kept, outcomes, errors = [], [], []
    for a, (res, err) in zip(corpus, results):
        if res is None:
            stats.add_error()
            errors.append({"assembly_id": a.id, "error": err})
            continue
        stats.add(res)
        outcomes.append(res.outcome)
        if res.outcome.kept:
            kept.append(res.assembly)
    return PipelineResult(kept, stats, outcomes, errors)


__all__ = [
    "AssemblyResult",
    "ContactCache",
    "CorpusStats",
    "DensifyResult",
    "FilterOutcome",
    "PipelineResult",
    "STAGE_ORDER",
    "Stage",
    "Verdict",
    "densify",
    "densify_pairs",
    "filter_compound",
    "filter_connectivity",
    "filter_geometric_consistency",
    "filter_moving_part",
    "filter_type_whitelist",
    "process_assembly",
    "run_pipeline",
    "snap_axis",
]
