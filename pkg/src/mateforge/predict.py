"""Heuristic mate-type and mate-axis predictors, plus the evaluation harness."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from mateforge.config import DEFAULT_CONFIG, ToleranceConfig
from mateforge.geometry import (
    CandidateAxisSet,
    assembly_contact_tol,
    axis_ambiguity,
    axis_equivalent,
    candidate_axes,
    shared_axes,
    sweep_feasibility,
)
from mateforge.lines import AxisLine, lines_coincident, sort_lines
from mateforge.model import MATE_TYPE_ORDER, Assembly, FeatureKind, Mate, MateType, Provenance


@dataclass(frozen=True)
class TypePrediction:
    mate_id: str
    predicted: MateType
    scores: tuple  # one probability per type, in MATE_TYPE_ORDER

    def __post_init__(self):
        if _argmax_type(self.scores) is not self.predicted:
            raise ValueError("predicted type must be the argmax of the scores")

    def score_map(self) -> dict:
        return {t.value: s for t, s in zip(MATE_TYPE_ORDER, self.scores)}


def _argmax_type(scores) -> MateType:
    best = max(scores)
    return MATE_TYPE_ORDER[list(scores).index(best)]


def feasibility_type(rotatable: bool, slidable: bool) -> MateType:
    if rotatable and slidable:
        return MateType.CYLINDRICAL
    if rotatable:
        return MateType.REVOLUTE
    if slidable:
        return MateType.SLIDER
    return MateType.FASTEN


def smoothed_scores(predicted: MateType, smoothing: float) -> tuple:
    others = len(MATE_TYPE_ORDER) - 1
    return tuple(1.0 - others * smoothing if t is predicted else smoothing for t in MATE_TYPE_ORDER)


def predict_type_heuristic(
    a: Assembly, pair, axis: AxisLine, config: ToleranceConfig = DEFAULT_CONFIG, mate_id: str = ""
) -> TypePrediction:
    """Mate type from which motions along ``axis`` are collision-free.

    The second part of ``pair`` is swept relative to the first.
    """
    pa, pb = pair
    label = sweep_feasibility(a.part(pa), a.part(pb), axis, config)
    t = feasibility_type(label.rotatable, label.slidable)
    return TypePrediction(mate_id or f"{pa}:{pb}", t, smoothed_scores(t, config.smoothing))


def predict_majority(labels) -> MateType:
    labels = [MateType(x) for x in labels]
    if not labels:
        raise ValueError("majority of an empty label set is undefined")
    counts = Counter(labels)
    return max(MATE_TYPE_ORDER, key=lambda t: (counts[t], -t.order))


# --- axis location --------------------------------------------------------------------


@dataclass(frozen=True)
class AxisPrediction:
    pair: tuple
    chosen: AxisLine
    scores: tuple  # (axis, score) in canonical axis order

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "chosen": self.chosen.to_dict(),
            "scores": [{"axis": l.to_dict(), "score": s} for l, s in self.scores],
        }


def _cylinder_span(feature, line: AxisLine) -> tuple:
    ends = [feature.axis.point + s * feature.axis.direction for s in feature.extent]
    lo, hi = sorted(line.project(e) for e in ends)
    return lo, hi


def axis_score(a: Assembly, pa: str, pb: str, line: AxisLine, contact_tol: float, tol: ToleranceConfig) -> float:
    """Axial overlap of coaxial cylinder pairs, plus a small bonus per coincident face-centre line."""
    fa = a.part(pa).world_features
    fb = a.part(pb).world_features
    cyl_a = [f for f in fa if f.kind is FeatureKind.CYLINDRICAL_FACE and lines_coincident(f.axis, line, tol)]
    cyl_b = [f for f in fb if f.kind is FeatureKind.CYLINDRICAL_FACE and lines_coincident(f.axis, line, tol)]
    overlap = 0.0
    for x in cyl_a:
        xl, xh = _cylinder_span(x, line)
        for y in cyl_b:
            yl, yh = _cylinder_span(y, line)
            overlap += max(0.0, min(xh, yh) - max(xl, yl))
    planar = sum(
        1
        for f in (*fa, *fb)
        if f.kind is FeatureKind.PLANAR_FACE and lines_coincident(f.axis_line(), line, tol)
    )
    return overlap + contact_tol * planar


def score_axis_heuristic(
    a: Assembly,
    pair,
    candidates: Optional[CandidateAxisSet] = None,
    config: ToleranceConfig = DEFAULT_CONFIG,
) -> AxisPrediction:
    pa, pb = pair
    candidates = candidates or candidate_axes(a, config)
    shared = sort_lines(shared_axes(pa, pb, candidates, config))
    if not shared:
        raise ValueError(f"parts {pa} and {pb} share no candidate axis")
    ctol = assembly_contact_tol(a, config)
    scored = tuple((l, axis_score(a, pa, pb, l, ctol, config)) for l in shared)
    best = max(s for _, s in scored)
    chosen = next(l for l, s in scored if s == best)
    return AxisPrediction((pa, pb), chosen, scored)


def predict_assembly(a: Assembly, config: ToleranceConfig = DEFAULT_CONFIG) -> tuple:
    """Re-predict axis and type for every mated pair.

    Returns ``(assembly with predicted mates, skipped)`` where ``skipped``
    lists mate ids whose parts share no candidate axis.
    """
    candidates = candidate_axes(a, config)
    out, skipped = [], []
    for m in sorted(a.mates, key=lambda m: m.id):
        pair = (m.part_a, m.part_b)
        try:
            axis = score_axis_heuristic(a, pair, candidates, config).chosen
        except ValueError:
            skipped.append(m.id)
            continue
        tp = predict_type_heuristic(a, pair, axis, config, m.id)
        out.append(Mate(m.id, m.part_a, m.part_b, tp.predicted, axis, Provenance.PREDICTED))
    return a.with_mates(out), skipped


# --- evaluation -----------------------------------------------------------------------


@dataclass
class EvalCounts:
    """Raw tallies behind an EvalReport; ``merge`` is order-independent."""

    n: int = 0
    type_correct: int = 0
    axis_correct: int = 0
    ambiguous: int = 0
    ambiguous_axis_correct: int = 0
    confusion: list = field(default_factory=lambda: [[0] * 4 for _ in range(4)])
    unmatched_predictions: list = field(default_factory=list)
    unmatched_truth: list = field(default_factory=list)

    def merge(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.n + other.n,
            self.type_correct + other.type_correct,
            self.axis_correct + other.axis_correct,
            self.ambiguous + other.ambiguous,
            self.ambiguous_axis_correct + other.ambiguous_axis_correct,
            [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(self.confusion, other.confusion)],
            sorted(self.unmatched_predictions + other.unmatched_predictions),
            sorted(self.unmatched_truth + other.unmatched_truth),
        )

    def class_counts(self) -> list:
        return [sum(row) for row in self.confusion]


def _rate(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class EvalReport:
    """Rates are None when their denominator is empty."""

    n: int
    type_accuracy: Optional[float]
    majority_type: Optional[MateType]
    majority_baseline_accuracy: Optional[float]
    lift: Optional[float]
    axis_accuracy_overall: Optional[float]
    axis_accuracy_ambiguous_only: Optional[float]
    ambiguous_fraction: Optional[float]
    confusion_matrix: tuple
    unmatched_predictions: tuple = ()
    unmatched_truth: tuple = ()
    expert_agreement: Optional[dict] = None

    @classmethod
    def from_counts(cls, c: EvalCounts, expert_agreement: Optional[dict] = None) -> "EvalReport":
        per_class = c.class_counts()
        if c.n:
            majority = max(MATE_TYPE_ORDER, key=lambda t: (per_class[t.order], -t.order))
            base = per_class[majority.order] / c.n
            acc = c.type_correct / c.n
            lift = acc - base
        else:
            majority = base = acc = lift = None
        return cls(
            c.n,
            acc,
            majority,
            base,
            lift,
            _rate(c.axis_correct, c.n),
            _rate(c.ambiguous_axis_correct, c.ambiguous),
            _rate(c.ambiguous, c.n),
            tuple(tuple(r) for r in c.confusion),
            tuple(c.unmatched_predictions),
            tuple(c.unmatched_truth),
            expert_agreement,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "type_accuracy": self.type_accuracy,
            "majority_type": self.majority_type.value if self.majority_type else None,
            "majority_baseline_accuracy": self.majority_baseline_accuracy,
            "lift": self.lift,
            "axis_accuracy_overall": self.axis_accuracy_overall,
            "axis_accuracy_ambiguous_only": self.axis_accuracy_ambiguous_only,
            "ambiguous_fraction": self.ambiguous_fraction,
            "confusion_matrix": {
                "labels": [t.value for t in MATE_TYPE_ORDER],
                "rows": [list(r) for r in self.confusion_matrix],
            },
            "unmatched_predictions": list(self.unmatched_predictions),
            "unmatched_truth": list(self.unmatched_truth),
            "expert_agreement": self.expert_agreement,
        }


def axis_correct(pred_axis: AxisLine, truth: Mate, equivalent: list, tol: ToleranceConfig) -> bool:
    """Chosen axis is one of the truth mate's equivalent shared axes (or the truth axis itself)."""
    if lines_coincident(pred_axis, truth.axis, tol):
        return True
    return any(lines_coincident(pred_axis, e, tol) for e in equivalent)


def evaluate_counts(
    predictions,
    ground_truth,
    candidates: Optional[CandidateAxisSet] = None,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    assembly: Optional[Assembly] = None,
    prefix: str = "",
) -> EvalCounts:
    """Tallies for one assembly's worth of mates, matched by unordered part pair.

    Without ``candidates`` no shared-axis information is available: no mate
    is ambiguous and axis correctness falls back to the type's own
    equivalence rule against the truth axis.
    """
    truth = {}
    for m in ground_truth:
        if m.mate_type is None:
            raise ValueError(f"ground-truth mate {m.id} has non-whitelisted type {m.tag!r}")
        truth[m.pair] = m
    c = EvalCounts()
    seen = set()
    for p in sorted(predictions, key=lambda m: m.id):
        gt = truth.get(p.pair)
        if gt is None or p.pair in seen or p.mate_type is None:
            c.unmatched_predictions.append(prefix + p.id)
            continue
        seen.add(p.pair)
        c.n += 1
        c.confusion[gt.mate_type.order][p.mate_type.order] += 1
        c.type_correct += p.mate_type is gt.mate_type
        if candidates is not None:
            amb = axis_ambiguity(assembly, gt, candidates, tol)
            ok = axis_correct(p.axis, gt, amb.equivalent_axes, tol)
            is_amb = amb.ambiguous
        else:
            ok = axis_equivalent(gt.mate_type, gt.axis, p.axis, tol)
            is_amb = False
        c.axis_correct += ok
        if is_amb:
            c.ambiguous += 1
            c.ambiguous_axis_correct += ok
    c.unmatched_truth = sorted(prefix + m.id for pair, m in truth.items() if pair not in seen)
    return c


def evaluate(
    predictions,
    ground_truth,
    candidates: Optional[CandidateAxisSet] = None,
    tol: ToleranceConfig = DEFAULT_CONFIG,
) -> EvalReport:
    return EvalReport.from_counts(evaluate_counts(predictions, ground_truth, candidates, tol))


def evaluate_assemblies(pairs, tol: ToleranceConfig = DEFAULT_CONFIG) -> EvalReport:
    """Corpus evaluation over ``(predicted_assembly, truth_assembly)`` pairs.

    Candidate axes come from the truth assembly's geometry.
    """
    total = EvalCounts()
    for pred, truth in sorted(pairs, key=lambda pt: pt[1].id):
        cands = candidate_axes(truth, tol)
        c = evaluate_counts(pred.mates, truth.mates, cands, tol, truth, prefix=f"{truth.id}/")
        total = total.merge(c)
    return EvalReport.from_counts(total)


# --- expert annotations ---------------------------------------------------------------


@dataclass(frozen=True)
class ConsensusResult:
    labels: dict  # mate id -> MateType or None
    comparable: int
    with_consensus: int
    agreeing_with_original: int
    compared_with_original: int

    @property
    def consensus_fraction(self) -> Optional[float]:
        return _rate(self.with_consensus, self.comparable)

    @property
    def original_agreement(self) -> Optional[float]:
        return _rate(self.agreeing_with_original, self.compared_with_original)

    def to_dict(self) -> dict:
        return {
            "labels": {k: (v.value if v else None) for k, v in sorted(self.labels.items())},
            "comparable": self.comparable,
            "with_consensus": self.with_consensus,
            "consensus_fraction": self.consensus_fraction,
            "agreeing_with_original": self.agreeing_with_original,
            "compared_with_original": self.compared_with_original,
            "original_agreement": self.original_agreement,
        }


def strict_majority(labels) -> Optional[MateType]:
    counts = Counter(MateType(x) for x in labels)
    if not counts:
        return None
    top, n = max(counts.items(), key=lambda kv: (kv[1], -kv[0].order))
    return top if 2 * n > sum(counts.values()) else None


def consensus_labels(annotations: dict, original: Optional[dict] = None) -> ConsensusResult:
    """Strict-majority labels for mates annotated at least twice.

    ``annotations`` maps mate id to its list of annotated types. Mates with
    a single annotation cannot be compared and get no label.
    """
    original = original or {}
    labels = {}
    comparable = consensus = agree = compared = 0
    for mid in sorted(annotations):
        anns = list(annotations[mid])
        if not anns:
            raise ValueError(f"mate {mid} has no annotations")
        if len(anns) < 2:
            labels[mid] = None
            continue
        comparable += 1
        lab = strict_majority(anns)
        labels[mid] = lab
        if lab is None:
            continue
        consensus += 1
        if mid in original:
            compared += 1
            agree += MateType(original[mid]) is lab
    return ConsensusResult(labels, comparable, consensus, agree, compared)


__all__ = [
    "AxisPrediction",
    "ConsensusResult",
    "EvalCounts",
    "EvalReport",
    "TypePrediction",
    "axis_correct",
    "axis_score",
    "consensus_labels",
    "evaluate",
    "evaluate_assemblies",
    "evaluate_counts",
    "feasibility_type",
    "predict_assembly",
    "predict_majority",
    "predict_type_heuristic",
    "score_axis_heuristic",
    "smoothed_scores",
    "strict_majority",
]
