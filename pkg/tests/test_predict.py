import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mateforge.fixtures import all_fixtures, box, generate_fixture, merge_meshes, random_rigid_transform
from mateforge.geometry import CandidateAxisSet
from mateforge.lines import canonicalize_line, sort_lines
from mateforge.model import MATE_TYPE_ORDER, Assembly, Feature, Mate, Part
from mateforge.pipeline import run_pipeline
from mateforge.predict import (
    EvalCounts,
    EvalReport,
    TypePrediction,
    consensus_labels,
    evaluate,
    evaluate_assemblies,
    predict_assembly,
    predict_majority,
    predict_type_heuristic,
    score_axis_heuristic,
    smoothed_scores,
    strict_majority,
)

F, R, S, C = MATE_TYPE_ORDER
X0 = canonicalize_line([0, 0, 0], [1, 0, 0])
X1 = canonicalize_line([0, 1, 0], [1, 0, 0])
Z0 = canonicalize_line([0, 0, 0], [0, 0, 1])
Z1 = canonicalize_line([1, 0, 0], [0, 0, 1])


def mates(types, axis=Z0, prefix="m"):
    return [Mate(f"{prefix}{i}", f"p{i}", f"q{i}", t, axis) for i, t in enumerate(types)]


# --- type predictor ------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, expected", [("shaft_hole", C), ("hinge_flanged", R), ("keyed_slider", S), ("press_fit", F)]
)
def test_feasibility_predictions(name, expected):
    a = generate_fixture(name)
    m = a.mates[0]
    tp = predict_type_heuristic(a, (m.part_a, m.part_b), m.axis)
    assert tp.predicted is expected
    assert sum(tp.scores) == pytest.approx(1.0)
    assert max(tp.scores) == pytest.approx(0.97)
    assert min(tp.scores) == pytest.approx(0.01)


def test_prediction_invariant_under_global_pose():
    base = generate_fixture("keyed_slider")
    rng = np.random.default_rng(0)
    for _ in range(100):
        g = random_rigid_transform(rng)
        a = base.transformed(g)
        m = a.mates[0]
        assert predict_type_heuristic(a, (m.part_a, m.part_b), m.axis).predicted is S


def test_scores_argmax_contract():
    with pytest.raises(ValueError):
        TypePrediction("m", R, smoothed_scores(S, 0.01))
    # a tie resolves to the earlier type
    TypePrediction("m", F, (0.5, 0.5, 0.0, 0.0))


@pytest.mark.parametrize(
    "labels, expected", [([R] * 5 + [F] * 3, R), ([F] * 9 + [R], F), ([S, S, R, R], R), (["slider"], S)]
)
def test_majority(labels, expected):
    assert predict_majority(labels) is expected


def test_majority_empty():
    with pytest.raises(ValueError):
        predict_majority([])


# --- axis scorer ---------------------------------------------------------------------


def _two_parts(feats_a, feats_b):
    pa = Part("a", merge_meshes(box([-1, -1, 0], [1, 1, 10])), feats_a)
    pb = Part("b", merge_meshes(box([-0.5, -0.5, 0], [0.5, 0.5, 10])), feats_b)
    return Assembly("h", [pa, pb], [])


def test_long_pin_beats_incidental_face_line():
    bore = Feature.cylinder([0, 0, 0], [0, 0, 1], 0.5, [0, 0, 0], [0, 0, 10])
    pin = Feature.cylinder([0, 0, 0], [0, 0, 1], 0.5, [0, 0, 0], [0, 0, 10])
    face_a = Feature.planar([1, 0, 5], [1, 0, 0])
    face_b = Feature.planar([0.5, 0, 5], [1, 0, 0])
    a = _two_parts([bore, face_a], [pin, face_b])
    pred = score_axis_heuristic(a, ("a", "b"))
    scores = {l.key: s for l, s in pred.scores}
    assert pred.chosen == Z0
    assert scores[Z0.key] == pytest.approx(10.0)
    assert len(pred.scores) == 2 and min(scores.values()) < 1.0


def test_single_shared_axis():
    f = Feature.cylinder([0, 0, 0], [0, 0, 1], 0.5, [0, 0, 0], [0, 0, 10])
    pred = score_axis_heuristic(_two_parts([f], [f]), ("a", "b"))
    assert pred.chosen == Z0 and len(pred.scores) == 1


def test_equal_scores_choose_canonical_first():
    fa = [Feature.planar([1, 0, 5], [1, 0, 0]), Feature.planar([0, 1, 5], [0, 1, 0])]
    fb = [Feature.planar([0.5, 0, 5], [1, 0, 0]), Feature.planar([0, 0.5, 5], [0, 1, 0])]
    pred = score_axis_heuristic(_two_parts(fa, fb), ("a", "b"))
    lines = [l for l, _ in pred.scores]
    assert pred.scores[0][1] == pred.scores[1][1]
    assert pred.chosen == sort_lines(lines)[0]


def test_no_shared_axis_raises():
    with pytest.raises(ValueError):
        score_axis_heuristic(_two_parts([], []), ("a", "b"))


# --- evaluation ----------------------------------------------------------------------


def test_micro_corpus_accuracy_and_lift():
    truth = mates([R, R, R, R, F, F, F, S, S, C])
    # six hits: four revolutes, one fasten, one slider
    guessed = [R, R, R, R, F, S, C, S, F, F]
    preds = mates(guessed, prefix="p")
    rep = evaluate(preds, truth)
    assert rep.type_accuracy == pytest.approx(0.6)
    assert rep.majority_type is R
    assert rep.majority_baseline_accuracy == pytest.approx(0.4)
    assert rep.lift == pytest.approx(0.2)
    rows = rep.confusion_matrix
    assert [sum(r) for r in rows] == [3, 4, 2, 1]
    assert sum(rows[i][i] for i in range(4)) == 6


def test_slider_offset_axis_correct():
    truth = [Mate("t", "a", "b", S, X0)]
    pred = [Mate("p", "a", "b", S, X1)]
    cands = CandidateAxisSet({"a": [X0, X1], "b": [X0, X1]})
    assert evaluate(pred, truth, cands).axis_accuracy_overall == 1.0
    assert evaluate(pred, truth).axis_accuracy_overall == 1.0


def test_revolute_offset_axis_wrong():
    truth = [Mate("t", "a", "b", R, Z0)]
    pred = [Mate("p", "a", "b", R, Z1)]
    cands = CandidateAxisSet({"a": [Z0, Z1], "b": [Z0, Z1]})
    rep = evaluate(pred, truth, cands)
    assert rep.axis_accuracy_overall == 0.0
    assert rep.ambiguous_fraction == 1.0 and rep.axis_accuracy_ambiguous_only == 0.0


def test_unmatched_reported():
    truth = mates([R, F])
    preds = [Mate("x", "p0", "q0", R, Z0), Mate("y", "zz", "q1", F, Z0)]
    rep = evaluate(preds, truth)
    assert rep.n == 1
    assert rep.unmatched_predictions == ("y",)
    assert rep.unmatched_truth == ("m1",)


type_lists = st.lists(st.sampled_from(MATE_TYPE_ORDER), min_size=1, max_size=40)


@given(type_lists)
def test_identity_predictions_score_one(types):
    truth = mates(types)
    rep = evaluate(mates(types, prefix="p"), truth, CandidateAxisSet({}))
    assert rep.type_accuracy == 1.0
    assert rep.axis_accuracy_overall == 1.0
    assert rep.axis_accuracy_ambiguous_only in (None, 1.0)


@given(type_lists)
def test_cyclic_shift_scores_zero(types):
    shifted = [MATE_TYPE_ORDER[(t.order + 1) % 4] for t in types]
    assert evaluate(mates(shifted, prefix="p"), mates(types)).type_accuracy == 0.0


@given(type_lists, st.lists(st.sampled_from(MATE_TYPE_ORDER), min_size=40, max_size=40))
def test_lift_identity_from_raw_counts(truth_types, guesses):
    guesses = guesses[: len(truth_types)]
    rep = evaluate(mates(guesses, prefix="p"), mates(truth_types))
    correct = sum(g is t for g, t in zip(guesses, truth_types))
    majority = predict_majority(truth_types)
    base = sum(t is majority for t in truth_types) / len(truth_types)
    assert rep.type_accuracy == pytest.approx(correct / len(truth_types))
    assert rep.lift == pytest.approx(correct / len(truth_types) - base)
    for r in (rep.type_accuracy, rep.majority_baseline_accuracy, rep.axis_accuracy_overall):
        assert 0 <= r <= 1
    per_class = [sum(t is k for t in truth_types) for k in MATE_TYPE_ORDER]
    assert [sum(r) for r in rep.confusion_matrix] == per_class


def test_unambiguous_mates_cannot_be_wrong():
    kept = run_pipeline(all_fixtures()).kept
    pairs = [(predict_assembly(a)[0], a) for a in kept]
    rep = evaluate_assemblies(pairs)
    assert rep.axis_accuracy_overall >= 1 - rep.ambiguous_fraction - 1e-12
    assert evaluate_assemblies([(a, a) for a in kept]).type_accuracy == 1.0


def test_empty_evaluation_has_no_rates():
    rep = EvalReport.from_counts(EvalCounts())
    assert rep.type_accuracy is None and rep.n == 0


# --- expert consensus ----------------------------------------------------------------


def test_strict_majority():
    assert strict_majority([R, R, S]) is R
    assert strict_majority([R, S]) is None
    assert strict_majority(["fasten", "fasten"]) is F


def test_consensus_fraction_matches_count():
    ann = {}
    for i in range(301):
        ann[f"c{i}"] = [R, R, S]
    for i in range(40):
        ann[f"n{i}"] = [R, S]
    for i in range(25):
        ann[f"s{i}"] = [F]
    original = {f"c{i}": (R if i < 280 else F) for i in range(301)}
    res = consensus_labels(ann, original)
    assert res.comparable == 341 and res.with_consensus == 301
    assert round(res.consensus_fraction, 2) == 0.88
    assert res.original_agreement == pytest.approx(280 / 301)
    assert res.labels["s0"] is None and res.labels["n0"] is None and res.labels["c0"] is R


def test_consensus_rejects_empty_annotation():
    with pytest.raises(ValueError):
        consensus_labels({"m": []})
