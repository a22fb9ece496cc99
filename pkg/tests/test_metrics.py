import numpy as np
import pytest

from chartrole.evaluate import f1_scores
from chartrole.roles import ROLE_ORDER, TextRole


def brute_force_prf(gold, pred):
    """Independent oracle: dict role -> (precision, recall, f1) in percent,
    zero divisions as 0, computed with plain counting loops."""
    out = {}
    for role in ROLE_ORDER:
        tp = fp = fn = 0
        for g, p in zip(gold, pred):
            if p == role and g == role:
                tp += 1
            elif p == role:
                fp += 1
            elif g == role:
                fn += 1
        prec = 100 * tp / (tp + fp) if (tp + fp) else 0.0
        rec = 100 * tp / (tp + fn) if (tp + fn) else 0.0
        f1 = (2 * prec * rec / (prec + rec)) if (prec + rec) else 0.0
        out[role] = (prec, rec, f1)
    return out


def test_perfect_prediction():
    gold = [TextRole.AXIS_TITLE, TextRole.TICK_LABEL, TextRole.OTHER]
    rep = f1_scores(gold, list(gold))
    assert rep.f1_macro == 100.0 and rep.f1_micro == 100.0


def test_two_class_fixture():
    A, B = TextRole.AXIS_TITLE, TextRole.TICK_LABEL
    rep = f1_scores([A, A, B], [A, B, B])
    assert rep.per_class[A.value].f1 == pytest.approx(66.67, abs=0.01)
    assert rep.per_class[B.value].f1 == pytest.approx(66.67, abs=0.01)
    assert rep.f1_macro == pytest.approx(66.67, abs=0.01)
    assert rep.f1_micro == pytest.approx(66.67, abs=0.01)


def test_matches_brute_force_oracle_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(400):
        n = int(rng.integers(1, 51))
        gold = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=n)]
        pred = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=n)]
        rep = f1_scores(gold, pred)
        oracle = brute_force_prf(gold, pred)
        for role in ROLE_ORDER:
            s = rep.per_class[role.value]
            assert (s.precision, s.recall, s.f1) == oracle[role]
        present = [oracle[r][2] for r in ROLE_ORDER
                   if any(g == r for g in gold)]
        assert rep.f1_macro == pytest.approx(float(np.mean(present)), abs=1e-12)
        acc = 100 * sum(g == p for g, p in zip(gold, pred)) / n
        assert rep.f1_micro == pytest.approx(acc, abs=1e-12)


def test_micro_equals_accuracy_always():
    rng = np.random.default_rng(5)
    gold = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=200)]
    pred = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=200)]
    rep = f1_scores(gold, pred)
    assert rep.f1_micro == pytest.approx(
        100 * np.mean([g == p for g, p in zip(gold, pred)]))


def test_macro_over_all_mode():
    gold = [TextRole.AXIS_TITLE] * 4
    pred = [TextRole.AXIS_TITLE] * 4
    assert f1_scores(gold, pred, macro_over="present").f1_macro == 100.0
    assert f1_scores(gold, pred, macro_over="all").f1_macro == pytest.approx(100 / 9)


def test_macro_at_most_micro_when_minorities_all_wrong():
    # imbalance fixture: 95 majority right, 5 minority wrong
    gold = [TextRole.TICK_LABEL] * 95 + [TextRole.LEGEND_TITLE] * 5
    pred = [TextRole.TICK_LABEL] * 100
    rep = f1_scores(gold, pred)
    assert rep.f1_macro <= rep.f1_micro
    assert rep.per_class[TextRole.LEGEND_TITLE.value].f1 == 0.0


def test_oracle_predictions_score_perfectly():
    # test double: gold labels leaked straight into the predictions
    from chartrole.evaluate import PredictionRecord, score_records

    rng = np.random.default_rng(3)
    records = [PredictionRecord(f"s{i}", 0, role, role)
               for i, role in enumerate(ROLE_ORDER[int(k)]
                                        for k in rng.integers(0, 9, size=40))]
    rep = score_records(records)
    assert rep.f1_macro == 100.0 and rep.f1_micro == 100.0


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        f1_scores([TextRole.OTHER], [])
    with pytest.raises(ValueError):
        f1_scores([], [])


def test_scores_bounded():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        gold = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=n)]
        pred = [ROLE_ORDER[i] for i in rng.integers(0, 9, size=n)]
        rep = f1_scores(gold, pred)
        assert 0 <= rep.f1_macro <= 100 and 0 <= rep.f1_micro <= 100
        assert all(0 <= s.f1 <= 100 for s in rep.per_class.values())
