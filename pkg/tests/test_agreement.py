import random
from fractions import Fraction

import pytest
from sklearn.metrics import cohen_kappa_score

from prescribe.agreement import (
    AlignmentError,
    ConfusionMatrix,
    LabelKind,
    align,
    cohen_kappa,
    gwet_ac1,
    percent_agreement,
    render_report,
    report_from_labels,
    report_pair,
)
from prescribe.core import AgLevel, AnnotationRecord, DiLabel, verdict


def matrix(rows):
    return ConfusionMatrix(tuple(range(len(rows))), tuple(tuple(r) for r in rows))


# --- exact-arithmetic reference recomputation --------------------------------


def fraction_kappa(rows):
    n = sum(map(sum, rows))
    k = len(rows)
    po = Fraction(sum(rows[i][i] for i in range(k)), n)
    row_t = [sum(r) for r in rows]
    col_t = [sum(rows[i][j] for i in range(k)) for j in range(k)]
    pe = sum(Fraction(r, n) * Fraction(c, n) for r, c in zip(row_t, col_t))
    if pe == 1:
        return None
    return (po - pe) / (1 - pe)


def fraction_ac1(rows):
    n = sum(map(sum, rows))
    k = len(rows)
    po = Fraction(sum(rows[i][i] for i in range(k)), n)
    row_t = [sum(r) for r in rows]
    col_t = [sum(rows[i][j] for i in range(k)) for j in range(k)]
    pis = [Fraction(r + c, 2 * n) for r, c in zip(row_t, col_t)]
    pe = sum(p * (1 - p) for p in pis) / (k - 1)
    if pe == 1:
        return None
    return (po - pe) / (1 - pe)


# --- frozen oracles -----------------------------------------------------------


def test_kappa_hand_computed():
    m = matrix([[45, 5], [5, 45]])
    assert percent_agreement(m) == 0.90
    assert cohen_kappa(m) == pytest.approx(0.80, abs=1e-12)


def test_kappa_perfect_agreement():
    assert cohen_kappa(matrix([[50, 0], [0, 50]])) == 1.0


def test_kappa_undefined_on_unanimous_single_category():
    assert cohen_kappa(matrix([[100, 0], [0, 0]])) is None


def test_ac1_hand_computed():
    m = matrix([[40, 10], [5, 45]])
    assert percent_agreement(m) == pytest.approx(0.85)
    # po=0.85, pi=(0.475, 0.525), pe=0.49875 -> 281/401
    assert gwet_ac1(m) == pytest.approx(281 / 401, abs=1e-12)
    assert gwet_ac1(m) == pytest.approx(float(fraction_ac1([[40, 10], [5, 45]])), abs=1e-12)


def test_ac1_unanimous_single_category_is_one():
    # the high-prevalence case where kappa breaks down
    assert gwet_ac1(matrix([[100, 0], [0, 0]])) == 1.0


def test_ac1_perfect_agreement():
    assert gwet_ac1(matrix([[50, 0], [0, 50]])) == 1.0


def test_empty_matrix_is_an_error():
    with pytest.raises(ValueError):
        cohen_kappa(matrix([[0, 0], [0, 0]]))


# --- randomized properties -----------------------------------------------------


def random_matrix(rng, k=None):
    k = k or rng.choice([2, 3])
    rows = [[rng.randint(0, 30) for _ in range(k)] for _ in range(k)]
    if sum(map(sum, rows)) == 0:
        rows[0][0] = 1
    return rows


def test_matches_exact_reference_recomputation():
    rng = random.Random(42)
    for _ in range(500):
        rows = random_matrix(rng)
        m = matrix(rows)
        ck, ref_ck = cohen_kappa(m), fraction_kappa(rows)
        ac1, ref_ac1 = gwet_ac1(m), fraction_ac1(rows)
        if ref_ck is None:
            assert ck is None
        else:
            assert ck == pytest.approx(float(ref_ck), abs=1e-12)
        assert ac1 == pytest.approx(float(ref_ac1), abs=1e-12)


def test_kappa_matches_sklearn_on_label_vectors():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(5, 60)
        a = [rng.randint(0, 2) for _ in range(n)]
        b = [rng.randint(0, 2) for _ in range(n)]
        m = ConfusionMatrix.from_pairs(zip(a, b), (0, 1, 2))
        ours = cohen_kappa(m)
        theirs = cohen_kappa_score(a, b, labels=[0, 1, 2])
        if ours is None:
            continue
        assert ours == pytest.approx(theirs, abs=1e-9)


def test_symmetry_under_rater_swap():
    rng = random.Random(11)
    for _ in range(300):
        m = matrix(random_matrix(rng))
        t = m.transpose()
        assert percent_agreement(m) == percent_agreement(t)
        assert cohen_kappa(m) == cohen_kappa(t)
        assert gwet_ac1(m) == pytest.approx(gwet_ac1(t), abs=1e-12)


def test_permutation_invariance():
    rng = random.Random(13)
    for _ in range(300):
        k = 3
        rows = random_matrix(rng, k)
        perm = list(range(k))
        rng.shuffle(perm)
        permuted = [[rows[perm[i]][perm[j]] for j in range(k)] for i in range(k)]
        for stat in (cohen_kappa, gwet_ac1):
            a, b = stat(matrix(rows)), stat(matrix(permuted))
            if a is None:
                assert b is None
            else:
                assert a == pytest.approx(b, abs=1e-12)


def test_one_iff_no_off_diagonal():
    rng = random.Random(17)
    for _ in range(300):
        rows = random_matrix(rng)
        m = matrix(rows)
        k = len(rows)
        off_diag = sum(rows[i][j] for i in range(k) for j in range(k) if i != j)
        ck, ac1 = cohen_kappa(m), gwet_ac1(m)
        if off_diag == 0:
            assert ac1 == 1.0
            assert ck is None or ck == 1.0
        else:
            assert ac1 < 1.0
            assert ck is None or ck < 1.0


def test_balanced_binary_marginals_make_ck_equal_ac1():
    # K=2 with row_k = col_k = n/2: both chance terms are 0.5
    m = matrix([[30, 20], [20, 30]])
    assert cohen_kappa(m) == pytest.approx(gwet_ac1(m), abs=1e-12)


def test_independent_random_labelings_near_zero():
    rng = random.Random(20240501)
    n = 10_000
    a = [rng.randint(0, 1) for _ in range(n)]
    b = [rng.randint(0, 1) for _ in range(n)]
    m = ConfusionMatrix.from_pairs(zip(a, b), (0, 1))
    assert abs(cohen_kappa(m)) < 0.05
    assert abs(gwet_ac1(m)) < 0.05


# --- align / report_pair --------------------------------------------------------


def rec(uid, annotator, di, ag):
    return AnnotationRecord(
        unit_id=uid,
        annotator=annotator,
        toxic=verdict(di, ag),
        di=DiLabel(di),
        ag=AgLevel(ag),
    )


def test_align_inner_join_reports_unmatched():
    a = [rec("1", "a", 0, 0), rec("2", "a", 1, 1), rec("3", "a", 0, 1)]
    b = [rec("2", "b", 1, 1), rec("3", "b", 0, 0), rec("4", "b", 1, 2)]
    pairs, only_a, only_b = align(a, b, LabelKind.DI)
    assert len(pairs) == 2
    assert (only_a, only_b) == (1, 1)


def test_align_empty_sets():
    assert align([], [], LabelKind.DI) == ([], 0, 0)


def test_align_duplicate_id_is_an_error():
    a = [rec("1", "a", 0, 0), rec("1", "a", 1, 1)]
    with pytest.raises(AlignmentError, match="'1'"):
        align(a, [], LabelKind.DI)


def test_descriptive_records_lack_di():
    a = [AnnotationRecord(unit_id="1", annotator="a", toxic=True, mode="descriptive")]
    b = [rec("1", "b", 1, 1)]
    pairs, only_a, only_b = align(a, b, LabelKind.DI)
    assert pairs == [] and (only_a, only_b) == (0, 1)
    pairs, _, _ = align(a, b, LabelKind.TOXICITY)
    assert pairs == [(1, 1)]


def test_report_pair_identical_sets():
    a = [rec(str(i), "a", i % 2, i % 3) for i in range(30)]
    b = [rec(str(i), "b", i % 2, i % 3) for i in range(30)]
    report = report_pair(a, b, LabelKind.AG, ("a", "b"))
    assert report.percent_agreement == 1.0
    assert report.gwet_ac1 == 1.0
    assert report.matrix.categories == (0, 1, 2)


def test_report_requires_aligned_pairs():
    with pytest.raises(AlignmentError):
        report_pair([rec("1", "a", 0, 0)], [rec("2", "b", 0, 0)], LabelKind.DI, ("a", "b"))


def test_report_pads_categories_to_domain():
    labels_a = {"1": 0, "2": 0}
    labels_b = {"1": 0, "2": 0}
    report = report_from_labels(labels_a, labels_b, LabelKind.AG, ("a", "b"))
    assert report.matrix.categories == (0, 1, 2)
    assert report.cohen_kappa is None  # single observed category
    assert report.gwet_ac1 == 1.0


def test_render_formats():
    report = report_from_labels({"1": 0, "2": 1}, {"1": 0, "2": 1}, LabelKind.DI, ("x", "y"))
    table = render_report(report, "table")
    assert "Agr.%" in table or "Agr." in table
    csv_text = render_report(report, "csv")
    assert "cohen_kappa" in csv_text.splitlines()[0]
    import json

    line = json.loads(render_report(report, "jsonl"))
    assert line["pair"] == ["x", "y"]
    assert line["agreement_pct"] == 100.0
