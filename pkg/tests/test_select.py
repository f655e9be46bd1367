import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from matmix.ecm import FitError, FitOptions
from matmix.select import (
    ari,
    best_matching,
    bic,
    contingency,
    icl,
    map_matrix,
    misclassification_rate,
    select_over_g,
)
from matmix.sim import preset_spec, simulate_dataset
from oracles import ari_pairs, best_perm_error

partitions = st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 3), min_size=n, max_size=n), st.lists(st.integers(0, 3), min_size=n, max_size=n))
)


def test_bic_value():
    assert bic(-100.0, 5, 100) == pytest.approx(-200.0 - 5 * 4.605170185988091, rel=1e-15)
    with pytest.raises(ValueError):
        bic(0.0, 1, 0)


def test_icl_value():
    z = np.array([[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]])
    assert icl(10.0, z) == pytest.approx(10.0 + 2 * (math.log(0.9) + math.log(0.8) + math.log(0.5)))
    assert icl(3.0, np.eye(3)) == 3.0


def test_icl_not_above_bic():
    z = np.random.default_rng(1).dirichlet(np.ones(3), size=30)
    assert icl(0.0, z) <= 0.0


def test_map_matrix():
    z = np.array([[0.2, 0.7, 0.1], [0.6, 0.3, 0.1]])
    assert np.array_equal(map_matrix(z), [[0, 1, 0], [1, 0, 0]])


def test_ari_small_example():
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-15)
    assert ari_pairs([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-15)


def test_ari_identical_and_relabelled():
    a = [0, 0, 1, 2, 2, 1]
    assert ari(a, a) == 1.0
    assert ari(a, [5, 5, 9, 7, 7, 9]) == 1.0


def test_ari_needs_two_points():
    with pytest.raises(ValueError):
        ari([0], [0])


@given(partitions)
def test_ari_matches_pair_counting(pair):
    a, b = pair
    assert ari(a, b) == pytest.approx(ari_pairs(a, b), abs=1e-12)


@given(partitions)
def test_ari_agrees_with_sklearn(pair):
    a, b = pair
    assert ari(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


@given(partitions, st.permutations([0, 1, 2, 3]))
def test_ari_symmetric_and_label_free(pair, perm):
    a, b = pair
    assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-14)
    relabelled = [perm[x] + 10 for x in a]
    assert ari(relabelled, b) == pytest.approx(ari(a, b), abs=1e-14)


def test_contingency():
    table, ua, ub = contingency([0, 0, 1, 2], [1, 1, 1, 0])
    assert ua.tolist() == [0, 1, 2] and ub.tolist() == [0, 1]
    assert table.tolist() == [[0, 2], [0, 1], [1, 0]]
    with pytest.raises(ValueError):
        contingency([0, 1], [0])


def test_misclassification_cases():
    assert misclassification_rate([0, 1, 1, 0], [0, 1, 1, 0]) == 0.0
    # swapped names are not errors
    assert misclassification_rate([1, 0, 0, 1], [0, 1, 1, 0]) == 0.0
    pred, truth = [0, 0, 1, 2, 2, 2], [1, 1, 0, 0, 2, 2]
    assert misclassification_rate(pred, truth) == pytest.approx(best_perm_error(pred, truth))
    assert misclassification_rate(pred, truth) == pytest.approx(1 / 6)


def test_misclassification_mask():
    pred, truth = np.array([0, 1, 1, 0]), np.array([0, 1, 0, 0])
    # one true class, two predicted: an injective relabelling can only credit one of them
    assert misclassification_rate(pred, truth, [False, False, True, True]) == pytest.approx(0.5)
    assert best_perm_error([1, 0], [0, 0]) == 0.5
    assert misclassification_rate(pred, truth, [True, True, True, False]) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        misclassification_rate(pred, truth, [False] * 4)


def test_more_predicted_than_true_classes():
    pred, truth = [0, 1, 2, 2], [0, 0, 1, 1]
    assert misclassification_rate(pred, truth) == pytest.approx(best_perm_error(pred, truth))
    mapping = best_matching(pred, truth)
    assert sorted(v for v in mapping.values() if v is not None) == [0, 1]


@given(partitions)
def test_misclassification_matches_brute_force(pair):
    a, b = pair
    assert misclassification_rate(a, b) == pytest.approx(best_perm_error(a, b), abs=1e-12)


def test_matching_class_limit():
    with pytest.raises(ValueError):
        best_matching(list(range(9)), [0] * 9)


def test_select_single_g():
    ds = simulate_dataset(preset_spec("sim1_mvst", seed=5, per_group=80))
    res = select_over_g(ds.tensor, None, "mvst", [2], FitOptions(n_starts=1))
    assert res.chosen_bic == res.chosen_icl
    assert res.chosen_bic[1] == 2 and res.chosen_bic[0].value == "mvst"
    assert len(res.per_g) == 1 and not res.failures


def test_select_prefers_two_groups():
    ds = simulate_dataset(preset_spec("sim1_mvnig", seed=6))
    res = select_over_g(ds.tensor, None, ["mvnig"], range(1, 4), FitOptions(n_starts=2))
    assert res.chosen_bic[1] == 2
    bics = {g: r.bic for _, g, r in res.successes()}
    assert bics[2] == max(bics.values())


def test_select_records_failures():
    ds = simulate_dataset(preset_spec("sim1_mvvg", seed=5, per_group=20))
    res = select_over_g(ds.tensor, None, "mvvg", [1, 30], FitOptions(n_starts=1, max_iter=20))
    assert res.chosen_bic[1] == 1
    assert [g for _, g, _ in res.failures] == [30]


def test_select_all_failing():
    ds = simulate_dataset(preset_spec("sim1_mvvg", seed=5, per_group=5))
    with pytest.raises(FitError, match="every fit failed"):
        select_over_g(ds.tensor, None, "mvvg", [20], FitOptions(n_starts=1))


def test_select_empty_range():
    with pytest.raises(ValueError):
        select_over_g(np.zeros((4, 1, 1)), None, "mvst", [])
