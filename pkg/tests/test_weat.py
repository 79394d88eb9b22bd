"""Association-statistic tests against an independent brute-force oracle.

The oracle below recomputes everything from scratch (plain-Python cosine,
itertools enumeration of splits) so it shares no code path with the
package implementation.
"""

import itertools
import math

import numpy as np
import pytest

from embias import (
    DegenerateTestError,
    PermutationPlan,
    effect_size,
    p_value,
    run_test,
)
from embias import test_statistic as weat_statistic
from embias.weat import assoc_diff, significance_stars, to_report

from conftest import planted_bias_embedding
from test_resources import spec_from


# --- independent oracle -----------------------------------------------------

def oracle_cos(u, v):
    dot = sum(x * y for x, y in zip(u, v))
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    return dot / (nu * nv)


def oracle_assoc(w, attrs_a, attrs_b):
    return sum(oracle_cos(w, a) for a in attrs_a) / len(attrs_a) - sum(
        oracle_cos(w, b) for b in attrs_b
    ) / len(attrs_b)


def oracle_statistic(m, f, attrs_a, attrs_b):
    return sum(oracle_assoc(w, attrs_a, attrs_b) for w in m) - sum(
        oracle_assoc(w, attrs_a, attrs_b) for w in f
    )


def oracle_exact_exceedances(m, f, attrs_a, attrs_b):
    """Count splits with statistic strictly above the observed one."""
    merged = list(m) + list(f)
    observed = oracle_statistic(m, f, attrs_a, attrs_b)
    count = total = 0
    for chosen in itertools.combinations(range(len(merged)), len(m)):
        total += 1
        part_m = [merged[i] for i in chosen]
        part_f = [merged[i] for i in range(len(merged)) if i not in chosen]
        if oracle_statistic(part_m, part_f, attrs_a, attrs_b) > observed:
            count += 1
    return count, total


def random_fixture(rng, n_targets=4, n_attrs=4, dim=4):
    return (
        list(rng.normal(size=(n_targets, dim))),
        list(rng.normal(size=(n_targets, dim))),
        list(rng.normal(size=(n_attrs, dim))),
        list(rng.normal(size=(n_attrs, dim))),
    )


# --- assoc_diff / statistic -------------------------------------------------

class TestAssocDiff:
    def test_same_attribute_lists_give_zero(self, rng):
        w = rng.normal(size=5)
        attrs = list(rng.normal(size=(3, 5)))
        assert assoc_diff(w, attrs, attrs) == 0.0

    def test_orthogonal_construction(self):
        w = np.array([1.0, 0.0])
        assert assoc_diff(w, [np.array([1.0, 0.0])], [np.array([0.0, 1.0])]) == 1.0

    def test_hand_arithmetic(self):
        w = np.array([1.0, 1.0])
        attrs_a = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        attrs_b = [np.array([-1.0, 0.0])]
        assert assoc_diff(w, attrs_a, attrs_b) == pytest.approx(1.41421356, abs=1e-8)

    def test_matches_oracle(self, rng):
        m, f, a, b = random_fixture(rng)
        for w in m:
            assert assoc_diff(w, a, b) == pytest.approx(
                oracle_assoc(w, a, b), abs=1e-12
            )


class TestStatistic:
    def test_identical_lists_cancel(self, rng):
        m = list(rng.normal(size=(3, 4)))
        a, b = list(rng.normal(size=(2, 4))), list(rng.normal(size=(2, 4)))
        assert weat_statistic(m, m, a, b) == 0.0

    def test_swap_negates(self, rng):
        m, f, a, b = random_fixture(rng)
        assert weat_statistic(m, f, a, b) == pytest.approx(
            -weat_statistic(f, m, a, b), abs=1e-12
        )

    def test_matches_brute_force_sum(self, rng):
        m, f, a, b = random_fixture(rng, n_targets=2, n_attrs=2)
        assert weat_statistic(m, f, a, b) == pytest.approx(
            oracle_statistic(m, f, a, b), abs=1e-12
        )


class TestEffectSize:
    def test_equal_lists_give_zero(self, rng):
        m = list(rng.normal(size=(4, 3)))
        a, b = list(rng.normal(size=(3, 3))), list(rng.normal(size=(3, 3)))
        assert effect_size(m, m, a, b) == pytest.approx(0.0, abs=1e-12)

    def test_constant_groups_give_two(self):
        # Orthogonal construction: every first-list score 1.0, every
        # second-list score -1.0; population std is half the gap.
        e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        m = [e0, e0]
        f = [-e0, -e0]
        assert effect_size(m, f, [e0], [e1]) == pytest.approx(2.0, abs=1e-12)

    def test_zero_variance_raises(self, rng):
        m, f, a, _ = random_fixture(rng)
        with pytest.raises(DegenerateTestError):
            effect_size(m, f, a, a)

    def test_antisymmetry(self, rng):
        for _ in range(5):
            m, f, a, b = random_fixture(rng)
            d = effect_size(m, f, a, b)
            assert d == pytest.approx(-effect_size(f, m, a, b), abs=1e-12)
            assert d == pytest.approx(-effect_size(m, f, b, a), abs=1e-12)

    def test_bounded_by_two_for_equal_sizes(self, rng):
        for _ in range(100):
            m, f, a, b = random_fixture(rng)
            assert abs(effect_size(m, f, a, b)) <= 2.0 + 1e-12

    def test_sample_convention_differs(self, rng):
        m, f, a, b = random_fixture(rng)
        pop = effect_size(m, f, a, b, std_convention="population")
        sam = effect_size(m, f, a, b, std_convention="sample")
        assert abs(pop) > abs(sam)


class TestPValue:
    def test_maximum_statistic_gives_zero(self):
        # Scores are monotone in the axis component; the observed split is
        # the most extreme, so no permutation strictly exceeds it.
        e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        m = [e0, np.array([0.9, 0.1])]
        f = [-e0, np.array([-0.9, 0.1])]
        p, n, exact = p_value(m, f, [e0], [-e0], PermutationPlan(seed=1))
        assert exact and p == 0.0
        assert n == math.comb(4, 2)

    def test_exact_2x2_matches_oracle(self, rng):
        m, f, a, b = random_fixture(rng, n_targets=2, n_attrs=3)
        p, n, exact = p_value(m, f, a, b, PermutationPlan(seed=7))
        count, total = oracle_exact_exceedances(m, f, a, b)
        assert exact and total == 6 and n == 6
        assert p == count / total

    def test_exact_count_bit_for_bit_20_fixtures(self, rng):
        for _ in range(20):
            m, f, a, b = random_fixture(rng)
            p, n, exact = p_value(m, f, a, b, PermutationPlan(seed=3))
            count, total = oracle_exact_exceedances(m, f, a, b)
            assert exact and n == total
            assert round(p * total) == count

    def test_sampled_close_to_exact(self, rng):
        m, f, a, b = random_fixture(rng, n_targets=8, n_attrs=4)
        exact_p, n_exact, _ = p_value(m, f, a, b, PermutationPlan(seed=5))
        assert n_exact == math.comb(16, 8)
        sampled_p, n_sampled, exact = p_value(
            m, f, a, b, PermutationPlan(seed=5, strategy="always-sample")
        )
        assert not exact and n_sampled == 100_000
        assert sampled_p == pytest.approx(exact_p, abs=0.01)

    def test_sampled_deterministic_and_thread_independent(self, rng):
        m, f, a, b = random_fixture(rng, n_targets=8, n_attrs=4)
        plan = PermutationPlan(seed=9, strategy="always-sample")
        single = p_value(m, f, a, b, plan, threads=1)
        multi = p_value(m, f, a, b, plan, threads=4)
        assert single == multi

    def test_sampled_convergence_over_100_seeds(self, rng):
        # Statistical guarantee: within 0.02 of exact for >= 99/100 seeds
        # on an instance with C(12,6) = 924 splits.
        m, f, a, b = random_fixture(rng, n_targets=6, n_attrs=4, dim=6)
        exact_p, _, _ = p_value(m, f, a, b, PermutationPlan(seed=0))
        hits = 0
        for seed in range(100):
            plan = PermutationPlan(seed=seed, strategy="always-sample")
            sampled_p, _, _ = p_value(m, f, a, b, plan)
            if abs(sampled_p - exact_p) <= 0.02:
                hits += 1
        assert hits >= 99


class TestRunTest:
    def test_planted_bias_detected(self):
        embeddings, _, groups = planted_bias_embedding()
        spec = spec_from(groups, test_id="planted")
        result, dropped = run_test(embeddings, spec, PermutationPlan(seed=13))
        assert result.effect_size > 1.0
        assert result.p_value < 0.01
        assert result.exact
        assert dropped == {}

    def test_swapped_targets_negate(self):
        embeddings, _, groups = planted_bias_embedding()
        swapped = dict(groups, targets_1=groups["targets_2"], targets_2=groups["targets_1"])
        plan = PermutationPlan(seed=13)
        d1 = run_test(embeddings, spec_from(groups), plan)[0].effect_size
        d2 = run_test(embeddings, spec_from(swapped), plan)[0].effect_size
        assert d1 == pytest.approx(-d2, abs=1e-12)

    def test_scale_invariance(self):
        embeddings, _, groups = planted_bias_embedding()
        spec = spec_from(groups)
        plan = PermutationPlan(seed=4)
        base, _ = run_test(embeddings, spec, plan)
        scaled, _ = run_test(
            embeddings.with_matrix(embeddings.matrix * 7.25, normalized=False),
            spec,
            plan,
        )
        assert scaled.effect_size == pytest.approx(base.effect_size, abs=1e-9)
        assert scaled.p_value == base.p_value

    def test_determinism(self):
        embeddings, _, groups = planted_bias_embedding()
        spec = spec_from(groups)
        plan = PermutationPlan(seed=99, strategy="always-sample")
        first = run_test(embeddings, spec, plan)
        second = run_test(embeddings, spec, plan)
        assert first == second

    def test_oov_drop_reported(self):
        embeddings, _, groups = planted_bias_embedding()
        groups = dict(groups, targets_1=groups["targets_1"] + ["ontbrekend"])
        result, dropped = run_test(
            embeddings, spec_from(groups), PermutationPlan(seed=1)
        )
        assert dropped == {"M": ["ontbrekend"]}
        assert result.list_sizes["M"] == 8

    def test_works_on_sentence_mapping(self, rng):
        vectors = {
            "zin een": np.array([1.0, 0.2]),
            "zin twee": np.array([0.9, 0.1]),
            "zin drie": np.array([-1.0, 0.2]),
            "zin vier": np.array([-0.9, 0.3]),
            "attr a1": np.array([1.0, 0.0]),
            "attr a2": np.array([0.8, 0.0]),
            "attr b1": np.array([-1.0, 0.0]),
            "attr b2": np.array([-0.8, 0.1]),
        }
        spec = spec_from(
            {
                "targets_1": ["zin een", "zin twee"],
                "targets_2": ["zin drie", "zin vier"],
                "attributes_1": ["attr a1", "attr a2"],
                "attributes_2": ["attr b1", "attr b2"],
            }
        )
        result, _ = run_test(vectors, spec, PermutationPlan(seed=2))
        assert result.effect_size > 1.0


def test_significance_stars():
    assert significance_stars(0.005) == "**"
    assert significance_stars(0.03) == "*"
    assert significance_stars(0.2) == ""


def test_report_schema():
    embeddings, _, groups = planted_bias_embedding()
    result, dropped = run_test(
        embeddings, spec_from(groups), PermutationPlan(seed=21)
    )
    report = to_report(result, dropped, "population", 21)
    assert set(report) == {
        "test_id",
        "effect_size",
        "p_value",
        "n_permutations",
        "exact",
        "significance",
        "dropped_tokens",
        "std_convention",
        "seed",
    }
    assert report["significance"] == "**"
