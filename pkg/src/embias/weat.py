"""Association tests over word or sentence vectors.

The same statistics serve word vectors (WEAT-style) and sentence vectors
(SEAT-style); entries are looked up opaquely by token or sentence text.

For a target entry w and attribute vector lists A and B, the association
difference is mean_a cos(w, a) - mean_b cos(w, b). The test statistic sums
association differences over the first target list minus the second; the
effect size standardizes the mean difference by the pooled standard
deviation; significance is a single-tail permutation test over equal-size
re-splits of the merged target lists.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateTestError, DegenerateVectorError, ValidationError
from .resources import TestSpec, filter_oov
from .store import EmbeddingSet

STRATEGIES = ("exact-if-feasible", "always-sample")
STD_CONVENTIONS = ("population", "sample")

# Draws are evaluated in fixed-size chunks, each with its own generator
# derived from (seed, chunk index), so results do not depend on worker count.
_CHUNK = 8192


@dataclass(frozen=True)
class PermutationPlan:
    """How to estimate the permutation p-value.

    max_samples bounds both the exact-enumeration budget and, when
    sampling, the permutation count |PERM| (max_samples - 1 random draws
    plus one assumed exceedance).
    """

    max_samples: int = 100_000
    seed: int = 0
    strategy: str = "exact-if-feasible"

    def __post_init__(self):
        if self.max_samples < 1:
            raise ValidationError("max_samples must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting the domain class

    test_id: str
    effect_size: float
    p_value: float
    n_permutations: int
    exact: bool
    list_sizes: dict[str, int]


def _as_matrix(vectors: Sequence[np.ndarray]) -> np.ndarray:
    if len(vectors) == 0:
        raise ValidationError("vector list is empty")
    return np.asarray(vectors, dtype=np.float64)


def _unit(matrix: np.ndarray, names: Sequence[str] | None = None) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        token = names[int(zero[0])] if names is not None else None
        raise DegenerateVectorError("zero-norm vector in association test", token)
    return matrix / norms[:, None]


def _assoc_scores(
    targets: np.ndarray, attrs_a: np.ndarray, attrs_b: np.ndarray
) -> np.ndarray:
    """Association difference per target row, via unit-row dot products."""
    t = _unit(targets)
    a = _unit(attrs_a)
    b = _unit(attrs_b)
    sims_a = np.clip(t @ a.T, -1.0, 1.0)
    sims_b = np.clip(t @ b.T, -1.0, 1.0)
    return sims_a.mean(axis=1) - sims_b.mean(axis=1)


def assoc_diff(
    w: np.ndarray, attrs_a: Sequence[np.ndarray], attrs_b: Sequence[np.ndarray]
) -> float:
    """Mean cosine of w to attrs_a minus mean cosine to attrs_b; in [-2, 2]."""
    scores = _assoc_scores(
        np.asarray(w, dtype=np.float64)[None, :],
        _as_matrix(attrs_a),
        _as_matrix(attrs_b),
    )
    return float(scores[0])


def test_statistic(
    targets_1: Sequence[np.ndarray],
    targets_2: Sequence[np.ndarray],
    attrs_a: Sequence[np.ndarray],
    attrs_b: Sequence[np.ndarray],
) -> float:
    """Summed association differences: first target list minus second."""
    a = _as_matrix(attrs_a)
    b = _as_matrix(attrs_b)
    s1 = _assoc_scores(_as_matrix(targets_1), a, b)
    s2 = _assoc_scores(_as_matrix(targets_2), a, b)
    return float(s1.sum() - s2.sum())


def effect_size(
    targets_1: Sequence[np.ndarray],
    targets_2: Sequence[np.ndarray],
    attrs_a: Sequence[np.ndarray],
    attrs_b: Sequence[np.ndarray],
    std_convention: str = "population",
) -> float:
    """Standardized mean association difference between the target lists.

    Raises:
        DegenerateTestError: the association scores over the merged targets
            have zero standard deviation (the attribute lists cannot
            distinguish any target).
    """
    if std_convention not in STD_CONVENTIONS:
        raise ValidationError(f"unknown std convention {std_convention!r}")
    a = _as_matrix(attrs_a)
    b = _as_matrix(attrs_b)
    s1 = _assoc_scores(_as_matrix(targets_1), a, b)
    s2 = _assoc_scores(_as_matrix(targets_2), a, b)
    merged = np.concatenate([s1, s2])
    ddof = 0 if std_convention == "population" else 1
    if merged.size - ddof < 1:
        raise DegenerateTestError("too few targets for the chosen std convention")
    std = float(merged.std(ddof=ddof))
    if std == 0.0:
        raise DegenerateTestError("association scores have zero variance")
    return float((s1.mean() - s2.mean()) / std)


def _exact_exceedances(scores: np.ndarray, size_1: int) -> tuple[int, int]:
    """Count splits whose statistic strictly exceeds the observed one.

    The observed statistic corresponds to assigning the first `size_1`
    scores to the first target list; a split's statistic is monotone in the
    sum of scores assigned to that list, so comparisons reduce to subset
    sums.
    """
    observed = float(scores[:size_1].sum())
    total = math.comb(scores.size, size_1)
    count = 0
    indices = np.fromiter(
        itertools.chain.from_iterable(
            itertools.combinations(range(scores.size), size_1)
        ),
        dtype=np.intp,
        count=total * size_1,
    ).reshape(total, size_1)
    sums = scores[indices].sum(axis=1)
    count = int(np.count_nonzero(sums > observed))
    return count, total


def _sampled_exceedances(
    scores: np.ndarray, size_1: int, n_draws: int, seed: int, threads: int
) -> int:
    observed = float(scores[:size_1].sum())
    n = scores.size
    chunks = [
        (index, min(_CHUNK, n_draws - index * _CHUNK))
        for index in range(-(-n_draws // _CHUNK))
    ]

    def run(chunk: tuple[int, int]) -> int:
        index, size = chunk
        rng = np.random.default_rng((seed, index))
        perms = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
        sums = scores[perms[:, :size_1]].sum(axis=1)
        return int(np.count_nonzero(sums > observed))

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return sum(pool.map(run, chunks))
    return sum(run(chunk) for chunk in chunks)


def p_value(
    targets_1: Sequence[np.ndarray],
    targets_2: Sequence[np.ndarray],
    attrs_a: Sequence[np.ndarray],
    attrs_b: Sequence[np.ndarray],
    plan: PermutationPlan,
    threads: int = 1,
) -> tuple[float, int, bool]:
    """Single-tail permutation p-value for the test statistic.

    Splits of the merged target entries into parts of the original sizes
    are enumerated exhaustively when their count fits within
    plan.max_samples (and the strategy allows); otherwise
    plan.max_samples - 1 splits are drawn by seeded shuffle-and-prefix,
    one exceedance is assumed, and the denominator is plan.max_samples.

    Returns:
        (p, n_permutations, exact)
    """
    a = _as_matrix(attrs_a)
    b = _as_matrix(attrs_b)
    s1 = _assoc_scores(_as_matrix(targets_1), a, b)
    s2 = _assoc_scores(_as_matrix(targets_2), a, b)
    return _p_value_from_scores(np.concatenate([s1, s2]), s1.size, plan, threads)


def _p_value_from_scores(
    scores: np.ndarray, size_1: int, plan: PermutationPlan, threads: int = 1
) -> tuple[float, int, bool]:
    total = math.comb(scores.size, size_1)
    if plan.strategy == "exact-if-feasible" and total <= plan.max_samples:
        count, total = _exact_exceedances(scores, size_1)
        return count / total, total, True
    count = _sampled_exceedances(
        scores, size_1, plan.max_samples - 1, plan.seed, threads
    )
    return (count + 1) / plan.max_samples, plan.max_samples, False


def significance_stars(p: float) -> str:
    if p <= 0.01:
        return "**"
    if p <= 0.05:
        return "*"
    return ""


def _lookup(vectors, entry: str) -> np.ndarray:
    if isinstance(vectors, EmbeddingSet):
        return vectors.vector(entry)
    return np.asarray(vectors[entry], dtype=np.float64)


def run_test(
    vectors: EmbeddingSet | Mapping[str, np.ndarray],
    spec: TestSpec,
    plan: PermutationPlan,
    min_per_list: int = 2,
    std_convention: str = "population",
    threads: int = 1,
) -> tuple[TestResult, dict[str, list[str]]]:
    """Effect size plus permutation p-value for one spec.

    Entries missing from `vectors` are dropped (with a floor of
    min_per_list per list) and reported in the returned drop map.
    """
    filtered, dropped = filter_oov(spec, vectors, min_per_list=min_per_list)
    groups = {
        key: np.asarray(
            [_lookup(vectors, entry) for entry in wl.items], dtype=np.float64
        )
        for key, wl in filtered.lists().items()
    }
    scores_1 = _assoc_scores(
        groups["targets_1"], groups["attributes_1"], groups["attributes_2"]
    )
    scores_2 = _assoc_scores(
        groups["targets_2"], groups["attributes_1"], groups["attributes_2"]
    )
    if std_convention not in STD_CONVENTIONS:
        raise ValidationError(f"unknown std convention {std_convention!r}")
    merged = np.concatenate([scores_1, scores_2])
    ddof = 0 if std_convention == "population" else 1
    std = float(merged.std(ddof=ddof)) if merged.size - ddof >= 1 else 0.0
    if std == 0.0:
        raise DegenerateTestError("association scores have zero variance")
    d = float((scores_1.mean() - scores_2.mean()) / std)
    p, n_perm, exact = _p_value_from_scores(merged, scores_1.size, plan, threads)
    result = TestResult(
        test_id=filtered.test_id,
        effect_size=d,
        p_value=p,
        n_permutations=n_perm,
        exact=exact,
        list_sizes={wl.name: len(wl.items) for wl in filtered.lists().values()},
    )
    return result, dropped


def to_report(
    result: TestResult,
    dropped: dict[str, list[str]],
    std_convention: str,
    seed: int,
) -> dict:
    """Report dictionary in the documented JSON schema."""
    report = {
        "test_id": result.test_id,
        "effect_size": result.effect_size,
        "p_value": result.p_value,
        "n_permutations": result.n_permutations,
        "exact": result.exact,
        "significance": significance_stars(result.p_value),
        "dropped_tokens": dropped,
        "std_convention": std_convention,
        "seed": seed,
    }
    if not result.exact:
        report["sampling"] = "with-replacement"
    return report
