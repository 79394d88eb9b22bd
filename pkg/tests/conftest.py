"""Shared fixtures and the acceptance-suite terminal summary."""

from __future__ import annotations

import numpy as np
import pytest

from embias import DebiasLists, EmbeddingSet


def make_embeddings(words, matrix, normalized=False) -> EmbeddingSet:
    return EmbeddingSet(tuple(words), np.asarray(matrix, dtype=np.float64), normalized)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def planted_bias_embedding(
    n_pairs: int = 8,
    n_targets: int = 8,
    n_attrs: int = 8,
    n_filler: int = 100,
    dim: int = 10,
    axis_weight: float = 0.8,
    noise: float = 0.5,
    seed: int = 11,
):
    """Synthetic embedding with all gender signal on axis 0.

    Both target lists share per-index off-axis noise, so neutralizing
    axis 0 makes matched targets coincide and the measured effect vanish
    exactly. Returns (EmbeddingSet, DebiasLists, TestSpec-ready word
    groups dict).
    """
    rng = np.random.default_rng(seed)
    words: list[str] = []
    rows: list[np.ndarray] = []

    def off_axis(scale: float) -> np.ndarray:
        vec = np.zeros(dim)
        vec[1:] = rng.normal(0.0, scale, size=dim - 1)
        return vec

    def add(word: str, on_axis: float, perp: np.ndarray) -> None:
        vec = perp.copy()
        vec[0] = on_axis
        words.append(word)
        rows.append(vec)

    definitional = []
    for i in range(n_pairs):
        base = off_axis(0.1)
        add(f"mdef{i}", 1.0, base)
        add(f"fdef{i}", -1.0, base)
        definitional.append((f"mdef{i}", f"fdef{i}"))

    groups = {"targets_1": [], "targets_2": [], "attributes_1": [], "attributes_2": []}
    for i in range(n_targets):
        shared = off_axis(noise)
        add(f"mtar{i}", axis_weight, shared)
        add(f"ftar{i}", -axis_weight, shared)
        groups["targets_1"].append(f"mtar{i}")
        groups["targets_2"].append(f"ftar{i}")
    for i in range(n_attrs):
        add(f"aatt{i}", axis_weight, off_axis(noise))
        add(f"batt{i}", -axis_weight, off_axis(noise))
        groups["attributes_1"].append(f"aatt{i}")
        groups["attributes_2"].append(f"batt{i}")
    for i in range(n_filler):
        add(f"fill{i}", rng.normal(0.0, 0.05), off_axis(1.0))

    gender_specific = frozenset(w for pair in definitional for w in pair)
    lists = DebiasLists(
        gender_specific=gender_specific,
        definitional_pairs=tuple(definitional),
        equalize_pairs=tuple(definitional),
    )
    return make_embeddings(words, np.array(rows)), lists, groups


_ACCEPTANCE_LABEL = "acceptance"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, marker in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            lines.append((name, marker))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, marker in sorted(lines):
            terminalreporter.write_line(f"[{_ACCEPTANCE_LABEL}] {marker} {name}")
