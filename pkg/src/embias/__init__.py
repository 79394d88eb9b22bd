"""Toolkit for measuring and mitigating social bias in embeddings."""

from .analogy import AnalogyDataset, load_analogy_dataset, run_analogy_task, solve_analogy
from .cluster import ClusterAuditResult, kmeans2, run_cluster_audit, top_biased
from .errors import (
    DegenerateTestError,
    DegenerateVectorError,
    EmbiasError,
    FormatError,
    OovFloorError,
    ValidationError,
)
from .harddebias import (
    BiasSubspace,
    equalize,
    fit_bias_subspace,
    hard_debias,
    load_subspace,
    neutralize,
    project_onto,
    save_subspace,
)
from .pairs import SentencePair, emit_manifest, generate_pairs
from .resources import (
    DebiasLists,
    TemplateSet,
    TestSpec,
    expand_templates,
    filter_oov,
    load_debias_lists,
    load_templates,
    load_test_spec,
    save_test_spec,
)
from .sentdebias import (
    SentenceVectorSet,
    debias_batch,
    debias_vector,
    fit_sentence_subspace,
    load_manifest,
    load_sentence_vectors,
    save_sentence_vectors,
)
from .store import EmbeddingSet, cosine, load_embeddings, normalize_all, save_embeddings
from .weat import PermutationPlan, TestResult, effect_size, p_value, run_test, test_statistic

__version__ = "0.1.0"
