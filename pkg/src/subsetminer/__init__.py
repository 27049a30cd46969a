"""Instruction co-occurrence subsets for partitioning a program search space."""

__version__ = "0.1.0"

from .catalog import InstructionCatalog, InstructionDef, default_catalog, load_catalog, resolve_token
from .clustering import ClusterConfig, ClusterResult, calibrate_num_ids, cluster
from .corpus import CorpusStats, UnitRecord, extract_subset, scan_corpus, split_units
from .estimator import ArityProfile, SpaceEstimate, enumerate_space, reduction_factor, redundancy, space_size
from .evaluation import corpus_distributions, coverage_curve, measure_coverage, split_corpus
from .subsetcore import (
    SubsetFamily,
    amplify,
    covers,
    dedupe,
    family,
    filter_by_size,
    remove_proper_subsets,
)

__all__ = [
    "ArityProfile",
    "ClusterConfig",
    "ClusterResult",
    "CorpusStats",
    "InstructionCatalog",
    "InstructionDef",
    "SpaceEstimate",
    "SubsetFamily",
    "UnitRecord",
    "amplify",
    "calibrate_num_ids",
    "cluster",
    "corpus_distributions",
    "coverage_curve",
    "covers",
    "dedupe",
    "default_catalog",
    "enumerate_space",
    "extract_subset",
    "family",
    "filter_by_size",
    "load_catalog",
    "measure_coverage",
    "reduction_factor",
    "redundancy",
    "remove_proper_subsets",
    "resolve_token",
    "scan_corpus",
    "space_size",
    "split_corpus",
    "split_units",
]
