"""Evaluation quantities: syntax, functional correctness, path coverage and leakage."""
from vert.metrics.coverage import CoverageReport, coverage_report, cpc  # noqa: F401
from vert.metrics.functional import EvalReport, PropertyVerdict, eval_functional  # noqa: F401
from vert.metrics.leakage import DEFAULT_N, NGramSet, OverlapReport, corpus_bytes, jaccard, ngrams, overlap  # noqa: F401
from vert.metrics.syntax import SyntaxReport, check_syntax  # noqa: F401
