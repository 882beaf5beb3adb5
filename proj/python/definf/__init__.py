"""Defeasible inference graphs: feedback, correction data, embeddings.

Graphs cross the boundary in their serialized one-line form::

    [C+] text [C-] text [S] text [S-] text [M+] text [M-] text [H+] text [H-] text
"""

from definf._core import (
    __version__,
    correct,
    embed_text,
    entropy,
    feedback,
    generate,
    grad_check,
    mcnemar_exact,
    micro_sign_test,
    overlap_groups,
    repetition_metrics,
    validate_graph,
)

__all__ = [
    "__version__",
    "correct",
    "embed_text",
    "entropy",
    "feedback",
    "generate",
    "grad_check",
    "mcnemar_exact",
    "micro_sign_test",
    "overlap_groups",
    "repetition_metrics",
    "validate_graph",
]
