"""Neural scoring sidecar for the dialogue dependency toolkit.

Reads dialogue files, emits score files (row-stochastic arc and label
probability matrices) and word-distribution files (masked-LM output
restricted to a signal lexicon).  All decision logic - grouped means,
argmax, thresholds - lives on the consumer side; the boundary is purely
the file formats.
"""

from .config import AdapterConfig, EmptyCorpus, ModelLoadError, TokenizationMismatch

__version__ = "0.1.0"
__all__ = ["AdapterConfig", "EmptyCorpus", "ModelLoadError", "TokenizationMismatch"]
