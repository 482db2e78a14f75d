"""tanglebench: benchmark harness for multi-label semantic concern detection
in tangled commits.

Pipeline: a labeled single-concern corpus is sampled into a balanced atomic
pool, tangled commits are synthesized from it, and any chat-completions
endpoint is evaluated over grids of concern count, commit-message inclusion,
and token budget, with Hamming-loss and latency statistics computed from the
raw outcome log.
"""

__version__ = "0.1.0"
