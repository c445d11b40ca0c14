"""Language-separability toolkit for multilingual instruction-tuning data.

Scores each sample by how cleanly its language cluster separates in a
model's embedding space, pre-selects the most separable samples per
language, refines the pool with classic data-selection strategies, and
emits curriculum-ordered training schedules.
"""

__version__ = "0.1.0"
