"""viramkit: punctuation-robustness toolkit for English-Marathi machine translation.

Provides the benchmark data model, punctuation stripping and corpus variant
construction, a trainable punctuation restorer, HTTP clients for translation
backends, corpus-level metrics (BLEU, chrF++ family, embedding cosine), LLM
prompt rendering/parsing, and an experiment runner tying the pieces together.
"""

__version__ = "0.1.0"
