"""Parallel-corpus mining toolkit.

Segments raw documents into sentences, stores multilingual sentence
embeddings, indexes them with a clustered product-quantized vector index,
mines sentence pairs by two-stage cosine scoring, refines the pairs with
post-processing filters, pivots English-centric corpora into inter-language
pairs, and packages stratified samples plus correlation analytics for human
quality evaluation.
"""

__version__ = "0.1.0"
