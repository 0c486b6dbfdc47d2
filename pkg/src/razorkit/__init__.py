"""Toolkit for modelling counterpart choice on transaction markets.

Building blocks: a compressed sparse-row graph with O(1) alias sampling,
second-order biased random walks via rejection sampling, skip-gram node
embeddings, the razor-likelihood choice model, razor entropy, top-k Shapley
attribution, an algorithm-reliance harness, a synthetic market generator
and a TPE hyperparameter optimizer.
"""

__version__ = "0.1.0"
