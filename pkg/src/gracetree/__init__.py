"""Randomized near-complete graceful labelling of trees.

Pipeline: preprocess a tree (trim a small remainder, order the kept
vertices, assign target intervals), then label it by a randomized greedy
process with correction removals that keep the free label sets
quasirandom.  Companion pieces: exact small-case solvers, verifiers for
graceful / bipartite-graceful / harmonious labellings, cyclic packings
of complete graphs, and empirical concentration checks.
"""

__version__ = "0.1.0"
