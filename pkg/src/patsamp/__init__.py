"""Interactive pattern-mining workbench.

Core pipeline: load a transaction database, enumerate frequent itemsets,
sample them proportionally to a learned logistic interestingness function
(random-XOR cell partitioning), collect ordered feedback, and retrain by
stochastic coordinate descent on preference pairs.  An HTTP service exposes
live sessions; a CLI drives batch experiments.
"""

__version__ = "0.1.0"
