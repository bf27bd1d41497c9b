"""veriml: a deductive verifier for a mini-ML language.

Pipeline: annotated source -> typed program -> verification conditions
(weakest preconditions) -> proof tasks -> transformations / SMT solvers,
with a contract-checking interpreter as the executable oracle and
persistent, replayable proof sessions.
"""

__version__ = "0.1.0"
