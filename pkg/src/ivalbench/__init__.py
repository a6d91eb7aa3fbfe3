"""Exact workbench for randomized concurrent programs.

The package is organized around three layers:

* ``ival`` / ``ndset`` / ``comp`` -- exact indexed valuations, finite
  nondeterministic sets of them, and a term-level representation used to
  compute expectation extrema without materializing huge sets.
* ``coupling`` -- construction and independent re-checking of probabilistic
  coupling witnesses between a valuation and a set of valuations.
* ``lang`` / ``machine`` / ``sched`` / ``models`` -- a small concurrent
  probabilistic language, its exact small-step interpreter, adversarial
  scheduler analysis by backward induction, and the bundled case studies
  (approximate counters and a two-level skip list).

All probabilities are ``fractions.Fraction`` values; every comparison made
by the test and acceptance suites is exact.
"""

__all__ = [
    "comp",
    "coupling",
    "ival",
    "lang",
    "laws",
    "machine",
    "models",
    "ndset",
    "sched",
]
