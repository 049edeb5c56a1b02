"""
Exact participatory budgeting: instances, ballots, satisfaction functions,
aggregation rules and definitional fairness checkers.
"""

__version__ = "0.1.0"
