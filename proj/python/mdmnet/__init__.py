"""Multiregression dynamic model structure learning.

Node labels are 1-based throughout; data are T x n arrays.
"""

from ._mdmnet import (
    Dag,
    Error,
    InvalidArgument,
    NumericalError,
    ParseError,
    ResourceError,
    ScoreTable,
    appendix_a,
    appendix_a_dag,
    appendix_b,
    appendix_b_dag,
    c_sensitivity,
    change_points,
    d_accuracy,
    dp_search,
    group_prevalence,
    ip_search,
    node_monitor,
    node_score,
    read_csv,
    score_table,
    write_csv,
)

__all__ = [
    "Dag",
    "Error",
    "InvalidArgument",
    "NumericalError",
    "ParseError",
    "ResourceError",
    "ScoreTable",
    "appendix_a",
    "appendix_a_dag",
    "appendix_b",
    "appendix_b_dag",
    "c_sensitivity",
    "change_points",
    "d_accuracy",
    "dp_search",
    "group_prevalence",
    "ip_search",
    "node_monitor",
    "node_score",
    "read_csv",
    "score_table",
    "write_csv",
]

__version__ = "0.1.0"
