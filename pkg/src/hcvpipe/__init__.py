"""hcvpipe: from-scratch tabular binary-classification toolkit for
liver-disease laboratory panels.

Library layout mirrors the pipeline: dataset ingestion, chained-equation
imputation (mice), exploratory statistics (explore), PCA, three
classifiers (svm, mlp, forest), evaluation, and a CLI front end.
"""

__version__ = "0.1.0"
