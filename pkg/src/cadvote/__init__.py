"""cadvote — coronary-artery-disease classification toolkit.

From-scratch classifiers (decision tree, random forest, AdaBoost, MLP,
naive Bayes, KNN), a majority-voting ensemble, SMOTE/standardization
preprocessing, gain-ratio feature selection, stratified cross-validation
with a full metric suite, versioned model bundles, a CLI, and an HTTP
inference service.
"""

__version__ = "0.1.0"
