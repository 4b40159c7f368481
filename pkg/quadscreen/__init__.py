"""Sparse quadratic logistic regression: correlation screening for the weak
support, pairwise tests for the strong support, and exact population oracles."""
