"""Exact tests, multiple-testing corrections and binomial intervals."""
