"""Divisive hierarchical clustering of participants."""
