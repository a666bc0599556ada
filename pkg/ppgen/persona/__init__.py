"""Discriminative trait selection, significance pruning and persona reports."""
