"""Trait-level and explanatory-variable-level representation of participants."""
