"""Hybrid Likert/binary dissimilarity between participants."""
