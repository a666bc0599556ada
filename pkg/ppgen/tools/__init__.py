"""Helpers around the persona pipeline, such as synthetic data."""
