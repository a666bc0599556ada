"""Two-dimensional projections of participants and personas."""
