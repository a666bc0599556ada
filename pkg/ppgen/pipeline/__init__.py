"""End-to-end persona pipeline and its command line stages."""
