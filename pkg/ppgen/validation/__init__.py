"""Stability and saturation diagnostics of the personas."""
