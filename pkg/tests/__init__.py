"""Unit tests for plasticity-symmetry."""
