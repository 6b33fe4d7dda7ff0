"""Splitting iteration for the discrete Hopf-Lax saddle-point problem."""
