"""Brute-force verifiers for the closed-form formulas."""
