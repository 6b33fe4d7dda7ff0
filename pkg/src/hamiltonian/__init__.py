"""Hamiltonian, speed fields, smooth goal indicator and proximal updates."""
