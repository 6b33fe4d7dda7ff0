"""Run manifests and the solve, batch, scaling and verify commands."""
