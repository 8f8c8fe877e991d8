"""GL(2) L-function numerics."""
