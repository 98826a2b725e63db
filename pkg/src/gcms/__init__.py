"""Computations on generalized countable Markov shifts."""
