"""multlab: a streaming-sieve laboratory for mean values of multiplicative
functions, Poisson-type local laws of prime factors, and weighted
distributions of additive functions."""

__version__ = "0.1.0"
