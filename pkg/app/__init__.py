"""Computable retractions, Dugundji systems and p-adic arithmetic on ultrametric spaces."""
