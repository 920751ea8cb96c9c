"""Exact computations with Cuntz semigroups, total K-theory and their limits."""
