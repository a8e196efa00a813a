"""Exact local and global Tamagawa-number densities for elliptic curves
over number fields: per-prime Kodaira/component-number distributions,
their Markov-chain derivation over Weierstrass coefficient space, and the
Dirichlet-series assembly of global averages, with independent
Monte-Carlo and exhaustive-enumeration cross-checks."""

__version__ = "0.1.0"
