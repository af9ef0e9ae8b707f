"""ezero: a minimal first-order core language with bundles and futures,
extended by a macro/transform layer, checked by a bundle-dimension
analysis, and persistable as binary images."""

__version__ = "0.1.0"
