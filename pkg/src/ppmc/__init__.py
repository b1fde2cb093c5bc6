"""Equivariant embeddings of CP^n and their pluri-mean curvature.

Exact symbolic engine (:mod:`ppmc.reduced`, :mod:`ppmc.geometry`), full
coordinate model of V_k (:mod:`ppmc.bipoly`) and a floating-point
finite-difference oracle (:mod:`ppmc.oracle`).
"""

__version__ = "0.1.0"
