"""Sparse measure-space recovery of two-layer ReLU teacher networks.

Subpackages
-----------
geometry
    Sphere sampling, geodesic distance, the ReLU arc-cosine kernel.
model
    Teacher/student networks, atomic measures, datasets, exact L2 distances.
objective
    Parameter- and measure-space objectives with exact subgradients.
optimizer
    Norm-dependent gradient descent with conic-update diagnostics.
certificate
    Dual certificates: masked feature matrices, the pre-certificate,
    the closed-form population certificate, non-degeneracy reports.
metrics
    Recovery reports, neighborhood distances, bottleneck matching,
    two-phase convergence fitting.
harness
    Experiment configs, CSV/JSON persistence, figure pipelines, sweeps.
"""

from . import certificate, geometry, harness, metrics, model, objective, optimizer  # noqa: F401

__version__ = "0.1.0"
