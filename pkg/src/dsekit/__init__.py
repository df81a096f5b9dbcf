"""dsekit: optimizers, indicators and experiment tooling for data-driven SBSE."""

__version__ = "0.1.0"
