"""Smooth vector fields on R^11 whose finite-time blow-up encodes Turing machine halting."""

from importlib import resources

__version__ = "0.1.0"


def sample_path(name: str):
    """Path to a machine file shipped in ``haltflow/data``."""
    return resources.files(__name__).joinpath("data", name)
