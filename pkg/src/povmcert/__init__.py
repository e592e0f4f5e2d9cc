"""Certifying irreducible (nonprojective) measurements from Bell-type data."""
from . import expsim, npa, qcore, sagnac, scenarios, sdp, seesaw

__all__ = ["expsim", "npa", "qcore", "sagnac", "scenarios", "sdp", "seesaw"]
