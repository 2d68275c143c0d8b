"""Random walks and diffusions on symmetric cones."""

__version__ = "0.1.0"
