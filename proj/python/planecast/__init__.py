"""Plane-Casting 3D cursor control: kinematics, docking-task harness and statistics."""

from ._planecast import *  # noqa: F401,F403
from ._planecast import wire  # noqa: F401

__version__ = "0.1.0"
