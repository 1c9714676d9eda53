"""
Command-line interface for evcs-attack
"""

from .commands import cli

__all__ = ["cli"]
