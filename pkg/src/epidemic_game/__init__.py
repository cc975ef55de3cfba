"""Repeated epidemic dissemination game: reliability, punishments, equilibrium checks."""

__version__ = "0.1.0"
