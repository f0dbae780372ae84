"""FastAPI service wrapping the simulation engine."""

from .app import create_app

__all__ = ["create_app"]
