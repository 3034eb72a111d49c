"""Database models."""

from app.models.run import Run

__all__ = ['Run']
