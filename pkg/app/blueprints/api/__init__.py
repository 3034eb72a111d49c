"""API blueprint package."""
