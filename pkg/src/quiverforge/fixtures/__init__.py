"""Bundled quiver documents with expectation blocks."""
