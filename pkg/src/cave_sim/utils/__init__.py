"""Utilities module initialization."""
