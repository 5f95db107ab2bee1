"""Adapters module initialization."""
