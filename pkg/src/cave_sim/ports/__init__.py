"""Ports module initialization."""
