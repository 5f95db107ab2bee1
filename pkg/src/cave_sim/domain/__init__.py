"""Domain module initialization."""
