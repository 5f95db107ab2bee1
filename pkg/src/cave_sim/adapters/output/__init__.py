"""Output adapters initialization."""
