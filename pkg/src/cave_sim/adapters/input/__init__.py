"""Input adapters initialization."""
