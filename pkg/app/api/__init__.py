"""Command surface, services and result storage."""
