"""Result file store."""
