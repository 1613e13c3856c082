"""Tools unit tests."""
