"""Test suite for tabgen."""
