"""Test suite for hypobound."""
