"""
Tests for the sparls library.
"""
