"""Weighted matching in random-order streams and the robust communication model."""
