"""Incremental dependency parsing by negotiating word actors."""
