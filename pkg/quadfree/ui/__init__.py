"""Command-line interface for quadfree."""
