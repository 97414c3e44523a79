"""Command handlers for the bsca command line."""
