"""Service implementations for the bsca package."""
