"""Model definitions for the bsca package."""
