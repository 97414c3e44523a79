"""SVG figures for BSCA results."""
