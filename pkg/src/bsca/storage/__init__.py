"""Result storage for BSCA runs."""
