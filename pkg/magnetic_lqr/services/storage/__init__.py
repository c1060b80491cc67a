"""Schedule files, CSV export and plots."""
