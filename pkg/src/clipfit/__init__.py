"""clipfit: importance-driven video summaries cropped to a target aspect ratio."""

__version__ = "0.1.0"
