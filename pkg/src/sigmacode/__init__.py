"""Program-graph construction and self-supervised graph encoder training for MiniJ."""

__version__ = "0.1.0"
