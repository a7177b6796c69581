"""Graph contrastive learning with cumulative easy/medium/hard negative selection."""

__version__ = "0.1.0"
