"""Semi-structured table QA over hierarchical orthogonal trees."""

__version__ = "0.1.0"
