"""Reference-free evaluation of QA over legal documents via tagged legal data points."""

__version__ = "0.1.0"
