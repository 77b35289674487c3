"""Context profiling, classification and context-aware access control."""
__version__ = "0.1.0"
