"""
Report writers
"""

from .exporter import ReportBundle, fmt, sha256_of

__all__ = ["ReportBundle", "fmt", "sha256_of"]
