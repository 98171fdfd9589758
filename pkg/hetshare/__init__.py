"""
.. include:: ../docs/templates/index.md
"""

__version__ = "0.1.0"
