"""Toolkit for detecting intent collisions across datasets and building merged corpora."""

__version__ = "0.1.0"
