"""Gridworld simulator and evaluation harness for language-guided
zero-shot object navigation."""

__version__ = "0.1.0"
