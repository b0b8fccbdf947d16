"""Exact routing and link scheduling for slotted-time wireless mesh networks."""

__version__ = "0.1.0"
