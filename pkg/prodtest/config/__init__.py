"""Configuration modules"""
from prodtest.config.settings import Settings, settings

__all__ = ["Settings", "settings"]
