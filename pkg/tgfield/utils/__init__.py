"""Utilities package."""
from .file_manager import FileManager
from .registry_parser import RegistryKey, RegistryParser

__all__ = [
    "FileManager",
    "RegistryKey",
    "RegistryParser",
]
