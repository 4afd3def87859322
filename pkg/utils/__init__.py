"""Shared error types and report formatting"""
from .errors import LipAuthError
