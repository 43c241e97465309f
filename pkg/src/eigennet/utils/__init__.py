"""
Utility helpers for eigennet.
"""
