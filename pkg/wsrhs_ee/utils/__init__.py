"""
Utilities for WsRHS Energy Efficiency

Logging setup, the error hierarchy, unit conversions and array coercion.
"""
