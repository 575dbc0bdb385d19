"""
Configuration module for experiment presets
"""
