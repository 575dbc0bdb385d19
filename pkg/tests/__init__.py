"""
Test suite for DLES Morphology
"""
