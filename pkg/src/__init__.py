"""
DLES Morphology - colour mathematical morphology via the log-exp-supremum
"""

__version__ = "1.0.0"
__author__ = "DLES Morphology Team"
