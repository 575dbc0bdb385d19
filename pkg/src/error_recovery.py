"""
Error types and structured error logging for the colour morphology toolkit

Handles:
- Exception hierarchy shared by all modules
- Comprehensive error logging with structured format (JSONL)
"""

import logging
import json
from typing import Dict, Any, Optional, List
from pathlib import Path
from datetime import datetime

logger = logging.getLogger(__name__)


class MorphologyError(Exception):
    """Base class for all toolkit errors."""


class DomainError(MorphologyError, ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedFeatureError(MorphologyError):
    """The request needs a feature the toolkit deliberately does not offer."""


class NumericError(MorphologyError, ArithmeticError):
    """A numeric computation produced a non-finite result."""


class ImageIOError(MorphologyError, OSError):
    """Reading or writing an image or report failed."""


class ErrorLogger:
    """
    Structured error logging for debugging and reproducibility.
    """

    def __init__(self, log_dir: str = "output/logs"):
        """
        Initialize Error Logger.

        Args:
            log_dir: Directory for log files
        """
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

        # Create daily log file
        date_str = datetime.now().strftime("%Y%m%d")
        self.log_file = self.log_dir / f"errors_{date_str}.jsonl"

        logger.debug(f"Error Logger initialized (log_file={self.log_file.name})")

    def log_error(
        self,
        error_type: str,
        component: str,
        message: str,
        context: Optional[Dict[str, Any]] = None,
        severity: str = "ERROR"
    ) -> None:
        """
        Log a structured error entry.

        Args:
            error_type: Type of error (e.g., "DOMAIN_ERROR", "IMAGE_IO_ERROR")
            component: Component where error occurred (e.g., "cli.dilate")
            message: Error message
            context: Additional context information (arguments, paths)
            severity: Error severity (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        """
        error_entry = {
            "timestamp": datetime.now().isoformat(),
            "error_type": error_type,
            "severity": severity,
            "component": component,
            "message": message,
            "context": context or {},
        }

        try:
            # Append to JSONL file (one JSON object per line)
            with open(self.log_file, 'a', encoding='utf-8') as f:
                f.write(json.dumps(error_entry, default=str) + '\n')

            log_func = getattr(logger, severity.lower(), logger.error)
            log_func(f"[{component}] {error_type}: {message}")

        except OSError as e:
            logger.error(f"Failed to write error log: {e}")

    def log_exception(self, component: str, exc: BaseException, context: Optional[Dict[str, Any]] = None) -> None:
        """Log an exception, deriving the error type from its class name."""
        error_type = _error_type_tag(exc)
        self.log_error(error_type, component, str(exc), context=context)

    def get_recent_errors(self, count: int = 10) -> List[Dict[str, Any]]:
        """
        Get recent error entries.

        Args:
            count: Number of recent errors to retrieve

        Returns:
            List of error entries, oldest first
        """
        errors = []

        try:
            if self.log_file.exists():
                with open(self.log_file, 'r', encoding='utf-8') as f:
                    lines = f.readlines()

                recent_lines = lines[-count:] if len(lines) > count else lines

                for line in recent_lines:
                    try:
                        errors.append(json.loads(line))
                    except json.JSONDecodeError:
                        continue

        except OSError as e:
            logger.error(f"Failed to read error log: {e}")

        return errors


def _error_type_tag(exc: BaseException) -> str:
    """CamelCase exception name -> UPPER_SNAKE tag (ImageIOError -> IMAGE_IO_ERROR)."""
    name = type(exc).__name__
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0 and (name[i - 1].islower() or (i + 1 < len(name) and name[i + 1].islower())):
            out.append('_')
        out.append(ch.upper())
    return ''.join(out)


def create_error_logger(log_dir: str = "output/logs") -> ErrorLogger:
    """
    Create and initialize an Error Logger.

    Args:
        log_dir: Directory for log files

    Returns:
        Initialized ErrorLogger instance
    """
    return ErrorLogger(log_dir=log_dir)
