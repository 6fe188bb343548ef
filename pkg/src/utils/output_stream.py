import logging
import sys
from typing import Optional

from tqdm import tqdm

# ---------------------------------------------
# UTILITY CLASSES
# ---------------------------------------------

class TqdmLoggingHandler(logging.Handler):
    """
    Logging handler that writes through tqdm so records do not break
    progress bars drawn on the same terminal.
    """

    def __init__(self, level: int = logging.NOTSET, stream: Optional[object] = None) -> None:
        """
        Initializes the handler.

        Args:
            level (int): Minimum level handled.
            stream (Optional[object]): Target file; stderr when None.
        """
        super().__init__(level)
        self.stream = stream

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.write(self.format(record), file=self.stream or sys.stderr)
            self.flush()
        except Exception:
            self.handleError(record)


def configure_logging(level: str = "INFO", fmt: Optional[str] = None) -> logging.Handler:
    """
    Route the root logger through a single TqdmLoggingHandler.

    Args:
        level (str): Level name.
        fmt (Optional[str]): Record format.

    Returns:
        logging.Handler: The installed handler.
    """
    handler = TqdmLoggingHandler()
    handler.setFormatter(logging.Formatter(fmt or "%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if isinstance(existing, TqdmLoggingHandler):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    return handler
