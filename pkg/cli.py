"""
Command-line entry point
========================
    python cli.py fit --data risk73 --method all
    python cli.py tables --which order-stats --format md
"""

import sys

from config import settings
from app.utils import setup_logging
from app.cli.commands import cmd_dispatch

if __name__ == "__main__":
    settings.validate()
    setup_logging()
    sys.exit(cmd_dispatch(sys.argv[1:]))
