"""
Runtime configuration.
Environment-driven settings for logging verbosity and worker limits.
"""

import os
from typing import Final

from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL: Final[str] = os.getenv('OVFORMER_LOG', 'info').lower()
LOG_FORMAT: Final[str] = '%(asctime)s %(levelname)s %(name)s: %(message)s'
LOG_LEVELS: Final[tuple] = ('error', 'info', 'debug')

# Workers
DEFAULT_THREADS: Final[int] = int(os.getenv('OVFORMER_THREADS', 1))
