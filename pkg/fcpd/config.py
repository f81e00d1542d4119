"""
Runtime configuration

Values come from the environment, optionally seeded by an ``fcpd.env`` file at
the repository root. They are read at call time so tests and long running
services can change them without reimporting.
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '..', 'fcpd.env'))

MAX_THREADS = 16


def get_cache_dir() -> str:
    """Directory for the critical value cache and the default SQLite database"""
    cache_dir = os.getenv('FCPD_CACHE_DIR', os.path.join(os.path.expanduser('~'), '.cache', 'fcpd'))
    os.makedirs(cache_dir, exist_ok=True)
    return cache_dir


def get_database_url() -> str:
    url = os.getenv('FCPD_DATABASE_URL')
    if url:
        return url
    return f"sqlite:///{os.path.join(get_cache_dir(), 'fcpd.sqlite')}"


def get_threads() -> int:
    try:
        threads = int(os.getenv('FCPD_THREADS', '4'))
    except ValueError:
        threads = 4
    # Cap to prevent resource exhaustion
    return max(1, min(threads, MAX_THREADS))


def get_log_level() -> str:
    return os.getenv('FCPD_LOG_LEVEL', 'INFO').upper()
