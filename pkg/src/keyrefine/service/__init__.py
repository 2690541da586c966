"""HTTP annotation service: sessions, corrections, CVM, growth curves."""

from .app import create_app
from .store import SessionStore, SessionRecord, RoundRecord
from .sessions import SessionManager, replay_session

__all__ = [
    "create_app",
    "SessionStore",
    "SessionRecord",
    "RoundRecord",
    "SessionManager",
    "replay_session",
]
