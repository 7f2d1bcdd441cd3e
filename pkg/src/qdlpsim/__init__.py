"""Desk-scale simulator for quantum secret-key encryption over the quantum
discrete logarithm problem."""

from .errors import QDLPError
from .modmath import GeneralParams, Params
from .protocol import Message, SecretKey, SessionTranscript, run_session, run_session_general
from .qstate import ChannelView, JointState, ModularMap, Party, SeededRandom

__all__ = [
    "ChannelView",
    "GeneralParams",
    "JointState",
    "Message",
    "ModularMap",
    "Params",
    "Party",
    "QDLPError",
    "SecretKey",
    "SeededRandom",
    "SessionTranscript",
    "run_session",
    "run_session_general",
]

__version__ = "0.1.0"
