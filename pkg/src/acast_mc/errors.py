"""Exception shared by the specification and formula front ends."""

from __future__ import annotations

from typing import Optional


class SpecError(Exception):
    """A problem with a specification source, optionally carrying a position."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.message = message
        self.line = line
        self.col = col
        where = "" if line is None else f"{line}: " if col is None else f"{line}:{col}: "
        super().__init__(where + message)
