"""Binary class labels.

Asphyxia is the positive class (+1) everywhere: SVM targets, verdicts,
confusion counts. Defining the sign once here prevents sign-flip bugs
between the trainer, the vote, and the metrics.
"""

from __future__ import annotations

import enum


class Label(enum.IntEnum):
    NORMAL = -1
    ASPHYXIA = +1

    @property
    def text(self) -> str:
        return "asphyxia" if self is Label.ASPHYXIA else "normal"

    @classmethod
    def from_text(cls, s: str) -> "Label":
        t = s.strip().lower()
        if t == "normal":
            return cls.NORMAL
        if t == "asphyxia":
            return cls.ASPHYXIA
        raise ValueError(f"unknown label {s!r} (expected 'normal' or 'asphyxia')")


POSITIVE = Label.ASPHYXIA
NEGATIVE = Label.NORMAL
