"""Indicator-function majority vote over per-subcarrier predictions.

Class identifiers here are 1-based integers in 1..C, matching the bank's
predict output. counts[c-1] is the number of included subcarriers that voted
for class c; the winner is the argmax with ties broken toward the lowest
class index. A ChannelMask selects which subcarriers participate, so antenna
pruning experiments re-vote cached predictions instead of refitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelMask:
    """Which of the M subcarriers take part in the vote."""

    included: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "included", tuple(bool(v) for v in self.included))
        if not self.included:
            raise ValueError("mask has no channels")
        if not any(self.included):
            raise ValueError("mask excludes every channel")

    @property
    def num_channels(self) -> int:
        return len(self.included)

    @property
    def num_included(self) -> int:
        return sum(self.included)

    @classmethod
    def full(cls, num_channels: int) -> "ChannelMask":
        return cls(included=(True,) * num_channels)

    @classmethod
    def from_excluded(cls, num_channels: int, excluded) -> "ChannelMask":
        """Mask excluding the given 0-based channel indices."""
        dropped = set(int(i) for i in excluded)
        for i in dropped:
            if not 0 <= i < num_channels:
                raise ValueError(f"channel index {i} out of range 0..{num_channels - 1}")
        return cls(included=tuple(i not in dropped for i in range(num_channels)))

    @classmethod
    def antennas(cls, keep, num_channels: int, channels_per_antenna: int = 30) -> "ChannelMask":
        """Mask including only the 1-based antennas in ``keep``.

        Antenna a covers channels (a-1)*channels_per_antenna .. a*channels_per_antenna - 1.
        """
        keep = set(int(a) for a in keep)
        num_antennas = (num_channels + channels_per_antenna - 1) // channels_per_antenna
        for a in keep:
            if not 1 <= a <= num_antennas:
                raise ValueError(f"antenna {a} out of range 1..{num_antennas}")
        return cls(
            included=tuple(m // channels_per_antenna + 1 in keep for m in range(num_channels))
        )


def parse_mask(text: str, num_channels: int, channels_per_antenna: int = 30) -> ChannelMask:
    """Parse a mask from CLI text.

    Accepted forms: "all"; "antennas:1,2"; "channels:1-30,61-90" (1-based,
    inclusive ranges).
    """
    text = text.strip().lower()
    if text == "all":
        return ChannelMask.full(num_channels)
    if text.startswith("antennas:"):
        ids = [int(tok) for tok in text[len("antennas:"):].split(",") if tok.strip()]
        return ChannelMask.antennas(ids, num_channels, channels_per_antenna)
    if text.startswith("channels:"):
        included = [False] * num_channels
        for tok in text[len("channels:"):].split(","):
            tok = tok.strip()
            if not tok:
                continue
            lo, _, hi = tok.partition("-")
            a = int(lo)
            b = int(hi) if hi else a
            if not (1 <= a <= b <= num_channels):
                raise ValueError(f"channel range {tok!r} out of 1..{num_channels}")
            for m in range(a - 1, b):
                included[m] = True
        return ChannelMask(included=tuple(included))
    raise ValueError(
        f"cannot parse mask {text!r}: expected 'all', 'antennas:...', or 'channels:...'"
    )


@dataclass(frozen=True)
class VoteRecord:
    """Outcome of one vote: the raw ballots, tallies, and the winner."""

    per_subcarrier: tuple[int, ...]
    counts: tuple[int, ...]
    final: int


def vote(per_subcarrier, num_classes: int, mask: ChannelMask | None = None) -> VoteRecord:
    """Tally per-subcarrier predictions into a final class.

    per_subcarrier: M class identifiers in 1..num_classes. mask defaults to
    all channels included. counts[c-1] counts included subcarriers that said
    c; final is the smallest class achieving the maximum count.
    """
    preds = tuple(int(p) for p in per_subcarrier)
    if num_classes < 1:
        raise ValueError("num_classes must be >= 1")
    if not preds:
        raise ValueError("no per-subcarrier predictions to vote on")
    for m, p in enumerate(preds):
        if not 1 <= p <= num_classes:
            raise ValueError(f"prediction {p} at subcarrier {m} outside 1..{num_classes}")
    if mask is None:
        mask = ChannelMask.full(len(preds))
    if mask.num_channels != len(preds):
        raise ValueError(
            f"mask covers {mask.num_channels} channels but got {len(preds)} predictions"
        )
    counts = [0] * num_classes
    for p, inc in zip(preds, mask.included):
        if inc:
            counts[p - 1] += 1
    final = int(np.argmax(counts)) + 1
    return VoteRecord(per_subcarrier=preds, counts=tuple(counts), final=final)
