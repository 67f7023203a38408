"""Canonical signed digit recoding, the baseline for shift-add costs."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CsdForm:
    digits: str  # over "+0-", most significant first
    value: int

    @property
    def nonzero(self) -> int:
        return len(self.digits) - self.digits.count("0")

    @property
    def adders(self) -> int:
        return self.nonzero - 1

    def terms(self) -> list[tuple[int, int]]:
        """(sign, bit position) pairs, most significant first."""
        top = len(self.digits) - 1
        return [(1 if d == "+" else -1, top - i) for i, d in enumerate(self.digits) if d != "0"]


def csd_recode(c: int) -> CsdForm:
    if c < 1:
        raise ValueError(f"constant must be positive, got {c}")
    digits = []
    x = c
    while x:
        if x & 1:
            d = 2 - (x & 3)  # +1 when x = 1 mod 4, -1 when x = 3 mod 4
            x -= d
            digits.append("+" if d == 1 else "-")
        else:
            digits.append("0")
        x >>= 1
    return CsdForm("".join(reversed(digits)), c)


def csd_weight(c: int) -> int:
    """Nonzero CSD digits of c, via the x ^ 3x identity."""
    return bin(c ^ (3 * c)).count("1")


def csd_cost(c: int) -> int:
    return csd_weight(c) - 1


def binary_cost(c: int) -> int:
    return bin(c).count("1") - 1


def odd_part(c: int) -> tuple[int, int]:
    """(odd, shift) with c == odd << shift."""
    if c < 1:
        raise ValueError(f"constant must be positive, got {c}")
    s = (c & -c).bit_length() - 1
    return c >> s, s
