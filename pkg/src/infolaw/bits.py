"""Bit strings and the small encodings shared by the rest of the package."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator


class MalformedCodeError(ValueError):
    """A bit sequence does not contain a complete, well-formed code."""


@dataclass(frozen=True, slots=True)
class BitString:
    """Immutable finite sequence of bits.

    Stored as a ``str`` of ``'0'``/``'1'`` characters, which keeps hashing,
    slicing and concatenation cheap. Text form (files, CLI) is ``'b'``
    followed by the bits, so the empty string is written ``b``.
    """

    bits: str = ""

    def __post_init__(self):
        if not isinstance(self.bits, str):
            raise TypeError("bits must be a str of '0'/'1'")
        if self.bits.strip("01"):
            raise ValueError(f"not a bit string: {self.bits!r}")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        """Inverse of :attr:`text`; a bare ``0``/``1`` string is accepted too."""
        text = text.strip()
        if text.startswith("b"):
            text = text[1:]
        return cls(text)

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        if value < 0 or length < 0 or value >> length:
            raise ValueError(f"{value} does not fit in {length} bits")
        return cls(format(value, "b").zfill(length) if length else "")

    @classmethod
    def from_iter(cls, bits: Iterable[int]) -> "BitString":
        return cls("".join("1" if b else "0" for b in bits))

    @property
    def text(self) -> str:
        return "b" + self.bits

    def to_int(self) -> int:
        return int(self.bits, 2) if self.bits else 0

    def sort_key(self) -> tuple[int, str]:
        """Shortlex order: by length, then lexicographically."""
        return len(self.bits), self.bits

    def __lt__(self, other: "BitString") -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return (1 if c == "1" else 0 for c in self.bits)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitString(self.bits[item])
        return 1 if self.bits[item] == "1" else 0

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString(self.bits + other.bits)

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"BitString({self.bits!r})"


EMPTY = BitString("")


def as_bits(x) -> BitString:
    """Coerce a ``BitString`` or a plain/``b``-prefixed str."""
    if isinstance(x, BitString):
        return x
    if isinstance(x, str):
        return BitString.parse(x)
    raise TypeError(f"cannot interpret {x!r} as a bit string")


def xor(x: BitString, y: BitString) -> BitString:
    if len(x) != len(y):
        raise ValueError(f"xor needs equal lengths, got {len(x)} and {len(y)}")
    return BitString("".join("1" if a != b else "0" for a, b in zip(x.bits, y.bits)))


def complement(x: BitString) -> BitString:
    return BitString(x.bits.translate(str.maketrans("01", "10")))


def gamma_encode(n: int) -> BitString:
    """Elias gamma code: floor(log2 n) zeros, then n in binary."""
    if n < 1:
        raise ValueError(f"gamma code needs n >= 1, got {n}")
    binary = format(n, "b")
    return BitString("0" * (len(binary) - 1) + binary)


def gamma_decode(s: BitString, start: int = 0) -> tuple[int, int]:
    """Decode one gamma code starting at ``start``; returns (n, bits consumed)."""
    bits = s.bits
    zeros = 0
    i = start
    while i < len(bits) and bits[i] == "0":
        zeros += 1
        i += 1
    end = i + zeros + 1
    if end > len(bits):
        raise MalformedCodeError(f"incomplete gamma code in {s.text} at offset {start}")
    return int(bits[i:end], 2), end - start


def delta_encode(n: int) -> BitString:
    """Elias delta code: gamma(bit length of n), then n without its leading 1."""
    if n < 1:
        raise ValueError(f"delta code needs n >= 1, got {n}")
    binary = format(n, "b")
    return gamma_encode(len(binary)) + BitString(binary[1:])


def delta_decode(s: BitString, start: int = 0) -> tuple[int, int]:
    width, used = gamma_decode(s, start)
    lo = start + used
    hi = lo + width - 1
    if hi > len(s):
        raise MalformedCodeError(f"incomplete delta code in {s.text} at offset {start}")
    return int("1" + s.bits[lo:hi], 2), hi - start


def pack_bytes(x: BitString) -> bytes:
    """Pad-count byte, then the bits MSB-first, zero padded to a whole byte."""
    pad = -len(x) % 8
    body = x.bits + "0" * pad
    return bytes([pad]) + bytes(int(body[i:i + 8], 2) for i in range(0, len(body), 8))


def unpack_bytes(data: bytes) -> BitString:
    if not data:
        raise MalformedCodeError("packed bit string has no pad byte")
    pad = data[0]
    if pad > 7:
        raise MalformedCodeError(f"pad count {pad} > 7")
    if pad and len(data) == 1:
        raise MalformedCodeError("pad count without payload")
    bits = "".join(format(b, "08b") for b in data[1:])
    return BitString(bits[:len(bits) - pad])


def strings_of_length(n: int) -> list[BitString]:
    return [BitString("".join(p)) for p in product("01", repeat=n)]


def strings_up_to(n: int) -> list[BitString]:
    """All bit strings of length 0..n in shortlex order."""
    return [s for k in range(n + 1) for s in strings_of_length(k)]
