"""Bounded Kolmogorov complexity, information distance, and the exponential
law of generalization, computed exactly on a small reference machine."""

from .bits import BitString, complement, gamma_decode, gamma_encode, pack_bytes, unpack_bytes, xor
from .enumerator import ComplexityTable, build_table, enumerate_programs, k_cond, k_plain, kraft_sum
from .machine import UPM1, UPM2, encode_condition, execute

__all__ = [
    "BitString", "complement", "gamma_decode", "gamma_encode", "pack_bytes", "unpack_bytes", "xor",
    "ComplexityTable", "build_table", "enumerate_programs", "k_cond", "k_plain", "kraft_sum",
    "UPM1", "UPM2", "encode_condition", "execute",
]

__version__ = "0.1.0"
