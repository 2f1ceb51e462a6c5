"""Reference universal prefix machines UPM-1 and UPM-2.

Two unbounded counters ``A`` and ``B``, a read-only input tape, an output
bit sequence, and a program that is decoded lazily: the next 3-bit opcode
(plus a self-delimiting operand for ``JNZ``) is read only when the
instruction pointer reaches an undecoded index. Jumps go backwards only, so
a halting run never looks past its last consumed bit and the set of halting
programs is prefix-free.

This module holds the bit-level reference executor. The enumerator uses a
compiled kernel with identical semantics (see ``_kernel``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .bits import EMPTY, BitString, as_bits, gamma_encode

HALT, OUT0, OUT1, READ, INC, DEC, JNZ, SWP = range(8)
OP_NAMES = ("HALT", "OUT0", "OUT1", "READ", "INC", "DEC", "JNZ", "SWP")


class UnknownMachineError(KeyError):
    pass


@dataclass(frozen=True)
class MachineSpec:
    machine_id: str
    opcode_table: tuple[int, ...]  # 3-bit code -> instruction
    jump_operand_code: str  # "gamma" or "delta"

    def __post_init__(self):
        if sorted(self.opcode_table) != list(range(8)):
            raise ValueError("opcode table must be a bijection on 3-bit codes")
        if self.jump_operand_code not in ("gamma", "delta"):
            raise ValueError(f"unknown operand code {self.jump_operand_code!r}")

    def code_of(self, op: int) -> int:
        return self.opcode_table.index(op)


UPM1 = MachineSpec("UPM-1", (HALT, OUT0, OUT1, READ, INC, DEC, JNZ, SWP), "gamma")
UPM2 = MachineSpec("UPM-2", (SWP, JNZ, DEC, INC, READ, OUT1, OUT0, HALT), "delta")
MACHINES = {m.machine_id: m for m in (UPM1, UPM2)}


def get_machine(machine) -> MachineSpec:
    if isinstance(machine, MachineSpec):
        return machine
    try:
        return MACHINES[machine]
    except KeyError:
        raise UnknownMachineError(f"unknown machine id {machine!r}") from None


class Status(str, enum.Enum):
    HALTED = "halted"
    INVALID = "invalid"
    BUDGET_EXHAUSTED = "budget_exhausted"
    NEEDS_PROGRAM_BIT = "needs_program_bit"


@dataclass(frozen=True)
class ExecutionOutcome:
    status: Status
    output: BitString
    consumed_program: BitString
    steps_used: int

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED


def encode_condition(x) -> BitString:
    """Input-tape contents for a run conditioned on ``x``."""
    x = as_bits(x)
    return gamma_encode(len(x) + 1) + x


class _OutOfBits(Exception):
    pass


class _ProgramReader:
    def __init__(self, program: str):
        self.program = program
        self.pos = 0

    def bit(self) -> int:
        if self.pos >= len(self.program):
            raise _OutOfBits
        b = self.program[self.pos]
        self.pos += 1
        return 1 if b == "1" else 0

    def gamma(self) -> int:
        zeros = 0
        while self.bit() == 0:
            zeros += 1
        n = 1
        for _ in range(zeros):
            n = 2 * n + self.bit()
        return n

    def delta(self) -> int:
        width = self.gamma()
        n = 1
        for _ in range(width - 1):
            n = 2 * n + self.bit()
        return n


def execute(machine, program, condition=EMPTY, step_budget: int = 4096) -> ExecutionOutcome:
    """Run ``program`` with ``encode_condition(condition)`` on the input tape.

    Every executed instruction, HALT included, costs one step. Failures are
    reported in ``status``, never raised.
    """
    spec = get_machine(machine)
    if step_budget < 1:
        raise ValueError("step budget must be >= 1")
    program = as_bits(program)
    tape = encode_condition(condition).bits
    reader = _ProgramReader(program.bits)
    operand = reader.gamma if spec.jump_operand_code == "gamma" else reader.delta

    decoded: list[tuple[int, int]] = []
    a = b = 0
    ip = 0
    head = 0
    out: list[str] = []
    steps = 0

    def outcome(status: Status) -> ExecutionOutcome:
        return ExecutionOutcome(status, BitString("".join(out)),
                                BitString(program.bits[:reader.pos]), steps)

    while True:
        if ip == len(decoded):
            try:
                code = (reader.bit() << 2) | (reader.bit() << 1) | reader.bit()
                op = spec.opcode_table[code]
                decoded.append((op, operand() if op == JNZ else 0))
            except _OutOfBits:
                return outcome(Status.NEEDS_PROGRAM_BIT)
        if steps >= step_budget:
            return outcome(Status.BUDGET_EXHAUSTED)
        steps += 1
        op, arg = decoded[ip]
        if op == HALT:
            return outcome(Status.HALTED)
        elif op == OUT0:
            out.append("0")
        elif op == OUT1:
            out.append("1")
        elif op == READ:
            if head >= len(tape):
                return outcome(Status.INVALID)
            a = 2 * a + (tape[head] == "1")
            head += 1
        elif op == INC:
            a += 1
        elif op == DEC:
            a = max(a - 1, 0)
        elif op == JNZ:
            if a != 0:
                if ip - arg < 0:
                    return outcome(Status.INVALID)
                ip -= arg
                continue
        elif op == SWP:
            a, b = b, a
        ip += 1
