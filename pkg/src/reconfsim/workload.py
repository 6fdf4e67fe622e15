"""Straight-line thread workloads and their line-oriented text format.

A workload file looks like::

    # store buffering
    cores 2
    init x=0 y=0
    thread 0:
      write x 1
      read y
    thread 1:
      write y 1
      read x

Instructions may also follow the colon on the same line, separated by ``;``.
Lock variables must be declared on a ``locks`` line and may not share a name
with a data variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ._fmap import FrozenMap
from .errors import ParseError

__all__ = [
    "Read", "Write", "Compute", "Lock", "Unlock", "Instruction",
    "Thread", "Workload", "parse_workload", "render_workload", "load_workload",
]

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
INT = re.compile(r"[+-]?\d+\Z")


@dataclass(frozen=True)
class Read:
    var: str

    def __str__(self):
        return f"read {self.var}"


@dataclass(frozen=True)
class Write:
    var: str
    value: int

    def __str__(self):
        return f"write {self.var} {self.value}"


@dataclass(frozen=True)
class Compute:
    def __str__(self):
        return "compute"


@dataclass(frozen=True)
class Lock:
    lockvar: str

    def __str__(self):
        return f"lock {self.lockvar}"


@dataclass(frozen=True)
class Unlock:
    lockvar: str

    def __str__(self):
        return f"unlock {self.lockvar}"


Instruction = Read | Write | Compute | Lock | Unlock


@dataclass(frozen=True)
class Thread:
    core: int
    program: tuple = ()
    pc: int = 0

    @property
    def terminated(self) -> bool:
        return self.pc >= len(self.program)

    @property
    def next_instruction(self):
        """The redex, or None once the thread has terminated."""
        if self.pc < len(self.program):
            return self.program[self.pc]
        return None

    def advance(self) -> Thread:
        return Thread(self.core, self.program, self.pc + 1)


@dataclass(frozen=True)
class Workload:
    num_cores: int
    init_store: FrozenMap
    threads: tuple
    locks: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.init_store, FrozenMap):
            object.__setattr__(self, "init_store", FrozenMap(self.init_store))
        object.__setattr__(self, "threads", tuple(self.threads))
        object.__setattr__(self, "locks", tuple(sorted(set(self.locks))))
        if self.num_cores < 0:
            raise ValueError("negative core count")
        if len(self.threads) != self.num_cores:
            raise ValueError(f"expected {self.num_cores} threads, got {len(self.threads)}")
        clash = set(self.locks) & set(self.init_store)
        if clash:
            raise ValueError(f"names used both as variable and lock: {sorted(clash)}")
        for i, t in enumerate(self.threads):
            if t.core != i:
                raise ValueError(f"thread {i} is pinned to core {t.core}")
            if t.pc != 0:
                raise ValueError("workload threads must start at pc 0")
            for ins in t.program:
                if isinstance(ins, (Read, Write)) and ins.var not in self.init_store:
                    raise ValueError(f"variable {ins.var!r} missing from init store")
                if isinstance(ins, (Lock, Unlock)) and ins.lockvar not in self.locks:
                    raise ValueError(f"lock {ins.lockvar!r} not declared")

    @classmethod
    def build(cls, init, programs, locks=()) -> Workload:
        """Convenience constructor from a dict and a list of instruction lists."""
        threads = tuple(Thread(i, tuple(p)) for i, p in enumerate(programs))
        return cls(len(threads), FrozenMap(init), threads, tuple(locks))

    @property
    def variables(self) -> tuple:
        return tuple(self.init_store)

    @property
    def total_instructions(self) -> int:
        return sum(len(t.program) for t in self.threads)

    def __str__(self):
        return render_workload(self)


def _parse_instruction(tokens, lineno, col):
    op = tokens[0]
    args = tokens[1:]

    def need(n):
        if len(args) != n:
            raise ParseError(f"'{op}' takes {n} operand(s), got {len(args)}", lineno, col)

    def ident(tok):
        if not IDENT.match(tok):
            raise ParseError(f"bad identifier {tok!r}", lineno, col)
        return tok

    if op == "read":
        need(1)
        return Read(ident(args[0]))
    if op == "write":
        need(2)
        if not INT.match(args[1]):
            raise ParseError(f"write value must be an integer, got {args[1]!r}", lineno, col)
        return Write(ident(args[0]), int(args[1]))
    if op == "compute":
        need(0)
        return Compute()
    if op == "lock":
        need(1)
        return Lock(ident(args[0]))
    if op == "unlock":
        need(1)
        return Unlock(ident(args[0]))
    raise ParseError(f"unknown instruction {op!r}", lineno, col)


def parse_workload(text: str) -> Workload:
    num_cores = None
    init = {}
    locks = []
    programs = {}
    current = None
    uses = []  # (instruction, line, column) for post-hoc declaration checks

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        tokens = line.split()
        head = tokens[0]

        if head == "cores":
            if num_cores is not None:
                raise ParseError("duplicate 'cores' line", lineno, indent + 1)
            if len(tokens) != 2 or not INT.match(tokens[1]):
                raise ParseError("expected 'cores <N>'", lineno, indent + 1)
            num_cores = int(tokens[1])
            if num_cores < 0:
                raise ParseError("negative core count", lineno, indent + 7)
            current = None
            continue

        if num_cores is None:
            raise ParseError("workload must start with 'cores <N>'", lineno, indent + 1)

        if head == "init":
            for tok in tokens[1:]:
                name, eq, value = tok.partition("=")
                col = line.find(tok) + 1
                if not eq or not IDENT.match(name) or not INT.match(value):
                    raise ParseError(f"expected <var>=<int>, got {tok!r}", lineno, col)
                if name in init:
                    raise ParseError(f"variable {name!r} initialised twice", lineno, col)
                init[name] = int(value)
            current = None
        elif head == "locks":
            for tok in tokens[1:]:
                if not IDENT.match(tok):
                    raise ParseError(f"bad lock name {tok!r}", lineno, line.find(tok) + 1)
                locks.append(tok)
            current = None
        elif head == "thread":
            m = re.match(r"\s*thread\s+(-?\d+)\s*:(.*)\Z", line)
            if m is None:
                raise ParseError("expected 'thread <core-id>:'", lineno, indent + 1)
            core = int(m.group(1))
            if core < 0 or core >= num_cores:
                raise ParseError(f"core out of range: {core} (cores {num_cores})",
                                 lineno, m.start(1) + 1)
            if core in programs:
                raise ParseError(f"duplicate assignment of core {core}", lineno, m.start(1) + 1)
            programs[core] = []
            current = core
            rest = m.group(2)
            offset = m.start(2)
            for chunk in rest.split(";"):
                if chunk.strip():
                    col = offset + len(chunk) - len(chunk.lstrip()) + 1
                    ins = _parse_instruction(chunk.split(), lineno, col)
                    programs[core].append(ins)
                    uses.append((ins, lineno, col))
                offset += len(chunk) + 1
        else:
            if current is None:
                raise ParseError(f"unexpected {head!r} outside a thread block", lineno, indent + 1)
            offset = 0
            for chunk in line.split(";"):
                if chunk.strip():
                    col = offset + len(chunk) - len(chunk.lstrip()) + 1
                    ins = _parse_instruction(chunk.split(), lineno, col)
                    programs[current].append(ins)
                    uses.append((ins, lineno, col))
                offset += len(chunk) + 1

    if num_cores is None:
        raise ParseError("missing 'cores <N>' line")
    if len(set(locks)) != len(locks):
        raise ParseError("lock declared twice")
    clash = set(locks) & set(init)
    if clash:
        raise ParseError(f"names used both as variable and lock: {sorted(clash)}")
    for ins, lineno, col in uses:
        if isinstance(ins, (Read, Write)) and ins.var not in init:
            verb = "read" if isinstance(ins, Read) else "write"
            raise ParseError(f"{verb} of undeclared variable {ins.var!r}", lineno, col)
        if isinstance(ins, (Lock, Unlock)) and ins.lockvar not in locks:
            raise ParseError(f"undeclared lock {ins.lockvar!r}", lineno, col)

    threads = tuple(Thread(i, tuple(programs.get(i, ()))) for i in range(num_cores))
    return Workload(num_cores, FrozenMap(init), threads, tuple(locks))


def render_workload(w: Workload) -> str:
    lines = [f"cores {w.num_cores}"]
    lines.append(" ".join(["init"] + [f"{x}={v}" for x, v in w.init_store.items()]))
    if w.locks:
        lines.append(" ".join(["locks", *w.locks]))
    for t in w.threads:
        lines.append(f"thread {t.core}:")
        lines.extend(f"  {ins}" for ins in t.program)
    return "\n".join(lines) + "\n"


def load_workload(path) -> Workload:
    with open(path, encoding="utf-8") as fh:
        return parse_workload(fh.read())
