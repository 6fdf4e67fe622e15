"""Transition labels shared by the reference and the clustered machine.

Every label has a compact text form used in LTS dumps, reports and trace
files, e.g. ``rdl(x,1,0)`` for a cache-hit read of ``x`` returning 1 on
thread 0, or ``cupd(0,1,x)`` for pushing ``x`` from cache 0 into cache 1.
System actions (``evict``, ``cupd``, ``supd``) are indexed by cache, and a
cache is identified by the id of the cluster that owns it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

__all__ = [
    "RefRead", "RefWrite", "LocalRead", "StoreRead", "PullRead", "LocalWrite",
    "Tau", "LockAcq", "LockRel", "Evict", "CacheUpd", "StoreUpd", "Reconf",
    "READ", "WRITE", "ACQUIRE", "RELEASE", "UNOBSERVABLE",
    "action_class", "observable_key", "is_system", "is_program",
    "format_action", "parse_action", "parse_trace", "format_trace",
]

READ = "read"
WRITE = "write"
ACQUIRE = "acquire"
RELEASE = "release"
UNOBSERVABLE = "unobservable"


@dataclass(frozen=True)
class RefRead:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class RefWrite:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class LocalRead:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class StoreRead:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class PullRead:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class LocalWrite:
    var: str
    value: int
    thread: int


@dataclass(frozen=True)
class Tau:
    thread: int


@dataclass(frozen=True)
class LockAcq:
    lock: str
    thread: int


@dataclass(frozen=True)
class LockRel:
    lock: str
    thread: int


@dataclass(frozen=True)
class Evict:
    cache: int
    var: str


@dataclass(frozen=True)
class CacheUpd:
    src: int
    dst: int
    var: str


@dataclass(frozen=True)
class StoreUpd:
    cache: int
    var: str


@dataclass(frozen=True)
class Reconf:
    source: object  # Clustering
    target: object


_READS = (RefRead, LocalRead, StoreRead, PullRead)
_WRITES = (RefWrite, LocalWrite)
_SYSTEM = (Evict, CacheUpd, StoreUpd)


def action_class(a, locks_observable: bool = True) -> str:
    """Functional-equivalence class of an action."""
    if isinstance(a, _READS):
        return READ
    if isinstance(a, _WRITES):
        return WRITE
    if locks_observable and isinstance(a, LockAcq):
        return ACQUIRE
    if locks_observable and isinstance(a, LockRel):
        return RELEASE
    return UNOBSERVABLE


def observable_key(a, locks_observable: bool = True):
    """Observable content of ``a`` up to functional equivalence, or None.

    Two observable actions are functionally equivalent exactly when their keys
    are equal: same class, variable (or lock), value and thread.
    """
    cls = action_class(a, locks_observable)
    if cls == READ or cls == WRITE:
        return (cls, a.var, a.value, a.thread)
    if cls == UNOBSERVABLE:
        return None
    return (cls, a.lock, a.thread)


def is_system(a) -> bool:
    return isinstance(a, _SYSTEM)


def is_program(a) -> bool:
    """Programmed transitions advance some thread's pc."""
    return not isinstance(a, _SYSTEM + (Reconf,))


_NAMES = {
    RefRead: "rd", RefWrite: "wr", LocalRead: "rdl", StoreRead: "rds",
    PullRead: "rdp", LocalWrite: "wrl", Tau: "tau", LockAcq: "acq",
    LockRel: "rel", Evict: "evict", CacheUpd: "cupd", StoreUpd: "supd",
    Reconf: "reconf",
}
_BY_NAME = {v: k for k, v in _NAMES.items()}


def format_action(a) -> str:
    name = _NAMES[type(a)]
    if isinstance(a, Reconf):
        return f"reconf({a.source}->{a.target})"
    if isinstance(a, _READS + _WRITES):
        args = (a.var, a.value, a.thread)
    elif isinstance(a, Tau):
        args = (a.thread,)
    elif isinstance(a, (LockAcq, LockRel)):
        args = (a.lock, a.thread)
    elif isinstance(a, CacheUpd):
        args = (a.src, a.dst, a.var)
    else:
        args = (a.cache, a.var)
    return f"{name}({','.join(map(str, args))})"


_CALL = re.compile(r"\s*([a-z]+)\((.*)\)\s*\Z")


def parse_action(text: str, num_cores: int | None = None):
    """Inverse of :func:`format_action`.

    ``num_cores`` is only needed for ``reconf`` labels; by default it is taken
    from the largest core id mentioned.
    """
    from .clustering import parse_clustering

    m = _CALL.match(text)
    if not m or m.group(1) not in _BY_NAME:
        raise ParseError(f"cannot parse action {text.strip()!r}")
    cls = _BY_NAME[m.group(1)]
    body = m.group(2)
    if cls is Reconf:
        src, sep, dst = body.partition("->")
        if not sep:
            raise ParseError(f"reconf needs 'Q->Q2': {text.strip()!r}")
        if num_cores is None:
            cores = [int(c) for c in re.findall(r"\d+", body)]
            num_cores = max(cores) + 1 if cores else 0
        return Reconf(parse_clustering(src, num_cores), parse_clustering(dst, num_cores))
    args = [s.strip() for s in body.split(",")] if body.strip() else []
    try:
        if cls in _READS + _WRITES:
            var, value, thread = args
            return cls(var, int(value), int(thread))
        if cls is Tau:
            (thread,) = args
            return Tau(int(thread))
        if cls in (LockAcq, LockRel):
            lock, thread = args
            return cls(lock, int(thread))
        if cls is CacheUpd:
            src, dst, var = args
            return CacheUpd(int(src), int(dst), var)
        cache, var = args
        return cls(int(cache), var)
    except ValueError:
        raise ParseError(f"bad operands in action {text.strip()!r}") from None


def parse_trace(text: str, num_cores: int | None = None) -> list:
    """One action per line; ``#`` starts a comment; a trailing cost column is ignored."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label = line.split()[0]
        try:
            out.append(parse_action(label, num_cores))
        except ParseError as exc:
            raise ParseError(exc.message, lineno) from None
    return out


def format_trace(actions) -> str:
    return "".join(format_action(a) + "\n" for a in actions)
