"""Cluster configurations as partitions of core identifiers.

Accepted syntax: ``k(c1,...,ck)`` (contiguous cores per cluster), ``smp``,
``cmp``, or an explicit partition such as ``{0,2}{1,3}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

__all__ = [
    "Clustering", "parse_clustering", "smp", "cmp", "from_sizes",
    "same_cluster", "refines", "all_clusterings",
]


@dataclass(frozen=True)
class Clustering:
    """A partition of cores ``0..num_cores-1``.

    ``clusters`` is kept in canonical order (by smallest member), so the
    cluster id of a core is stable for a given partition.
    """

    num_cores: int
    clusters: tuple

    def __post_init__(self):
        blocks = [frozenset(b) for b in self.clusters]
        if any(not b for b in blocks):
            raise ValueError("clusters must be nonempty")
        members = [c for b in blocks for c in b]
        if len(members) != len(set(members)):
            raise ValueError("clusters overlap")
        if set(members) != set(range(self.num_cores)):
            raise ValueError(f"clusters do not cover cores 0..{self.num_cores - 1}")
        object.__setattr__(self, "clusters", tuple(sorted(blocks, key=min)))
        owner = [0] * self.num_cores
        for cid, block in enumerate(self.clusters):
            for core in block:
                owner[core] = cid
        object.__setattr__(self, "_owner", tuple(owner))

    @property
    def cluster_of(self) -> tuple:
        """Cluster id of each core."""
        return self._owner

    @property
    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.clusters)

    def __len__(self):
        return len(self.clusters)

    def __str__(self):
        return "".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.clusters)

    def notation(self) -> str:
        """``k(c1,...,ck)`` when the partition is contiguous, else the explicit form."""
        if from_sizes(self.sizes, self.num_cores) == self:
            return f"{len(self.clusters)}({','.join(map(str, self.sizes))})"
        return str(self)


def from_sizes(sizes, n: int) -> Clustering:
    clusters = []
    start = 0
    for c in sizes:
        clusters.append(frozenset(range(start, start + c)))
        start += c
    return Clustering(n, tuple(clusters))


def smp(n: int) -> Clustering:
    return Clustering(n, tuple(frozenset([i]) for i in range(n)))


def cmp(n: int) -> Clustering:
    return Clustering(n, (frozenset(range(n)),) if n else ())


_SIZES = re.compile(r"(\d+)\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)\Z")
_EXPLICIT = re.compile(r"(\{\s*\d+(?:\s*,\s*\d+)*\s*\})+\Z")


def parse_clustering(text: str, n: int) -> Clustering:
    s = text.strip()
    if s.lower() == "smp":
        return smp(n)
    if s.lower() == "cmp":
        return cmp(n)
    m = _SIZES.match(s)
    if m:
        k = int(m.group(1))
        sizes = [int(c) for c in m.group(2).split(",")]
        if k != len(sizes):
            raise ParseError(f"{s}: declares {k} clusters but lists {len(sizes)}")
        if any(c == 0 for c in sizes):
            raise ParseError(f"{s}: empty cluster")
        if sum(sizes) != n:
            raise ParseError(f"{s}: cluster sizes sum to {sum(sizes)}, expected {n}")
        return from_sizes(sizes, n)
    if _EXPLICIT.match(s):
        blocks = [frozenset(int(c) for c in b.split(","))
                  for b in re.findall(r"\{([^}]*)\}", s)]
        try:
            return Clustering(n, tuple(blocks))
        except ValueError as exc:
            raise ParseError(f"{s}: {exc}") from None
    raise ParseError(f"cannot parse clustering {text!r}")


def _check_core(q: Clustering, i: int):
    if not 0 <= i < q.num_cores:
        raise IndexError(f"core {i} out of range for {q.num_cores} cores")


def same_cluster(q: Clustering, i: int, j: int) -> bool:
    _check_core(q, i)
    _check_core(q, j)
    owner = q.cluster_of
    return owner[i] == owner[j]


def refines(q: Clustering, q_prime: Clustering) -> bool:
    """True iff every cluster of ``q`` lies inside some cluster of ``q_prime``."""
    if q.num_cores != q_prime.num_cores:
        raise ValueError(f"core counts differ: {q.num_cores} vs {q_prime.num_cores}")
    owner = q_prime.cluster_of
    return all(len({owner[c] for c in block}) == 1 for block in q.clusters)


def all_clusterings(n: int):
    """Every partition of ``n`` cores (Bell(n) of them), in a fixed order."""

    def go(i, blocks):
        if i == n:
            yield Clustering(n, tuple(frozenset(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            yield from go(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from go(i + 1, blocks)
        blocks.pop()

    yield from go(0, [])
