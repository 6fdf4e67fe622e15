from collections.abc import Mapping


class FrozenMap(Mapping):
    """Immutable, hashable mapping with sorted-key iteration.

    Used for stores, caches and lock tables inside machine states, which must
    be usable as dictionary keys during exploration.
    """

    __slots__ = ("_d", "_hash")

    def __init__(self, items=()):
        d = dict(items)
        self._d = {k: d[k] for k in sorted(d)}
        self._hash = None

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, FrozenMap):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def __repr__(self):
        return f"FrozenMap({self._d!r})"

    def set(self, key, value):
        d = dict(self._d)
        d[key] = value
        return FrozenMap(d)

    def remove(self, key):
        d = dict(self._d)
        del d[key]
        return FrozenMap(d)
