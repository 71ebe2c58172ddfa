"""Semantic URI bindings and the sameAs equivalence relation.

Two parameters are semantically equal when they carry the same URI or when their
URIs are connected through a chain of sameAs assertions. Assertions are
append-only: ``assert_same_as`` returns a new registry, leaving the old one
untouched, so registry versions can be shared across concurrent readers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Protocol

from .errors import MissingUri


class HasUri(Protocol):
    uri: str


def _normalize(pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    return frozenset((min(a, b), max(a, b)) for a, b in pairs)


@dataclass(frozen=True)
class EquivalenceRegistry:
    """sameAs assertions with symmetric-transitive-reflexive closure semantics."""

    uris: frozenset[str] = frozenset()
    assertions: frozenset[tuple[str, str]] = frozenset()

    @classmethod
    def from_assertions(
        cls, pairs: Iterable[tuple[str, str]], uris: Iterable[str] = ()
    ) -> "EquivalenceRegistry":
        pairs = _normalize(pairs)
        known = set(uris)
        for a, b in pairs:
            if not a or not b:
                raise MissingUri("sameAs assertion contains an empty URI")
            known.add(a)
            known.add(b)
        return cls(uris=frozenset(known), assertions=pairs)

    def assert_same_as(self, u1: str, u2: str) -> "EquivalenceRegistry":
        """Record u1 sameAs u2; unknown URIs are auto-registered. Order-insensitive."""
        if not u1 or not u2:
            raise MissingUri("cannot assert equivalence of an empty URI")
        if u1 == u2:
            return EquivalenceRegistry(self.uris | {u1}, self.assertions)
        pair = (min(u1, u2), max(u1, u2))
        return EquivalenceRegistry(self.uris | {u1, u2}, self.assertions | {pair})

    @cached_property
    def _root(self) -> dict[str, str]:
        # Plain union-find; path compression applied during the single build pass.
        parent: dict[str, str] = {u: u for u in self.uris}

        def find(u: str) -> str:
            path = []
            while parent[u] != u:
                path.append(u)
                u = parent[u]
            for v in path:
                parent[v] = u
            return u

        for a, b in sorted(self.assertions):
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return {u: find(u) for u in parent}

    @cached_property
    def classes(self) -> tuple[frozenset[str], ...]:
        """The partition of registered URIs into equivalence classes."""
        groups: dict[str, set[str]] = {}
        for u in self.uris:
            groups.setdefault(self._root.get(u, u), set()).add(u)
        return tuple(sorted((frozenset(g) for g in groups.values()), key=sorted))

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def equal(self, u1: str, u2: str) -> bool:
        """True iff the URIs are identical or sameAs-connected."""
        if not u1 or not u2:
            raise MissingUri("cannot compare an empty URI")
        if u1 == u2:
            return True
        return self._root.get(u1, u1) == self._root.get(u2, u2)


def semantically_equal(registry: EquivalenceRegistry, p1: HasUri, p2: HasUri) -> bool:
    """Semantic equality of two URI-bearing parameters."""
    if not getattr(p1, "uri", None) or not getattr(p2, "uri", None):
        raise MissingUri("parameter lacks a semantic URI binding")
    return registry.equal(p1.uri, p2.uri)
