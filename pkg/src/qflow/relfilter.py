"""Sets and relations: graph filters on ternary relations.

A filter keeps the triples whose chosen pair of coordinates lies on the
graph of a total function. Filters are intersections, so they commute.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass


@dataclass(frozen=True)
class FiniteSet:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"set size must be >= 1, got {self.size}")

    def __iter__(self):
        return iter(range(self.size))

    def __contains__(self, x):
        return isinstance(x, int) and 0 <= x < self.size


@dataclass(frozen=True)
class TripleRelation:
    sets: tuple[FiniteSet, FiniteSet, FiniteSet]
    members: frozenset[tuple[int, int, int]]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(tuple(m) for m in self.members))
        for m in self.members:
            if len(m) != 3 or not all(x in s for x, s in zip(m, self.sets)):
                raise ValueError(f"triple {m} is out of range for sizes {self.sizes}")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return tuple(s.size for s in self.sets)

    @classmethod
    def full(cls, sizes: Sequence[int]) -> "TripleRelation":
        sets = tuple(FiniteSet(n) for n in sizes)
        return cls(sets, frozenset(itertools.product(*(range(n) for n in sizes))))

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class GraphFilter:
    """Graph of ``fn`` (a table, ``fn[x]`` is the image of ``x``) on coordinates 1,2 or 2,3."""

    fn: tuple[int, ...]
    coords: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "fn", tuple(int(v) for v in self.fn))
        object.__setattr__(self, "coords", tuple(self.coords))
        if self.coords not in ((1, 2), (2, 3)):
            raise ValueError(f"coords must be (1, 2) or (2, 3), got {self.coords}")

    def check(self, sets: Sequence[FiniteSet]) -> None:
        dom, cod = sets[self.coords[0] - 1], sets[self.coords[1] - 1]
        if len(self.fn) != dom.size:
            raise ValueError(f"function table has {len(self.fn)} entries, domain has {dom.size}")
        if any(v not in cod for v in self.fn):
            raise ValueError(f"function values {self.fn} fall outside 0..{cod.size - 1}")

    def __call__(self, x: int) -> int:
        return self.fn[x]

    def passes(self, triple: tuple[int, int, int]) -> bool:
        i, j = self.coords
        return self.fn[triple[i - 1]] == triple[j - 1]


def filter_apply(rel: TripleRelation, flt: GraphFilter) -> TripleRelation:
    flt.check(rel.sets)
    return TripleRelation(rel.sets, frozenset(t for t in rel.members if flt.passes(t)))


def filters_commute_check(rel: TripleRelation, f1: GraphFilter, f2: GraphFilter) -> bool:
    return filter_apply(filter_apply(rel, f1), f2).members == filter_apply(filter_apply(rel, f2), f1).members


def relational_coecke(
    x: int, ys: Iterable[tuple[int, int]], f: Sequence[int], g: Sequence[int], sizes: Sequence[int]
) -> frozenset[tuple[int, int, int]]:
    """Run ``S = {x} x Y`` through the g-filter on (2,3), then the f-filter on (1,2).

    The survivors are either nothing or exactly ``(x, f(x), g(f(x)))``.
    """
    sets = tuple(FiniteSet(n) for n in sizes)
    rel = TripleRelation(sets, frozenset((x, y, z) for y, z in ys))
    gf, ff = GraphFilter(g, (2, 3)), GraphFilter(f, (1, 2))
    out = filter_apply(filter_apply(rel, gf), ff).members
    predicted = (x, ff(x), gf(ff(x)))
    if out and out != {predicted}:
        raise AssertionError(f"relational flow produced {sorted(out)}, expected {{{predicted}}}")
    return out


def all_functions(dom: int, cod: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(cod), repeat=dom)


def exhaustive_commutation(sizes: Sequence[int]) -> tuple[int, int]:
    """Check every pair of graph filters for the given set sizes.

    Filters decide membership triple by triple, so agreement on the full
    product (which contains every triple) implies agreement on every
    relation. Returns ``(pairs_checked, failures)``.
    """
    full = TripleRelation.full(sizes)
    filters = [GraphFilter(fn, (1, 2)) for fn in all_functions(sizes[0], sizes[1])]
    filters += [GraphFilter(fn, (2, 3)) for fn in all_functions(sizes[1], sizes[2])]
    once = [filter_apply(full, flt) for flt in filters]
    checked = failures = 0
    for a, b in itertools.combinations(range(len(filters)), 2):
        checked += 1
        ab = filter_apply(once[a], filters[b]).members
        ba = filter_apply(once[b], filters[a]).members
        failures += ab != ba
    return checked, failures
