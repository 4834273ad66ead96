from __future__ import annotations

import logging
from fractions import Fraction
from typing import FrozenSet, Iterable, Iterator, List, Optional

from .errors import UnsupportedSpace
from .spaces import Cell, Label, SpaceDescriptor

logger = logging.getLogger(__name__)


class Region:
    """A finite union of cells, kept without redundant members.

    Every set operation is exact: cells of an ultrametric space are either
    nested or disjoint, so all decisions reduce to comparing representatives.
    """

    def __init__(self, space: SpaceDescriptor, cells: Iterable[Cell] = ()):
        self.space = space
        self.cells: FrozenSet[Cell] = frozenset(self._normalize(cells))
        self._index()

    def _index(self):
        self.min_depth = min((c.depth for c in self.cells), default=0)
        self.max_depth = max((c.depth for c in self.cells), default=0)
        self._prefixes = set()
        for cell in self.cells:
            self._add_prefixes(cell)

    def _add_prefixes(self, cell: Cell):
        for depth in range(self.min_depth, cell.depth):
            self._prefixes.add(self.space.cell_of(cell.rep, depth))

    def _normalize(self, cells: Iterable[Cell]) -> List[Cell]:
        kept: List[Cell] = []
        for cell in sorted(set(cells), key=lambda c: c.depth):
            if not any(self.space.cell_subset(cell, other) for other in kept):
                kept.append(cell)
        return kept

    @classmethod
    def empty(cls, space: SpaceDescriptor) -> "Region":
        return cls(space, ())

    @classmethod
    def whole(cls, space: SpaceDescriptor) -> "Region":
        return cls(space, space.top_cells())

    def __repr__(self):
        return f"<Region {self.space.name} {sorted(self.cells)}>"

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.space == other.space and self.covers_region(other) and other.covers_region(self)

    def __hash__(self):
        return hash((self.space, self.cells))

    def __bool__(self):
        return bool(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(sorted(self.cells))

    def __len__(self):
        return len(self.cells)

    # Membership and containment
    def contains_point(self, label: Label) -> bool:
        return any(self.space.cell_contains(cell, label) for cell in self.cells)

    def covers(self, cell: Cell) -> bool:
        """Exact decision of cell ⊆ region."""
        if not self.cells:
            return False
        for depth in range(min(self.min_depth, cell.depth), cell.depth + 1):
            if self.space.cell_of(cell.rep, depth) in self.cells:
                return True
        if cell.depth < self.min_depth:
            if not self.meets(cell):
                return False
        elif cell.depth >= self.max_depth or cell not in self._prefixes:
            return False
        return all(self.covers(child) for child in self.space.children(cell))

    def covers_region(self, other: "Region") -> bool:
        return all(self.covers(cell) for cell in other.cells)

    def meets(self, cell: Cell) -> bool:
        if not self.cells:
            return False
        if cell.depth < self.min_depth:
            return any(self.space.cells_meet(cell, other) for other in self.cells)
        for depth in range(self.min_depth, cell.depth + 1):
            if self.space.cell_of(cell.rep, depth) in self.cells:
                return True
        return cell in self._prefixes

    def meets_region(self, other: "Region") -> bool:
        return any(self.meets(cell) for cell in other.cells)

    # Boolean operations
    def union(self, other) -> "Region":
        cells = other.cells if isinstance(other, Region) else other
        return Region(self.space, list(self.cells) + list(cells))

    def intersect(self, other: "Region") -> "Region":
        cells = []
        for a in self.cells:
            for b in other.cells:
                if self.space.cell_subset(a, b):
                    cells.append(a)
                elif self.space.cell_subset(b, a):
                    cells.append(b)
        return Region(self.space, cells)

    def subtract_from(self, cell: Cell) -> List[Cell]:
        """A partition of cell ∖ region into cells."""
        if self.covers(cell):
            return []
        if not self.meets(cell):
            return [cell]
        pieces = []
        for child in self.space.children(cell):
            pieces.extend(self.subtract_from(child))
        return pieces

    def minus(self, other: "Region") -> "Region":
        pieces = []
        for cell in self.cells:
            pieces.extend(other.subtract_from(cell))
        return Region(self.space, pieces)

    def complement(self) -> "Region":
        if not self.space.compact:
            raise UnsupportedSpace(f"complement in {self.space.name} is not a finite union")
        return Region.whole(self.space).minus(self)

    def complement_cells(self) -> Iterator[Cell]:
        """Enumerate cells disjoint from the region whose union is its complement."""
        if self.space.compact:
            yield from sorted(self.complement().cells)
            return
        stage = 0
        while True:
            for cell in self.space.stage_cells(stage):
                if not self.meets(cell):
                    yield cell
            stage += 1

    def refine(self, depth: int) -> List[Cell]:
        """The region as cells of one depth (at least as deep as every member)."""
        out = []
        for cell in self.cells:
            out.extend(self.space.cells_at(cell, max(depth, cell.depth)))
        return sorted(out)

    # Metric data
    def distance(self, label: Label) -> Optional[Fraction]:
        """d(x, region); None for the empty region."""
        if not self.cells:
            return None
        if self.contains_point(label):
            return Fraction(0)
        return min(self.space.dist(label, cell.rep) for cell in self.cells)

    def distance_to(self, other: "Region") -> Optional[Fraction]:
        if not self.cells or not other.cells:
            return None
        return min(self.space.cell_distance(a, b) for a in self.cells for b in other.cells)

    def hull(self) -> Optional[Cell]:
        """Smallest cell containing the region."""
        if not self.cells:
            return None
        cells = sorted(self.cells)
        depth = self.min_depth
        while depth > 0 or not self.space.compact:
            candidate = self.space.cell_of(cells[0].rep, depth)
            if all(self.space.cell_subset(c, candidate) for c in cells):
                return candidate
            depth -= 1
        return self.space.cell_of(cells[0].rep, 0)

    def diameter(self) -> Fraction:
        if not self.cells:
            return Fraction(0)
        if len(self.cells) == 1:
            (cell,) = self.cells
            return self.space.radius(cell.depth)
        cells = sorted(self.cells)
        widest = max(self.space.radius(c.depth) for c in cells)
        apart = max(self.space.dist(a.rep, b.rep) for a in cells for b in cells)
        return max(widest, apart)


class GrowingRegion(Region):
    """A region that only ever receives cells disjoint from what it holds."""

    def __init__(self, space: SpaceDescriptor):
        super().__init__(space, ())
        self._members = set()

    def __hash__(self):
        return id(self)

    def add_disjoint(self, cell: Cell) -> None:
        self._members.add(cell)
        self.cells = self._members
        if len(self._members) == 1 or cell.depth < self.min_depth:
            self._index()
            return
        self.max_depth = max(self.max_depth, cell.depth)
        self._add_prefixes(cell)

    def absorb(self, cell: Cell) -> List[Cell]:
        """Add the part of ``cell`` not yet held; return it as a partition."""
        pieces = self.subtract_from(cell)
        for piece in pieces:
            self.add_disjoint(piece)
        return pieces

    def frozen(self) -> Region:
        return Region(self.space, self.cells)
