"""Count-sorted order lists with O(1) increment maintenance.

A BucketedOrderList keeps the cells of one hypergraph slice (one axis of
the 3-D count grid) in non-increasing count order.  Nodes with equal
counts form a contiguous run, a "bucket".  Incrementing a cell swaps it
with the first node of its bucket and bumps its count, so the chain
stays sorted with at most two link rewires per update, independent of
slice size.

Cells that have never been observed are not materialised: they form an
implicit zero-count tail in ascending index order.  The head of an
all-zero list is therefore index 0.
"""

from __future__ import annotations

from typing import Iterator


class BucketedOrderList:
    """Sorted chain over one slice axis, maintained in O(1) per increment.

    ``order[p]`` is the cell key at chain position ``p`` (position 0 is
    the head, the current argmax).  ``pos`` maps a key back to its chain
    position, so the grid cell and its chain node round-trip in O(1).
    ``run_first`` maps a count value to the first position of its bucket;
    in a sorted chain each count value occupies exactly one bucket.
    """

    __slots__ = ("order", "pos", "counts", "run_first")

    def __init__(self) -> None:
        self.order: list[int] = []
        self.pos: dict[int, int] = {}
        self.counts: dict[int, int] = {}
        self.run_first: dict[int, int] = {}

    def __len__(self) -> int:
        """Number of materialised (nonzero) nodes."""
        return len(self.order)

    def increment(self, key: int) -> int:
        """Add one observation to ``key`` and restore sortedness.

        Returns the number of link rewires performed (0 or 2): a node
        already at the front of its bucket is bumped in place, otherwise
        it trades places with its bucket's first node.
        """
        pos = self.pos.get(key)
        if pos is None:
            # First observation: the node leaves the implicit zero tail
            # and joins the chain at the back, which is where the 1-run
            # ends (every materialised node has count >= 1).
            p = len(self.order)
            self.order.append(key)
            self.pos[key] = p
            self.counts[key] = 1
            if 1 not in self.run_first:
                self.run_first[1] = p
            return 0

        c = self.counts[key]
        front = self.run_first[c]
        rewires = 0
        if front != pos:
            other = self.order[front]
            self.order[front] = key
            self.order[pos] = other
            self.pos[key] = front
            self.pos[other] = pos
            rewires = 2
        self.counts[key] = c + 1
        # The c-bucket loses its first slot; the c+1 bucket (which, if it
        # exists, ends right before `front`) absorbs it.
        nxt = front + 1
        if nxt < len(self.order) and self.counts[self.order[nxt]] == c:
            self.run_first[c] = nxt
        else:
            del self.run_first[c]
        if c + 1 not in self.run_first:
            self.run_first[c + 1] = front
        return rewires

    def head(self) -> tuple[int, int] | None:
        """(key, count) of the maximal node, or None if all counts are zero."""
        if not self.order:
            return None
        k = self.order[0]
        return k, self.counts[k]

    def count_of(self, key: int) -> int:
        return self.counts.get(key, 0)

    def items(self) -> Iterator[tuple[int, int]]:
        """Yield (key, count) for materialised nodes in chain order."""
        for k in self.order:
            yield k, self.counts[k]

    def is_sorted(self) -> bool:
        """Full-traversal check that counts are non-increasing from head."""
        prev = None
        for _, c in self.items():
            if c <= 0:
                return False
            if prev is not None and c > prev:
                return False
            prev = c
        return True

    def check_handles(self) -> bool:
        """Verify that every key round-trips through its stored position."""
        for k, p in self.pos.items():
            if self.order[p] != k:
                return False
        return len(self.pos) == len(self.order) == len(self.counts)
