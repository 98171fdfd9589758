from __future__ import annotations

from typing import Tuple

import numpy as np


class Partition:
    """Assigns every row of a value to one of `num_segments` groups.

    Segment operations (`masked_softmax`, `weighted_sum`) iterate rows in
    ascending index order, so the row order fixes the summation order.

    Attributes:
        segment_ids (np.ndarray):
            The group of every row.
        num_segments (int):
            The number of groups, including empty ones.
    """

    __slots__ = ("segment_ids", "num_segments")

    def __init__(self, segment_ids, num_segments: int = None):
        self.segment_ids = np.asarray(segment_ids, dtype=np.int64).reshape(-1)
        if num_segments is None:
            num_segments = int(self.segment_ids.max()) + 1 if len(self.segment_ids) else 0
        self.num_segments = int(num_segments)
        if len(self.segment_ids) and (
            self.segment_ids.min() < 0 or self.segment_ids.max() >= self.num_segments
        ):
            raise ValueError("segment ids must lie in [0, num_segments)")

    def __len__(self):
        return len(self.segment_ids)

    def __repr__(self):
        return f"Partition({len(self)} rows, {self.num_segments} segments)"

    @classmethod
    def single(cls, n: int) -> Partition:
        """All rows in one group."""
        return cls(np.zeros(n, dtype=np.int64), 1)

    @classmethod
    def blocks(cls, num_segments: int, size: int) -> Partition:
        """`num_segments` consecutive groups of `size` rows each."""
        return cls(np.repeat(np.arange(num_segments), size), num_segments)

    @classmethod
    def interleaved(cls, num_segments: int, repeats: int) -> Partition:
        """Row `k * num_segments + s` belongs to group `s` for every k < repeats."""
        return cls(np.tile(np.arange(num_segments), repeats), num_segments)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.segment_ids, minlength=self.num_segments)

    def nonempty(self) -> np.ndarray:
        """Ids of the groups holding at least one row."""
        return np.flatnonzero(self.sizes())

    def has_empty(self) -> bool:
        return bool((self.sizes() == 0).any())

    def compact(self) -> Tuple[Partition, np.ndarray]:
        """Drops empty groups.

        Returns:
            The partition re-numbered over the nonempty groups and, for every
            new group, its id in this partition.
        """
        present = self.nonempty()
        return Partition(np.searchsorted(present, self.segment_ids), len(present)), present
