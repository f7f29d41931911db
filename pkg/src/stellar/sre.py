"""Sequential Range Encoding (SRE) of non-negative index lists.

A run of consecutive ascending indices ``s, s+1, ..., s+c`` is stored as
the pair ``[-s, c]``; any non-negative entry is a literal index.  So
``[-1, 3]`` decodes to ``1 2 3 4`` and ``[-40, 4]`` to ``40 .. 44``.

Since ``-0 == 0`` a run cannot start at index 0: a stretch beginning at 0
is stored as a literal ``0`` followed by a run starting at 1.  Stretches
of length 2 stay literal (a run header would not save anything).
"""
from __future__ import annotations

from array import array
from typing import Iterable, Iterator

import numpy as np

from .errors import CorruptionError, ParameterError, UsageError

__all__ = [
    "SreList",
    "sre_append",
    "sre_compress",
    "sre_iterate",
    "sre_size",
    "sre_expand_in_place",
    "sre_decode",
]

MIN_RUN = 3


class SreList:
    """Mutable SRE list backed by a compact ``array('q')``."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[int] = ()):
        if isinstance(entries, np.ndarray):
            self.entries = array("q", entries.astype(np.int64, copy=False).tobytes())
        else:
            self.entries = array("q", entries)

    @classmethod
    def literal(cls, indices) -> "SreList":
        """Uncompressed list (the explicit encoding)."""
        return cls(np.asarray(indices, dtype=np.int64))

    @property
    def num_entries(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.entries, dtype=np.int64) if self.entries else np.zeros(0, np.int64)

    def append(self, index: int) -> "SreList":
        return sre_append(self, index)

    def size(self) -> int:
        return sre_size(self)

    def decode(self) -> np.ndarray:
        return sre_decode(self)

    def __iter__(self) -> Iterator[int]:
        return sre_iterate(self)

    def __eq__(self, other):
        return isinstance(other, SreList) and self.entries == other.entries

    def __repr__(self):
        return f"SreList({list(self.entries)})"


def _entries(lst) -> array:
    return lst.entries if isinstance(lst, SreList) else array("q", lst)


def _tail_is_run(e) -> bool:
    return len(e) >= 2 and e[-2] < 0


def _is_literal_at(e, i: int) -> bool:
    """Whether ``e[i]`` is a literal (neither a run header nor a run count)."""
    return e[i] >= 0 and not (i >= 1 and e[i - 1] < 0)


def sre_append(lst: SreList, index: int) -> SreList:
    """Append ``index`` in place, growing a trailing run when it continues it."""
    if index < 0:
        raise ParameterError(f"SRE lists hold non-negative indices, got {index}")
    e = lst.entries
    n = len(e)
    if _tail_is_run(e):
        if -e[-2] + e[-1] + 1 == index:
            e[-1] += 1
            return lst
    elif (
        n >= 2
        and _is_literal_at(e, n - 1)
        and _is_literal_at(e, n - 2)
        and e[-2] >= 1
        and e[-2] + 1 == e[-1]
        and e[-1] + 1 == index
    ):
        start = e[-2]
        e[-2] = -start
        e[-1] = 2
        return lst
    e.append(index)
    return lst


def sre_compress(sorted_indices) -> SreList:
    """Minimal SRE list for a strictly ascending sequence of non-negative indices."""
    a = np.asarray(sorted_indices, dtype=np.int64).ravel()
    if a.size == 0:
        return SreList()
    if a[0] < 0:
        raise ParameterError("SRE lists hold non-negative indices")
    if a.size > 1 and np.any(a[1:] <= a[:-1]):
        raise ParameterError("sre_compress needs strictly ascending input")
    head = []
    if a[0] == 0:
        head = [0]
        a = a[1:]
        if a.size == 0:
            return SreList(head)
    brk = np.flatnonzero(np.diff(a) != 1) + 1
    starts = np.concatenate(([0], brk))
    lengths = np.diff(np.concatenate((starts, [a.size])))
    is_run = lengths >= MIN_RUN
    out_len = np.where(is_run, 2, lengths)
    offsets = np.concatenate(([0], np.cumsum(out_len)[:-1]))
    out = np.empty(int(out_len.sum()), dtype=np.int64)

    stretch_of = np.repeat(np.arange(starts.size), lengths)
    lit = ~is_run[stretch_of]
    pos = offsets[stretch_of] + (np.arange(a.size) - starts[stretch_of])
    out[pos[lit]] = a[lit]
    out[offsets[is_run]] = -a[starts[is_run]]
    out[offsets[is_run] + 1] = lengths[is_run] - 1
    if head:
        out = np.concatenate((np.array(head, dtype=np.int64), out))
    return SreList(out)


def _check(e) -> None:
    n = len(e)
    for i in range(n):
        if e[i] < 0 and (i == n - 1 or e[i + 1] < 1):
            raise CorruptionError(f"run header at entry {i} has no valid count")


def sre_iterate(lst) -> Iterator[int]:
    """Yield decoded indices in stored order."""
    e = _entries(lst)
    n = len(e)
    i = 0
    while i < n:
        x = e[i]
        if x < 0:
            if i + 1 >= n or e[i + 1] < 1:
                raise CorruptionError(f"run header at entry {i} has no valid count")
            start = -x
            yield from range(start, start + e[i + 1] + 1)
            i += 2
        else:
            yield x
            i += 1


def sre_size(lst) -> int:
    """Decoded length, computed from the entries without expanding runs."""
    a = np.frombuffer(_entries(lst), dtype=np.int64) if len(_entries(lst)) else np.zeros(0, np.int64)
    if a.size == 0:
        return 0
    hdr = np.flatnonzero(a < 0)
    if hdr.size and (hdr[-1] == a.size - 1 or np.any(a[hdr + 1] < 1)):
        raise CorruptionError("run header without a valid count")
    return int(a.size - 2 * hdr.size + (a[hdr + 1] + 1).sum())


def sre_decode(lst) -> np.ndarray:
    """Vectorised decode to an int64 array (stored order)."""
    e = _entries(lst)
    if not e:
        return np.zeros(0, dtype=np.int64)
    a = np.frombuffer(e, dtype=np.int64)
    hdr = np.flatnonzero(a < 0)
    if hdr.size == 0:
        return a.copy()
    if hdr[-1] == a.size - 1 or np.any(a[hdr + 1] < 1):
        raise CorruptionError("run header without a valid count")
    is_count = np.zeros(a.size, dtype=bool)
    is_count[hdr + 1] = True
    seg_pos = np.flatnonzero(~is_count)
    seg_start = np.abs(a[seg_pos])
    seg_len = np.ones(seg_pos.size, dtype=np.int64)
    is_hdr = a[seg_pos] < 0
    seg_len[is_hdr] = a[seg_pos[is_hdr] + 1] + 1
    total = int(seg_len.sum())
    seg_off = np.cumsum(seg_len) - seg_len
    return np.repeat(seg_start, seg_len) + (np.arange(total) - np.repeat(seg_off, seg_len))


def sre_expand_in_place(lst: SreList, run_position: int) -> SreList:
    """Replace the run at ``run_position`` by its first two values and append the rest."""
    e = lst.entries
    if not 0 <= run_position < len(e) - 1 or e[run_position] >= 0:
        raise UsageError(f"entry {run_position} is not a run header")
    if e[run_position + 1] < 1:
        raise CorruptionError(f"run header at entry {run_position} has no valid count")
    start = -e[run_position]
    count = e[run_position + 1]
    e[run_position] = start
    e[run_position + 1] = start + 1
    e.extend(range(start + 2, start + count + 1))
    return lst
