# coding: utf-8

# # Run-compressed index lists
#
# Leaf lists in a Stellar tree are sorted integer ids. After spatial
# reindexing most of them are long consecutive stretches, which a run
# encoding stores as two entries: a negated start and a count of the ids
# that follow.

import numpy as np

from stellar import SreList, sre_compress, sre_decode, sre_expand_in_place

# A run of four ids becomes two entries.

print(sre_compress([1, 2, 3, 4]).entries.tolist())
print(sre_compress(range(40, 45)).entries.tolist())

# Runs shorter than three stay literal, since a two-entry run would save
# nothing. Zero cannot be negated, so it is always a literal and a run
# containing it starts at 1.

print(sre_compress([5, 6]).entries.tolist())
print(sre_compress([0, 1, 2, 3]).entries.tolist())

# Twenty cells in four runs take eight entries.

cells = np.concatenate([np.arange(s, s + 5) for s in (10, 30, 50, 70)])
lst = sre_compress(cells)
print(lst.num_entries, lst.size(), np.array_equal(sre_decode(lst), cells))

# Appending one id at a time gives the same encoding as compressing the
# whole list, which is how leaf lists are filled during cell insertion.

folded = SreList()
for c in cells:
    folded.append(int(c))
print(folded == lst)

# A run can be split back into literals in place, e.g. before editing the
# cells it covers. Its two slots take the first two ids and the remaining
# ids go to the end, so the set is kept but the list is no longer sorted.

sre_expand_in_place(lst, 0)
print(lst.entries.tolist())
print(sorted(lst) == cells.tolist())
