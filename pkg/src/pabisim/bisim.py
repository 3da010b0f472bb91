"""Strong and convex bisimilarity of a PA by partition refinement.

Both procedures start from the split by enabled labels and then
repeatedly split the first block (in canonical order) whose members have
different one-step signatures. A state's signature for a label is the
set of block-mass vectors of its listed successors (strong) or the
extreme points of their hull (convex). Two states have equal convex
signatures exactly when each listed successor of one is matched by a
mixture of the other's with equal block masses, so no extra LP is needed
at comparison time.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .lifting import Polytope, conv_member, conv_reduce
from .model import PA, Dist, ZERO, convex_combine

STRONG = "strong"
CONVEX = "convex"


@dataclass(frozen=True)
class Partition:
    """Blocks of states; each block is named by its least member."""

    blocks: tuple[tuple[str, ...], ...]

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[str]]) -> "Partition":
        norm = [tuple(sorted(b)) for b in blocks if b]
        return cls(tuple(sorted(norm)))

    @property
    def block_of(self) -> dict[str, str]:
        return {s: b[0] for b in self.blocks for s in b}

    def same_block(self, s: str, t: str) -> bool:
        index = self.block_of
        return index[s] == index[t]

    def refines(self, other: "Partition") -> bool:
        index = other.block_of
        return all(len({index[s] for s in b}) == 1 for b in self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def _project(index: Mapping[str, str], d: Dist) -> Dist:
    acc = {}
    for s, w in d.items():
        b = index[s]
        acc[b] = acc.get(b, ZERO) + w
    return Dist._trusted(acc)


def signature(pa: PA, index: Mapping[str, str], state: str, mode: str):
    sig = []
    for a in pa.labels:
        targets = pa.transitions(state, a)
        if not targets:
            sig.append(None)
            continue
        projected = {_project(index, d) for d in targets}
        if mode == CONVEX:
            projected = set(conv_reduce(Polytope(tuple(projected))).generators)
        sig.append(frozenset(projected))
    return tuple(sig)


def refine_once(pa: PA, partition: Partition, mode: str = STRONG) -> Partition:
    """Split the first unstable block; return ``partition`` itself if stable."""
    index = partition.block_of
    for pos, block in enumerate(partition.blocks):
        if len(block) == 1:
            continue
        groups: dict[tuple, list[str]] = {}
        for s in block:
            groups.setdefault(signature(pa, index, s, mode), []).append(s)
        if len(groups) > 1:
            rest = partition.blocks[:pos] + partition.blocks[pos + 1:]
            return Partition.from_blocks(rest + tuple(tuple(g) for g in groups.values()))
    return partition


def _bisimilarity(pa: PA, mode: str) -> Partition:
    by_enabled: dict[tuple, list[str]] = {}
    for s in pa.states:
        by_enabled.setdefault(pa.enabled(s), []).append(s)
    part = Partition.from_blocks(by_enabled.values())
    while True:
        nxt = refine_once(pa, part, mode)
        if nxt is part:
            return part
        part = nxt


def strong_bisimilarity(pa: PA) -> Partition:
    return _bisimilarity(pa, STRONG)


def convex_bisimilarity(pa: PA) -> Partition:
    return _bisimilarity(pa, CONVEX)


def bisimilarity(pa: PA, mode: str) -> Partition:
    if mode not in (STRONG, CONVEX):
        raise ValueError(f"unknown mode {mode!r}")
    return _bisimilarity(pa, mode)


def match_transition(pa: PA, partition: Partition, target: Dist, defender: str,
                     label: str, mode: str = STRONG):
    """How ``defender`` answers a move to ``target`` under ``partition``.

    Strong mode returns the matching listed successor; convex mode returns
    ``(coefficients, mixture)`` over the defender's listed successors.
    None when no answer has the same block masses.
    """
    index = partition.block_of
    want = _project(index, target)
    targets = pa.transitions(defender, label)
    if not targets:
        return None
    if mode == STRONG:
        return next((d for d in targets if _project(index, d) == want), None)
    coeffs = conv_member(want, [_project(index, d) for d in targets])
    if coeffs is None:
        return None
    return coeffs, convex_combine(coeffs, targets)
