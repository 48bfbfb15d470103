"""Detection of variable sets carrying equivalent information about a target.

Two disjoint sets S and Z are information-equivalent for X when each is
marginally dependent on X yet screens the other off: X ⊥ S | Z and X ⊥ Z | S.
Scans run context-free by default; a conditioning context can be supplied for
the expert variant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .citest import CiConfig
from .data import Dataset, VariableId
from .mb import G2Tester


@dataclass(frozen=True)
class EquivalencePair:
    """Record that ``s`` and ``z`` carry equivalent information about ``target``.

    ``s`` is the in-structure side (drawn from a PC or spouse set), ``z`` the
    external side found by scanning.
    """

    target: VariableId
    s: frozenset
    z: frozenset
    context: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.s or not self.z:
            raise ValueError("both sides must be nonempty")
        if self.s & self.z:
            raise ValueError("sides must be disjoint")
        if self.target in self.s | self.z:
            raise ValueError("target cannot appear on either side")

    def sides(self) -> tuple[frozenset, frozenset]:
        return self.s, self.z


def contains_equivalent_info(ds: Dataset, target: VariableId, s, z,
                             context=(), cfg: CiConfig = CiConfig(),
                             tester=None) -> bool:
    """True iff s and z are information-equivalent for the target.

    Checks, in order: target ⊥̸ s | context, target ⊥̸ z | context,
    target ⊥ s | z ∪ context, target ⊥ z | s ∪ context. All four run through
    the composite-variable G² test.
    """
    s, z, context = frozenset(s), frozenset(z), frozenset(context)
    if not s or not z:
        raise ValueError("both sides must be nonempty")
    if s & z or target in s | z or target in context:
        raise ValueError("target, s, z and context must not overlap")
    if tester is None:
        tester = G2Tester(ds, cfg)
    if tester.set_independent((target,), s, context):
        return False
    if tester.set_independent((target,), z, context):
        return False
    return (tester.set_independent((target,), s, z | context)
            and tester.set_independent((target,), z, s | context))


def find_equivalences(ds: Dataset, x: VariableId, pc_x, candidates,
                      cfg: CiConfig = CiConfig(), max_z: int = 1,
                      tester=None) -> list:
    """Scan for external sets equivalent to PC subsets of ``x``.

    Z ranges over subsets (sizes 1..max_z) of candidates∖pc_x that are
    dependent on x; S ranges over subsets of pc_x of the same sizes. Every
    pair satisfying the context-free equivalence conditions is returned, in
    deterministic (size, id) order.
    """
    if max_z < 1:
        raise ValueError("max_z must be >= 1")
    if tester is None:
        tester = G2Tester(ds, cfg)
    pc = sorted(set(pc_x) - {x})
    pool = sorted(set(candidates) - set(pc) - {x})
    # prefilter: variables marginally independent of x can never appear in Z
    pool = [c for c in pool if not tester.independent(c, x, ())]

    s_subsets = []
    for size in range(1, min(max_z, len(pc)) + 1):
        s_subsets.extend(itertools.combinations(pc, size))

    found = []
    for size in range(1, min(max_z, len(pool)) + 1):
        for z in itertools.combinations(pool, size):
            if size > 1 and tester.set_independent((x,), z, ()):
                continue
            for s in s_subsets:
                if contains_equivalent_info(ds, x, s, z, (), cfg, tester):
                    found.append(EquivalencePair(
                        target=x, s=frozenset(s), z=frozenset(z)))
    return found
