"""Local causal structure learning: HITON-style PC/MB search and IAMB.

All searches go through a tester object (:class:`G2Tester` by default) so an
exact graphical oracle can stand in for the data-driven test in checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .citest import CiConfig, CiResult, g2_test, set_ci
from .data import Dataset, VariableId


class G2Tester:
    """Memoizing G² test provider bound to one dataset.

    Cache keys normalize the symmetry of the test (x,y and y,x collapse),
    so repeated subset scans over the same pool cost one test each.
    """

    def __init__(self, ds: Dataset, cfg: CiConfig):
        self.ds = ds
        self.cfg = cfg
        self.n_tests = 0
        self._cache: dict = {}
        self._set_cache: dict = {}

    def ci(self, x: VariableId, y: VariableId, z=()) -> CiResult:
        if x > y:
            x, y = y, x
        key = (x, y, tuple(sorted(z)))
        result = self._cache.get(key)
        if result is None:
            result = g2_test(self.ds, x, y, key[2], self.cfg)
            self._cache[key] = result
            self.n_tests += 1
        return result

    def independent(self, x: VariableId, y: VariableId, z=()) -> bool:
        return self.ci(x, y, z).independent

    def set_ci(self, xs, ys, z=()) -> CiResult:
        a, b = tuple(sorted(xs)), tuple(sorted(ys))
        if a > b:
            a, b = b, a
        key = (a, b, tuple(sorted(z)))
        result = self._set_cache.get(key)
        if result is None:
            result = set_ci(self.ds, a, b, key[2], self.cfg)
            self._set_cache[key] = result
            self.n_tests += 1
        return result

    def set_independent(self, xs, ys, z=()) -> bool:
        return self.set_ci(xs, ys, z).independent


@dataclass
class LocalStructure:
    """PC set, spouse->children map and separator bookkeeping for one target.

    ``sepsets`` records, for every candidate rejected during PC search, a set
    that rendered it independent of the target; spouse collider checks and
    later phases reuse it.
    """

    target: VariableId
    pc: set = field(default_factory=set)
    spouses: dict = field(default_factory=dict)
    sepsets: dict = field(default_factory=dict)

    @property
    def mb(self) -> set:
        return set(self.pc) | set(self.spouses)

    @property
    def spouse_children(self) -> set:
        out: set = set()
        for children in self.spouses.values():
            out |= children
        return out

    def clone(self) -> "LocalStructure":
        return LocalStructure(
            target=self.target,
            pc=set(self.pc),
            spouses={s: set(c) for s, c in self.spouses.items()},
            sepsets=dict(self.sepsets),
        )


def _search_sepset(tester, target, x, pool, max_size):
    """Smallest separating subset of ``pool`` for (x, target), or None.

    Size zero is skipped: callers only probe variables already known to be
    marginally dependent on the target.
    """
    pool = sorted(pool)
    for size in range(1, min(max_size, len(pool)) + 1):
        for subset in itertools.combinations(pool, size):
            if tester.independent(x, target, subset):
                return frozenset(subset)
    return None


def hiton_pc(ds, target: VariableId, candidates, cfg: CiConfig,
             tester=None, symmetric: bool = False):
    """Parent/children search with interleaved backward conditioning.

    Candidates enter in ascending order of marginal p-value (ties by id);
    after each admission every current member is re-tested against subsets of
    the others (size <= max_cond_size) and removed when a separator appears.
    With ``symmetric=True`` each surviving X is additionally required to hold
    the target in its own PC set; variables failing the check are removed and
    their separator is taken from the reverse search.

    Returns (pc set, sepsets map for every rejected candidate).
    """
    if tester is None:
        tester = G2Tester(ds, cfg)
    pool = sorted(set(candidates) - {target})
    sepsets: dict = {}
    ranked = []
    for x in pool:
        r = tester.ci(x, target, ())
        if r.independent:
            sepsets[x] = frozenset()
        else:
            ranked.append((r.p_value, x))
    ranked.sort()

    pc: list = []
    for _, x in ranked:
        # vet the newcomer against the current set first; otherwise a
        # variable carrying the same information as an existing member
        # would evict it (both directions separate exactly) and the set
        # would churn toward the last-ranked copy
        sep = _search_sepset(tester, target, x, pc, cfg.max_cond_size)
        if sep is not None:
            sepsets[x] = sep
            continue
        pc.append(x)
        changed = True
        while changed:
            changed = False
            for y in list(pc):
                sep = _search_sepset(tester, target, y,
                                     [v for v in pc if v != y],
                                     cfg.max_cond_size)
                if sep is not None:
                    pc.remove(y)
                    sepsets[y] = sep
                    changed = True
                    break

    if symmetric:
        for x in sorted(pc):
            reverse_pc, reverse_sep = hiton_pc(
                ds, x, (set(pool) | {target}) - {x}, cfg, tester=tester)
            if target not in reverse_pc:
                pc.remove(x)
                # the reverse search separated (target, x); reuse its witness
                sepsets[x] = reverse_sep.get(target, frozenset())

    return set(pc), sepsets


def hiton_mb(ds, target: VariableId, candidates, cfg: CiConfig,
             tester=None, symmetric: bool = False) -> LocalStructure:
    """Markov boundary via PC search plus the spouse collider check.

    For every X in the PC of a PC member Y (X outside PC ∪ {target}), X is a
    spouse with child Y iff X is dependent on the target given
    sepset(X) ∪ {Y}. No further trimming: conditioning a weak collider signal
    on the whole boundary would wash it out and silently drop true spouses.
    """
    if tester is None:
        tester = G2Tester(ds, cfg)
    scope = set(candidates) - {target}
    pc, sepsets = hiton_pc(ds, target, scope, cfg, tester, symmetric)

    spouses: dict = {}
    for child in sorted(pc):
        child_pc, _ = hiton_pc(ds, child, (scope | {target}) - {child},
                               cfg, tester, symmetric)
        for x in sorted(child_pc):
            if x == target or x in pc:
                continue
            sep = sepsets.get(x, frozenset())
            if not tester.ci(x, target, sorted(sep | {child})).independent:
                spouses.setdefault(x, set()).add(child)

    return LocalStructure(target=target, pc=pc, spouses=spouses,
                          sepsets=sepsets)


def iamb(ds, target: VariableId, candidates, cfg: CiConfig, tester=None) -> set:
    """Incremental-association Markov boundary baseline.

    Grows by the strongest dependent variable given the current boundary
    (ties to the lowest id), then shrinks members that a boundary-minus-one
    conditioning renders independent. Conditioning sets are not capped; the
    full-boundary tests are what make the algorithm sample-hungry.
    """
    if tester is None:
        tester = G2Tester(ds, cfg)
    pool = sorted(set(candidates) - {target})
    mb: list = []
    while True:
        best = None
        cond = tuple(sorted(mb))
        for x in pool:
            if x in mb:
                continue
            r = tester.ci(x, target, cond)
            if r.independent:
                continue
            key = (-r.statistic, x)
            if best is None or key < best:
                best = key
        if best is None:
            break
        mb.append(best[1])

    changed = True
    while changed:
        changed = False
        for x in sorted(mb):
            if tester.independent(x, target, sorted(set(mb) - {x})):
                mb.remove(x)
                changed = True
                break
    return set(mb)
