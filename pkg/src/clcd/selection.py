"""Causal feature selection on top of the multi-label discovery phases.

Labels found inside a boundary are replaced by admissible members of their own
boundaries (delabeling), then a greedy pass converts equivalence structure
into explicit common-variable choices, leaving per-label specific sets.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .citest import CiConfig
from .data import Dataset, VariableId
from .discovery import (
    evaluate_theta,
    phase1_structures,
    phase2_retrieve,
    phase3_equivalences,
    theta_candidates,
)
from .mb import G2Tester

log = logging.getLogger("clcd")


@dataclass(frozen=True)
class CommonChoice:
    """One selected common feature set and the label members it replaced."""

    features: frozenset
    labels: frozenset
    replaced: dict  # label -> frozenset of boundary members the set stands for


@dataclass
class FeatureSelectionResult:
    common: list                  # CommonChoice records, in selection order
    specific: dict                # label -> set of features
    feature_label_map: dict       # feature -> set of labels it serves
    selected: set
    structures: dict              # per-label structures before consumption
    ei: dict = field(default_factory=dict)

    def selected_names(self, ds: Dataset) -> list:
        return [ds.names[v] for v in sorted(self.selected)]


def _always_dependent(tester, x: VariableId, target: VariableId,
                      base: list, cfg: CiConfig) -> bool:
    """x stays dependent on target under every small subset of base."""
    if tester.independent(x, target, ()):
        return False
    top = min(cfg.max_cond_size, len(base))
    for size in range(1, top + 1):
        for sub in itertools.combinations(base, size):
            if tester.independent(x, target, sub):
                return False
    return True


def delabel_pc(ds: Dataset, label: VariableId, structures: dict, labels,
               cfg: CiConfig = CiConfig(), tester=None,
               source_pc: dict | None = None) -> set:
    """Replace labels in PC(label) by members drawn from their own PCs.

    ``source_pc`` maps each label to the PC snapshot used as its substitution
    pool (defaults to the current PCs). Candidates are admitted when they stay
    dependent on ``label`` under every conditioning subset of the post-removal
    PC; all candidates of one round are judged against the same snapshot.
    A removed label is banned from re-admission, which breaks label cycles.
    """
    if tester is None:
        tester = G2Tester(ds, cfg)
    if source_pc is None:
        source_pc = {t: frozenset(structures[t].pc) for t in labels}
    st = structures[label]
    label_set = set(labels)
    banned: set = set()
    while True:
        found = sorted(st.pc & label_set)
        if not found:
            break
        st.pc -= set(found)
        for t in found:
            st.sepsets.pop(t, None)
        banned |= set(found)
        pool: set = set()
        for t in found:
            pool |= set(source_pc.get(t, frozenset()))
        pool -= st.pc
        pool.discard(label)
        blocked = pool & banned
        if blocked:
            log.info("delabel(%d): labels %s stay excluded", label,
                     sorted(blocked))
            pool -= blocked
        base = sorted(st.pc)
        admitted = [x for x in sorted(pool)
                    if _always_dependent(tester, x, label, base, cfg)]
        for x in admitted:
            st.pc.add(x)
            st.sepsets.pop(x, None)
            st.spouses.pop(x, None)
        log.debug("delabel(%d): removed %s, admitted %s", label, found,
                  admitted)
    return set(st.pc)


def select_common(ds: Dataset, labels, structures: dict, ei: dict,
                  cfg: CiConfig = CiConfig()) -> FeatureSelectionResult:
    """Greedily pick feature sets covering the most labels at once.

    Each round scores every candidate by how many labels it can stand in for
    (via a boundary, PC-equivalence, or spouse-equivalence match), takes the
    best, and consumes the matched members from each covered label's
    structure. Per-label leftovers become the specific sets.
    """
    labels = sorted(labels)
    label_set = set(labels)
    snapshot = {t: structures[t].clone() for t in labels}
    work = {t: structures[t].clone() for t in labels}
    candidates = theta_candidates(structures, ei, labels)
    common: list = []
    while True:
        best = None
        for z in candidates:
            branches = {}
            for t in labels:
                m = evaluate_theta(z, t, work, ei)
                if m is not None:
                    branches[t] = m
            if len(branches) < 2:
                continue
            key = (-len(branches), len(z), sorted(z))
            if best is None or key < best[0]:
                best = (key, z, branches)
        if best is None:
            break
        _, z, branches = best
        common.append(CommonChoice(
            features=frozenset(z),
            labels=frozenset(branches),
            replaced={t: m.z_t for t, m in branches.items()}))
        for t, m in sorted(branches.items()):
            st = work[t]
            if m.branch == "theta3":
                for sp in m.z_t:
                    st.spouses.pop(sp, None)
            else:
                st.pc -= m.z_t
                for sp in m.z_t & set(st.spouses):
                    st.spouses.pop(sp)
            for v in m.z_t:
                st.sepsets.pop(v, None)
        log.info("selected common set %s for labels %s", sorted(z),
                 sorted(branches))

    specific: dict = {}
    for t in labels:
        residual = work[t].mb
        leaked = residual & label_set
        if leaked:
            log.info("dropping labels %s from specific(%d)", sorted(leaked), t)
        specific[t] = residual - label_set

    feature_label_map: dict = {}
    for choice in common:
        for f in choice.features:
            feature_label_map.setdefault(f, set()).update(choice.labels)
    for t, feats in specific.items():
        for f in feats:
            feature_label_map.setdefault(f, set()).add(t)

    return FeatureSelectionResult(
        common=common,
        specific=specific,
        feature_label_map=feature_label_map,
        selected=set(feature_label_map),
        structures=snapshot,
        ei=ei)


def clcd_fs(ds: Dataset, cfg: CiConfig = CiConfig(), max_z: int = 1,
            workers: int = 1, tester=None) -> FeatureSelectionResult:
    """Full causal feature-selection pipeline over all labels of ds.

    Runs local discovery and cross-label retrieval, delabels every boundary,
    mines equivalences over the delabeled structures, then picks common and
    specific feature sets. Works for a single label too (no common sets).
    """
    labels = sorted(ds.labels)
    if tester is None and workers <= 1:
        tester = G2Tester(ds, cfg)
    structures = phase1_structures(ds, labels, cfg, tester=tester,
                                   workers=workers)
    if len(labels) > 1:
        phase2_retrieve(ds, labels, structures, cfg, max_z=max_z,
                        tester=tester)
    if tester is None:
        tester = G2Tester(ds, cfg)
    source_pc = {t: frozenset(structures[t].pc) for t in labels}
    for t in labels:
        delabel_pc(ds, t, structures, labels, cfg, tester=tester,
                   source_pc=source_pc)
    ei = phase3_equivalences(ds, labels, structures, cfg, max_z=max_z,
                             tester=tester, workers=workers)
    return select_common(ds, labels, structures, ei, cfg)
