"""Cross-checks of the fast routines against the exhaustive oracle."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import oracle
from .classifier import Indeterminate, claim1_structures, classify_region, classify_sum_dof
from .interference import is_manageable
from .netmodel import LayeredNetwork, find_disjoint_paths

MODES = ("both", "pair1-only", "pair2-only")


@dataclass
class AuditReport:
    checks: dict = field(default_factory=dict)  # check name -> number of comparisons
    mismatches: list = field(default_factory=list)  # (check, detail)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def _tick(self, name: str, agree: bool, detail: str = ""):
        self.checks[name] = self.checks.get(name, 0) + 1
        if not agree:
            self.mismatches.append((name, detail))

    def merge(self, other: "AuditReport") -> "AuditReport":
        for k, n in other.checks.items():
            self.checks[k] = self.checks.get(k, 0) + n
        self.mismatches.extend(other.mismatches)
        return self


def _valid_pair(net: LayeredNetwork, pair, ends) -> bool:
    p, q = pair
    if set(p) & set(q):
        return False
    for path, (a, b) in zip(pair, ends):
        if path[0] != a or path[-1] != b:
            return False
        if any((u, v) not in net.edges for u, v in zip(path, path[1:])):
            return False
    return True


def audit_network(net: LayeredNetwork, max_pairs: int = 200, label: str = "") -> AuditReport:
    """Every comparison the oracle supports on one network (|V| ≤ oracle limit)."""
    rep = AuditReport()
    tag = label or f"{len(net.nodes)} nodes"
    ref_case, ref_dof, _ = oracle.classify(net)
    try:
        c = classify_sum_dof(net, fallback=False)
    except Indeterminate:
        c = None
    rep._tick(
        "classification",
        c is not None and (c.case, c.sum_dof) == (ref_case, ref_dof),
        f"{tag}: fast={None if c is None else (c.case, c.sum_dof)} oracle={(ref_case, ref_dof)}",
    )
    if c is not None:
        try:
            region = classify_region(net, c).region
        except Indeterminate:
            region = None
        ref_region = oracle.region_label(net)
        rep._tick("region", region == ref_region, f"{tag}: fast={region} oracle={ref_region}")

    for ends in (((net.s1, net.d1), (net.s2, net.d2)), ((net.s1, net.d2), (net.s2, net.d1))):
        fast = find_disjoint_paths(net, (ends[0][0], ends[1][0]), (ends[0][1], ends[1][1]))
        ref = oracle.has_disjoint_pair(net, *ends)
        agree = (fast is not None) == ref and (fast is None or _valid_pair(net, fast, ends))
        rep._tick("disjoint_paths", agree, f"{tag}: ends={ends} fast={fast} oracle={ref}")

    pairs = oracle.disjoint_path_pairs(net, (net.s1, net.d1), (net.s2, net.d2))
    for p11, p22 in pairs[:max_pairs]:
        for mode in MODES:
            fast = is_manageable(net, p11, p22, mode)
            ref = oracle.manageable(net, p11, p22, mode)
            rep._tick("manageability", fast == ref, f"{tag}: {mode} {p11} {p22} fast={fast} oracle={ref}")

    if oracle.case_a(net) is None and all(
        oracle.reach(net, net.source(i), net.dest(i)) for i in (1, 2)
    ):
        found = claim1_structures(net)
        rep._tick("claim1_coverage", any(found.values()), f"{tag}: {found}")
    return rep


def audit_suite(nets, max_pairs: int = 200) -> AuditReport:
    total = AuditReport()
    for k, net in enumerate(nets):
        total.merge(audit_network(net, max_pairs, label=f"#{k}"))
    return total
