"""Acceptance suite: one PASS/FAIL line per criterion, printed in the
terminal summary (see conftest.py) and asserted by the test of the same
number."""
import time
from fractions import Fraction

import numpy as np
import pytest

from twounicast import fixtures, oracle
from twounicast.audit import audit_suite
from twounicast.classifier import (
    CORNERS,
    brute_force_classify,
    classify_region,
    classify_sum_dof,
)
from twounicast.condense import effective_gain
from twounicast.fixtures import cond_gain
from twounicast.randnet import random_network
from twounicast.schemes import ReductionDirective, ia_alignment_residuals, synth_ia, synthesize, verify_scheme
from twounicast.simulator import dmin_slopes, estimate_dof, ia_dmin, ia_symbol_error

RESULTS = {}
SUITE_SIZE = 300
half = Fraction(1, 2)


def record(n, title, ok, detail):
    RESULTS[n] = (title, ok, detail)
    print(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
    return ok


@pytest.fixture(scope="module")
def suite():
    return [random_network(seed, min_layers=3, max_layers=6, max_width=4) for seed in range(SUITE_SIZE)]


@pytest.fixture(scope="module")
def classified(suite):
    return [(net, classify_sum_dof(net)) for net in suite]


def test_1_sum_dof_trichotomy(suite):
    start = time.perf_counter()
    values, small, disagree = {}, 0, []
    for k, net in enumerate(suite):
        c = classify_sum_dof(net)
        values[c.sum_dof] = values.get(c.sum_dof, 0) + 1
        if len(net.nodes) <= 12:
            small += 1
            ref = brute_force_classify(net)
            if (ref.case, ref.sum_dof) != (c.case, c.sum_dof):
                disagree.append(k)
    elapsed = time.perf_counter() - start
    ok = (
        len(suite) >= 200
        and set(values) <= {1, Fraction(3, 2), 2}
        and not disagree
        and small > 0
        and elapsed <= 300
    )
    spread = ", ".join(f"{v}:{n}" for v, n in sorted(values.items()))
    record(1, "sum-DoF trichotomy", ok,
           f"{len(suite)} networks, values {{{spread}}}, {small} checked against brute force, "
           f"{len(disagree)} disagreements, {elapsed:.1f}s")
    assert ok


def test_2_scheme_slopes_match_classification(classified):
    bad, counts = [], {"B": 0, "A": 0, "C": 0, "directive": 0}
    for k, (net, c) in enumerate(classified):
        if c.case == "disconnected":
            continue
        out = synthesize(net, c)
        if isinstance(out, ReductionDirective):
            counts["directive"] += 1
            continue
        slope = estimate_dof(net, out).dof_slope
        if c.case in ("B", "B'"):
            counts["B"] += 1
            if abs(slope - 2.0) > 0.1:
                bad.append((k, c.case, slope))
        elif c.case in ("A", "A'"):
            counts["A"] += 1
            if abs(slope - 1.0) > 0.1:
                bad.append((k, c.case, slope))
        else:
            counts["C"] += 1
            if abs(slope - 1.5) > 0.1:
                bad.append((k, c.case, slope))
    fixed = {}
    for name in ("bottle", "c1", "c2"):
        net = fixtures.load(name)
        fixed[name] = estimate_dof(net, synthesize(net)).dof_slope
    ok = (
        not bad
        and abs(fixed["bottle"] - 1.0) <= 0.1
        and abs(fixed["c1"] - 1.5) <= 0.05
        and abs(fixed["c2"] - 1.5) <= 0.05
    )
    record(2, "scheme slopes agree with sum-DoF", ok,
           f"B/B' {counts['B']}, A {counts['A']}, C {counts['C']}, 2x2x2 directives {counts['directive']}; "
           f"FIX-C1 {fixed['c1']:.4f}, FIX-C2 {fixed['c2']:.4f}, FIX-BOTTLE {fixed['bottle']:.4f}; "
           f"{len(bad)} out of tolerance"
           + "".join(f"; seed {k} {case} slope {sl:.3f}" for k, case, sl in bad))
    assert ok


DIAG_CLASSES = {
    "single-key": "cond",
    "two-key": "twokey",
    "three-column": "threecol",
    "butterfly": "butterfly",
    "grail": "grail",
}


def test_3_diagonalization_suites():
    draws, failures = 100, {}
    for construction, name in DIAG_CLASSES.items():
        base = fixtures.load(name)
        rng = np.random.default_rng(2024)
        failures[construction] = 0
        for _ in range(draws):
            net = base.redraw(rng)
            out = synthesize(net)
            if isinstance(out, ReductionDirective) or out.label != construction:
                failures[construction] += 1
                continue
            rep = verify_scheme(net, out)
            if not (rep.off_diagonal <= 1e-8 * rep.frobenius and rep.min_diagonal >= 1e-6):
                failures[construction] += 1
    ok = not any(failures.values())
    record(3, "diagonalization suites", ok,
           ", ".join(f"{k} {draws - v}/{draws}" for k, v in failures.items()))
    assert ok


def test_4_cond_effective_gains():
    base = fixtures.load("cond")
    rng = np.random.default_rng(7)
    worst_rel, worst_zero = 0.0, 0.0
    for _ in range(20):
        net = base.redraw(rng)
        want = cond_gain(net, 2) * cond_gain(net, 7) + cond_gain(net, 3) * cond_gain(net, 8)
        got = effective_gain(net, None, "s2", "v3")
        worst_rel = max(worst_rel, abs(got - want) / abs(want))
        worst_zero = max(worst_zero, abs(effective_gain(net, None, "v2", "d2")))
    ok = worst_rel <= 1e-12 and worst_zero == 0.0
    record(4, "condensed gain identities", ok,
           f"20 draws, worst relative error {worst_rel:.2e}, largest h(v2,d2) {worst_zero}")
    assert ok


def _points(pts):
    return ",".join(f"({x},{y})" for x, y in pts)


def test_5_region_consistency(classified):
    mismatched = 0
    for net, c in classified:
        if classify_region(net, c).max_sum() != c.sum_dof:
            mismatched += 1
    r1 = classify_region(fixtures.load("c1"))
    r2 = classify_region(fixtures.load("c2"))
    c1_ok = r1.region == "III" and r1.vertices == [(1, half), (half, 1)]
    c2_ok = (r2.region, r2.vertices) in (("IV", CORNERS["IV"]), ("V", CORNERS["V"]))
    ok = not mismatched and c1_ok and c2_ok
    record(5, "region consistency", ok,
           f"{len(classified)} networks, {mismatched} max-sum mismatches; FIX-C1 {r1.region} {_points(r1.vertices)}; "
           f"FIX-C2 {r2.region} {_points(r2.vertices)}")
    assert ok


IA_GRID = (1e6, 1e8, 1e10, 1e12)


@pytest.fixture(scope="module")
def ia_parts():
    parts = {}
    worst = 0.0
    for name in ("c1", "c1-late"):
        net = fixtures.load(name)
        ia = synth_ia(net, classify_sum_dof(net))
        worst = max(worst, max(ia_alignment_residuals(ia).values()))
        parts.setdefault("cases", set()).add(ia.case)
    parts["identities"] = (worst <= 1e-12 and parts["cases"] == {1, 2}, f"worst residual {worst:.1e}")

    dof = synth_ia(fixtures.load("c1-late"), classify_sum_dof(fixtures.load("c1-late"))).per_message_dof
    parts["dof"] = (dof == Fraction(3, 7), f"per-message DoF {dof}")

    eps = 0.1
    slopes = {}
    for name in ("c1", "c1-late"):
        net = fixtures.load(name)
        ia = synth_ia(net, classify_sum_dof(net), eps=Fraction(1, 10))
        for role, s in dmin_slopes(ia, IA_GRID).items():
            slopes[f"{name}:{role}"] = s
    off = {k: s for k, s in slopes.items() if abs(s - eps / 2) > 0.05 * eps / 2}
    parts["slope"] = (
        not off,
        "d_min slopes " + ", ".join(f"{k} {s:.4f}" for k, s in slopes.items()) + f" vs {eps / 2}",
    )

    net = fixtures.load("c1")
    ia = synth_ia(net, classify_sum_dof(net), eps=Fraction(1, 4))
    ratios = []
    for P in IA_GRID:
        a, b = ia_dmin(ia, P), ia_dmin(ia, 2 * P)
        ratios += [b[k] / a[k] for k in a]
    target = 2 ** (0.25 / 2)
    far = [r for r in ratios if abs(r - target) > 0.1 * target]
    parts["doubling"] = (
        not far,
        f"doubled-P d_min ratios {min(ratios):.3f}..{max(ratios):.3f} vs {target:.4f}",
    )

    rep = ia_symbol_error(net, ia, 1e12, trials=10_000, seed=0)
    parts["monte_carlo"] = (
        rep.symbol_error < 1e-2,
        f"symbol error {rep.symbol_error:.4f} at P=1e12, eps=1/4, 1e4 trials",
    )
    return parts


def test_6_alignment_properties(ia_parts):
    names = ("identities", "dof", "slope", "doubling", "monte_carlo")
    ok = all(ia_parts[k][0] for k in names)
    record(6, "alignment properties", ok,
           "; ".join(f"{k} {'ok' if ia_parts[k][0] else 'FAILED'}: {ia_parts[k][1]}" for k in names))
    assert ok


@pytest.mark.parametrize("part", ["identities", "dof", "slope", "doubling", "monte_carlo"])
def test_6_part(ia_parts, part):
    ok, detail = ia_parts[part]
    assert ok, detail


def test_7_oracle_suites():
    nets = [random_network(seed, max_nodes=12) for seed in range(1000, 1150)]
    rep = audit_suite(nets)
    by_check = {k: 0 for k in rep.checks}
    for name, _ in rep.mismatches:
        by_check[name] += 1
    needed = ("manageability", "disjoint_paths", "claim1_coverage")
    ok = rep.ok and all(rep.checks.get(k, 0) > 0 for k in needed) and len(nets) >= 100
    assert all(len(n.nodes) <= oracle.MAX_NODES for n in nets)
    record(7, "oracle suites", ok,
           f"{len(nets)} networks; " + ", ".join(
               f"{k} {rep.checks[k] - by_check[k]}/{rep.checks[k]}" for k in sorted(rep.checks)))
    assert ok

