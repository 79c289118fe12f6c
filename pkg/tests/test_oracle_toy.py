"""Standalone brute-force oracle for the two-step single-generator toy.

Enumerates every candidate envelope on a 0.5 kW grid and keeps the ones
whose four corner points survive the box, ordering, initial-condition and
worst-case corner-transition ramp checks.  The frozen optima here anchor
the LP-based results elsewhere in the suite; this module deliberately
imports nothing from the package.
"""

import itertools

import numpy as np
import pytest

P_MIN, P_MAX = 0.0, 10.0
RAMP_UP = RAMP_DN = 2.0
P_INIT = 5.0
GRID = np.arange(P_MIN, P_MAX + 0.25, 0.5)


def _ramp_ok(prev, nxt):
    return (nxt - prev) <= RAMP_UP + 1e-12 and (prev - nxt) <= RAMP_DN + 1e-12


def brute_force_area(with_ramps: bool) -> tuple[float, tuple]:
    """Max envelope area over the 0.5 kW grid, and one argmax."""
    best = -1.0
    best_env = None
    for up1, dn1 in itertools.product(GRID, GRID):
        if dn1 > up1:
            continue
        if with_ramps:
            # transition from the initial operating point into step 1
            if not (_ramp_ok(P_INIT, up1) and _ramp_ok(P_INIT, dn1)):
                continue
        for up2, dn2 in itertools.product(GRID, GRID):
            if dn2 > up2:
                continue
            if with_ramps:
                # all four corner transitions between step 1 and step 2,
                # plus both same-envelope transitions
                corners = [(up1, up2), (up1, dn2), (dn1, up2), (dn1, dn2)]
                if not all(_ramp_ok(a, b) for a, b in corners):
                    continue
            area = (up1 - dn1) + (up2 - dn2)
            if area > best + 1e-12:
                best = area
                best_env = (up1, up2, dn1, dn2)
    return best, best_env


def test_baseline_toy_area_is_4():
    area, _ = brute_force_area(with_ramps=True)
    assert area == pytest.approx(4.0, abs=1e-12)


def test_wide_first_step_envelope_is_an_optimum():
    # (7,5)/(3,5) attains the optimum: feasible corners and area 4.  The
    # optimum is not unique (e.g. (3,5)/(3,1) also scores 4), so LP-side
    # tests must only pin the area.
    up, dn = (7.0, 5.0), (3.0, 5.0)
    assert _ramp_ok(P_INIT, up[0]) and _ramp_ok(P_INIT, dn[0])
    for a, b in itertools.product((up[0], dn[0]), (up[1], dn[1])):
        assert _ramp_ok(a, b)
    assert (up[0] - dn[0]) + (up[1] - dn[1]) == pytest.approx(4.0)


def test_noramp_toy_area_is_20():
    area, _ = brute_force_area(with_ramps=False)
    assert area == pytest.approx(20.0, abs=1e-12)


def test_vertex_trajectory_of_noramp_envelope_violates_ramps():
    # (10, 0) sits inside the no-ramp envelope but needs a downward ramp of
    # 10 kW against a 2 kW limit: the counterexample behind the MC demo.
    assert not _ramp_ok(10.0, 0.0)
    assert 10.0 - 0.0 - RAMP_DN == pytest.approx(8.0)
