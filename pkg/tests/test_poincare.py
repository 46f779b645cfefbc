from math import pi

import numpy as np
import pytest

from contactstab import cycle, sample_maps
from contactstab.poincare import DASHED_EDGE, ERROR, OK, UNDEFINED


@pytest.fixture(scope="module")
def maps2(example2):
    return sample_maps(example2, n_uniform=801, refine_depth=30)


@pytest.fixture(scope="module")
def maps3(example3):
    return sample_maps(example3, n_uniform=801, refine_depth=30)


@pytest.fixture(scope="module")
def maps4(example4):
    return sample_maps(example4, n_uniform=801, refine_depth=30)


def test_return_value_at_observed_crossing(example2):
    out = cycle(example2, 0.948)
    assert out.defined
    assert out.R == pytest.approx(-0.524, abs=0.01)


def test_undefined_region_left(example2):
    for phi in (-1.5, -1.0, -0.5):
        out = cycle(example2, phi)
        assert out.status == UNDEFINED


def test_undefined_boundary_location(maps2):
    # the leftmost defined sample sits at the boundary of the undefined zone
    defined_phis = [s.phi for s in maps2.defined_samples()]
    assert min(defined_phis) == pytest.approx(-0.38, abs=0.02)
    bps = [b for b in maps2.breakpoints if -0.45 < b < -0.3]
    assert bps and bps[0] == pytest.approx(-0.38, abs=0.02)


def test_signature_breakpoints(maps2):
    # sticking-to-slipping change of the first impact, and loss of the
    # sticking episode further right
    assert any(abs(b - 0.54) < 0.02 for b in maps2.breakpoints)
    assert any(abs(b - 1.39) < 0.02 for b in maps2.breakpoints)


def test_constant_R_on_stick_cycles(maps2):
    # cycles whose signature contains a sticking episode or sticking impact
    # pin the return angle to a constant
    plateau = [s for s in maps2.defined_samples()
               if any(item.startswith(("SF", "FS", "FI:S", "IF:S"))
                      for item in s.outcome.signature)]
    assert len(plateau) > 50
    values = [s.outcome.R for s in plateau]
    assert max(values) - min(values) < 1e-9
    assert values[0] == pytest.approx(-0.524, abs=0.01)


def test_constant_G_on_pure_slip_cycles(maps2):
    runs = {}
    for s in maps2.defined_samples():
        sig = s.outcome.signature
        if any(item.startswith(("SF", "FS")) or ":S" in item for item in sig):
            continue
        runs.setdefault(sig, []).append(s.outcome.G)
    checked = 0
    for sig, gs in runs.items():
        if len(gs) >= 3:
            checked += 1
            assert max(gs) - min(gs) < 1e-9, sig
    assert checked >= 1


def test_growth_bound_flat_example(maps4):
    defined = maps4.defined_samples()
    assert len(defined) == len(maps4.samples)
    assert max(s.outcome.G for s in defined) < 0.23


def test_endpoint_limits_below_one(maps3):
    assert maps3.g_minus is not None and maps3.g_minus < 1
    assert maps3.g_plus is not None and maps3.g_plus < 1


def test_interior_plateau_with_growth_above_one(maps3):
    near = [s for s in maps3.defined_samples() if abs(s.phi + 0.7) < 0.05]
    assert near
    for s in near:
        assert s.outcome.R == pytest.approx(-0.7, abs=0.02)
    out = cycle(maps3.config, -0.7)
    assert out.G > 1


def test_scaling_invariance(example2):
    for phi in (-0.2, 0.5, 1.0):
        ref = cycle(example2, phi)
        for beta in (0.1, 10.0):
            out = cycle(example2, phi, beta=beta)
            assert out.status == ref.status
            assert out.R == pytest.approx(ref.R, abs=1e-9)
            assert out.G == pytest.approx(ref.G, abs=1e-9)


def test_x2_invariance(example2):
    for phi in (-0.2, 0.5, 1.0):
        ref = cycle(example2, phi)
        for x2 in (-1.0, 1.0):
            out = cycle(example2, phi, x2=x2)
            assert out.R == pytest.approx(ref.R, abs=1e-9)
            assert out.G == pytest.approx(ref.G, abs=1e-9)


def test_endpoint_secant_slope(example3, example4):
    # near the interval ends the return map's slope approaches the endpoint
    # growth value
    for cfg in (example3, example4):
        maps = sample_maps(cfg, n_uniform=51, refine_depth=10)
        for sign, g in ((1, maps.g_plus), (-1, maps.g_minus)):
            if g is None:
                continue
            phi_a = sign * (pi / 2 - 1e-4)
            phi_b = sign * (pi / 2 - 2e-4)
            a, b = cycle(cfg, phi_a), cycle(cfg, phi_b)
            assert a.defined and b.defined
            secant = (a.R - b.R) / (phi_a - phi_b)
            assert abs(secant - g) / g < 0.02


def test_map_continuity_across_breakpoints(maps2):
    # both maps continuous where defined on both sides of a breakpoint
    h = 1e-6
    for b in maps2.breakpoints:
        left = cycle(maps2.config, b - h)
        right = cycle(maps2.config, b + h)
        if not (left.defined and right.defined):
            continue
        assert abs(left.R - right.R) < 1e-3
        assert abs(left.G - right.G) < 1e-3


def test_no_spurious_jumps_between_samples(maps2, maps3, maps4):
    # jumps must be explainable by the neighboring secant slopes
    for maps in (maps2, maps3, maps4):
        samples = maps.samples
        step = pi / (len(samples) + 1)
        for k in range(1, len(samples) - 2):
            window = samples[k - 1:k + 3]
            if not all(s.outcome.defined for s in window):
                continue
            d_prev = abs(window[1].outcome.R - window[0].outcome.R)
            d_mid = abs(window[2].outcome.R - window[1].outcome.R)
            d_next = abs(window[3].outcome.R - window[2].outcome.R)
            assert d_mid <= 10 * max(d_prev, d_next) + 1e-9


def test_grid_size_respected(example4):
    maps = sample_maps(example4, n_uniform=11, refine_depth=5)
    assert len(maps.samples) == 11


def test_cycle_rejects_out_of_range_angle(example2):
    with pytest.raises(ValueError):
        cycle(example2, pi / 2)
