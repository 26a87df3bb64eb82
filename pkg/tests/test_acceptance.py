"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -s`` (lines are printed even without -s).
"""

import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import curve_fit

from polariton_fsrs.bath import BathSpec, transfer_rates
from polariton_fsrs.model import build_polariton_basis
from polariton_fsrs.resolver import compare_with_master
from polariton_fsrs.response import PulseSpec, doorway_freq, doorway_time, f_function, raman_overlap, window_w
from polariton_fsrs.signals import (
    build_model,
    ct_kernel,
    doorway_states,
    evaluate,
    initial_superposition,
    raman_kernel,
    signal_2d,
    signal_ct,
    split_channels,
    state_contributions,
)
from polariton_fsrs.validation import propagator_checks, steady_state_check

from conftest import make_spec
from test_response import _doorway_points, f_quadrature, qawf, random_points

SHIFT = np.arange(0.0, 501.0)


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


def within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def test_criterion_1_eigenstructure(report):
    start = time.perf_counter()
    plus = build_polariton_basis(make_spec(1.25))
    zero = build_polariton_basis(make_spec(0.0))
    elapsed = time.perf_counter() - start
    ud, dl, ul = plus.gap("up", "ds"), plus.gap("ds", "lp"), plus.gap("up", "lp")
    merged = zero.gap("up", "ds")
    ok = (
        within(ud, 88.0, 0.03) and within(dl, 130.0, 0.03)
        and 213.0 * 0.95 <= ul <= 218.0 * 1.05
        and within(merged, 107.0, 0.05) and abs(zero.gap("ds", "lp") - merged) < 1e-9
        and elapsed < 1.0
    )
    report(1, "eigenstructure", ok,
           f"up-ds {ud:.2f}, ds-lp {dl:.2f}, up-lp {ul:.2f}, zero-detuning {merged:.2f} rad/ps, {elapsed * 1e3:.1f} ms")


def test_criterion_2_dipoles(report):
    basis = build_polariton_basis(make_spec(1.25))
    mu = np.abs(basis.dipoles_ge)
    up, lp, dark = mu[-1], mu[0], mu[1:-1]
    norm = np.sqrt(np.sum(mu**2))
    ok = abs(up - 2.443) <= 1e-3 and abs(lp - 2.008) <= 1e-3 and abs(norm - 3.162) <= 1e-3 and dark.max() < 1e-12
    report(2, "dipoles", ok, f"mu_up {up:.4f}, mu_lp {lp:.4f}, norm {norm:.4f}, max dark {dark.max():.1e}")


def test_criterion_3_propagator(report):
    start = time.perf_counter()
    model = build_model(make_spec(1.25), BathSpec())
    checks = propagator_checks(model) + [steady_state_check(model)]
    elapsed = time.perf_counter() - start
    ok = all(c.passed for c in checks) and elapsed < 10.0
    detail = ", ".join(f"{c.name} {c.value:.1e}" for c in checks)
    report(3, "propagator properties", ok, f"{detail}; {elapsed:.2f} s")


def test_criterion_4_oracle(report):
    start = time.perf_counter()
    worst = {}
    fp = list(random_points(20, 101))
    worst["f"] = max(
        abs(f_function(p["v"], p["xi"], p["s2"], p["s3"], p["delta"]) - (ref := f_quadrature(**p))) / abs(ref) for p in fp
    )
    errs = []
    for p in random_points(20, 102):
        pulse = PulseSpec(s2=p["s2"], s3=p["s3"])
        alpha = np.array([[0.0, 0.7], [0.7, 0.0]])
        xi = np.array([[0.0, p["xi"]], [-np.conj(p["xi"]), 0.0]])
        got = window_w(alpha, xi, pulse, [p["v"]])[0, 0, 1]
        z = xi[1, 0]
        ref = 0.7 * qawf(lambda s: np.exp(-(1 / p["s2"] - z.imag) * s), p["v"] - z.real)
        errs.append(abs(got - ref) / abs(ref))
    worst["W"] = max(errs)
    errs = []
    for p in random_points(20, 103):
        z, decay = p["xi"], 2 / p["s2"] + 1 / p["s3"]
        got = raman_overlap(p["v"], p["s2"], p["s3"], p["delta"], zeta=z)
        ref = qawf(lambda t: np.exp(-(decay - z.imag) * t), p["v"] + p["delta"] - z.real)
        errs.append(abs(got - ref) / abs(ref))
    worst["V"] = max(errs)
    errs = []
    for p in _doorway_points(20, 104):
        # D(w0) = int dT0 D(T0) exp(i w0 T0) over the time-domain doorway
        dip, xi = np.array([p["mu"]]), np.array([p["we"] - 1j * p["gamma"]])
        got = doorway_freq(dip, xi, [p["w0"]])[0, 0, 0]
        lim = 40.0 / p["gamma"]

        def integrand(t0, part):
            z = doorway_time(dip, xi, t0)[0, 0] * np.exp(1j * p["w0"] * t0)
            return z.real if part == 0 else z.imag

        ref = sum(
            quad(integrand, a, b, args=(k,), limit=2000, epsabs=1e-13, epsrel=1e-11)[0] * (1 if k == 0 else 1j)
            for k in (0, 1) for a, b in ((-lim, 0.0), (0.0, lim))
        )
        errs.append(abs(got - ref) / abs(ref))
    worst["D"] = max(errs)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-6 and elapsed < 60.0
    report(4, "closed forms vs quadrature", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (20 points each); {elapsed:.1f} s")


def test_criterion_5_resolver(report):
    start = time.perf_counter()
    t = np.linspace(0.0, 20.0, 81)
    worst = {}
    for det in (1.25, -1.25):
        for variant, pump in (("1d", "up"), ("2d", "up"), ("2d", "lp")):
            rep = compare_with_master(make_spec(det), BathSpec(), PulseSpec(), t, variant, pump)
            worst[f"{det:+g}g {variant}{'' if variant == '1d' else '_' + pump}"] = max(rep.max_abs.values())
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 0.05 and elapsed < 120.0
    report(5, "resolver round trip", ok, f"max |dev| {max(worst.values()):.1e} over {len(worst)} runs; {elapsed:.1f} s")


def test_criterion_6_ordering(report):
    model = build_model(make_spec(1.25), BathSpec())
    k = transfer_rates(model.basis, model.bath)  # k[to, from]
    n = len(model.basis.frequencies) - 1
    k_dark, k_lp = k[1:n, n].sum(), k[0, n]  # basis index: lp 0, dark 1..N-1, up N
    pops = {}
    for det in (1.25, -1.25):
        rep = compare_with_master(make_spec(det), BathSpec(), PulseSpec(), [20.0], "2d", "up")
        pops[det] = rep.master[0] / rep.master[0].sum()
    ok = 1 / k_dark < 1 / k_lp and np.argmax(pops[1.25]) == 1 and pops[-1.25][1] > pops[1.25][1]
    report(6, "timescale ordering", ok,
           f"tau up->dark {1 / k_dark:.3f} ps < tau up->lp {1 / k_lp:.3f} ps; "
           f"T=20 ps (up, ds, lp) +1.25g {np.round(pops[1.25], 3).tolist()}, dark share -1.25g {pops[-1.25][1]:.3f}")


def _local_maxima(y, rel=0.02):
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > rel * y.max())) + 1
    return SHIFT[idx]


def test_criterion_7_charge_transfer(report):
    model = build_model(make_spec(1.25, ct_energy=1.6), BathSpec())
    pulse = PulseSpec()
    lv = model.levels
    up_slice = signal_ct(model, pulse, SHIFT, [lv.energies[lv.up]], [1.0]).population[0, 0]
    peaks = _local_maxima(up_slice)
    peaks_ok = len(peaks) == 3 and all(within(p, r, 0.03) for p, r in zip(peaks, (230.0, 360.0, 450.0)))

    delays = [0.03, 0.93, 5.0, 20.0]
    pump = lv.energies[lv.lp]
    slice_ = signal_ct(model, pulse, SHIFT, [pump], delays).population[:, 0]
    kern = ct_kernel(model, pulse, SHIFT)
    door = doorway_states(model, [pump])[0]
    k_up = int(round(model.ct_peak_frequencies()[2]))
    ratio = max(
        state_contributions(kern, model.propagator.apply(door, t))[lv.up, k_up] / slice_[i].max()
        for i, t in enumerate(delays)
    )

    r2 = []
    for idx, col in ((lv.up, 2), (lv.lp, 0), (lv.dark[0], 1)):
        k = ct_kernel(model, pulse, [model.ct_peak_frequencies()[col]])
        x = np.linspace(0.0, 1.0, 11)
        y = []
        for p in x:
            rho = np.zeros((lv.dim, lv.dim))
            rho[lv.lp, lv.lp] = rho[lv.up, lv.up] = 0.1
            rho[idx, idx] = p
            y.append(evaluate(k, rho)[0])
        r2.append(np.corrcoef(x, y)[0, 1] ** 2)
    ok = peaks_ok and ratio < 0.01 and min(r2) > 0.999
    report(7, "charge-transfer spectra", ok,
           f"peaks {peaks.tolist()} rad/ps; up-ct line in lp slice {100 * ratio:.2f}% of max; min R^2 {min(r2):.6f}")


def test_criterion_8_coherence(report):
    model = build_model(make_spec(1.25), BathSpec())
    pulse = PulseSpec()
    target = model.peak_frequencies()[2]
    k = raman_kernel(model, pulse, [model.peak_frequencies()[0]])
    rho0 = initial_superposition(model)
    t = np.arange(0.0, 0.3, 0.001)
    c = np.array([evaluate(k, split_channels(model.propagator.apply(rho0, x))[1])[0] for x in t])
    damped = lambda x, a, w, phi, g: a * np.cos(w * x + phi) * np.exp(-g * x)
    i0 = np.argmax(np.abs(np.fft.rfft(c - c.mean(), n=1 << 15))[1:]) + 1
    w0 = 2 * np.pi * np.fft.rfftfreq(1 << 15, d=t[1] - t[0])[i0]
    (a, w, phi, g), _ = curve_fit(damped, t, c, p0=[np.abs(c).max(), w0, 0.0, 5.0], maxfev=20000)
    step = SHIFT[1] - SHIFT[0]
    full = lambda x: np.max(np.abs(evaluate(raman_kernel(model, pulse, SHIFT),
                                            split_channels(model.propagator.apply(rho0, x))[1])))
    c0, c1 = full(0.0), full(1.0)
    ok = abs(abs(w) - target) <= step and c1 < 0.05 * c0
    report(8, "coherence channel", ok,
           f"fitted {abs(w):.3f} vs up-lp {target:.3f} rad/ps (step {step:g}); |coh(1 ps)|/|coh(0)| {c1 / c0:.1e}")


def test_criterion_9_cube_runtime(report):
    model = build_model(make_spec(1.25), BathSpec())
    shift = np.arange(0.0, 500.0)
    pump = np.linspace(2500.0, 3050.0, 150)
    start = time.perf_counter()
    g = signal_2d(model, PulseSpec(), shift, pump, [0.03, 0.93, 5.0, 20.0])
    elapsed = time.perf_counter() - start
    ok = g.total.shape == (4, 150, 500) and np.all(np.isfinite(g.total)) and elapsed < 300.0
    report(9, "2D cube runtime", ok, f"shape {g.total.shape}, {elapsed:.2f} s")
