import dataclasses
import logging

import numpy as np
import pytest

from polariton_fsrs.signals import (
    GridBudgetError,
    SeparationError,
    build_model,
    ct_kernel,
    doorway_states,
    evaluate,
    factorized_window_signal,
    initial_superposition,
    raman_kernel,
    signal_1d,
    signal_2d,
    signal_ct,
    split_channels,
    state_contributions,
)
from polariton_fsrs.bath import BathSpec
from polariton_fsrs.response import PulseSpec

from conftest import make_spec

SHIFT = np.arange(0.0, 501.0)


def local_maxima(y, rel=0.02):
    return [k for k in range(1, len(y) - 1) if y[k] > y[k - 1] and y[k] > y[k + 1] and y[k] > rel * y.max()]


def test_split_channels_exact(model_plus):
    rho = model_plus.propagator.apply(initial_superposition(model_plus), 0.2)
    d, o = split_channels(rho)
    np.testing.assert_array_equal(d + o, rho)
    assert np.all(np.diagonal(o) == 0)
    assert np.count_nonzero(d - np.diag(np.diagonal(d))) == 0


def test_diagonal_state_has_no_coherence_channel(model_plus, pulse):
    rho = np.diag(np.diagonal(initial_superposition(model_plus)))
    g = signal_1d(model_plus, pulse, SHIFT, [1.0], rho0=rho)
    assert np.max(np.abs(g.coherence)) == 0


def test_off_diagonal_state_has_no_population_channel(model_plus, pulse):
    _, off = split_channels(initial_superposition(model_plus))
    g = signal_1d(model_plus, pulse, SHIFT, [1.0, 2.0], rho0=off)
    assert np.max(np.abs(g.population)) < 1e-14 * max(1.0, np.max(np.abs(g.coherence)))


def test_channels_add_up_and_are_real(model_plus, pulse):
    g = signal_1d(model_plus, pulse, SHIFT, [0.03, 0.5, 5.0])
    assert np.isrealobj(g.total)
    assert np.max(np.abs(g.total - g.population - g.coherence)) <= 1e-10 * np.max(np.abs(g.total))
    assert all(np.isfinite(c).all() and c.dtype == np.float64 for c in (g.total, g.population, g.coherence))
    k = raman_kernel(model_plus, pulse, SHIFT)
    rho = model_plus.propagator.apply(initial_superposition(model_plus), 0.5)
    # absorptive part of the complex response is the reported signal
    np.testing.assert_allclose(np.imag(np.einsum("vcd,cd->v", k, rho)) / np.pi, g.total[1], atol=1e-15)


def test_zero_alpha_gives_zero_signal(pulse):
    spec = make_spec(1.25, near_edge_dipoles=0.0)
    model = build_model(spec, BathSpec())
    g = signal_1d(model, pulse, SHIFT, [1.0])
    assert not np.any(g.total)


@pytest.mark.parametrize("det,expected", [(1.25, (88, 130, 219)), (0.0, (107, 214))])
def test_peak_positions(det, expected, pulse):
    model = build_model(make_spec(det), BathSpec())
    g = signal_1d(model, pulse, SHIFT, [1.0])
    peaks = local_maxima(g.population[0])
    assert len(peaks) == len(expected)
    tol = 0.03 if det else 0.05
    for got, ref in zip(peaks, expected):
        assert got == pytest.approx(ref, rel=tol)
    analytic = sorted(set(np.round(model.peak_frequencies(), 6)))
    for got, ref in zip(peaks, analytic):
        assert abs(got - ref) <= 1.0


def test_up_slice_early_peaks(model_plus, pulse):
    lv = model_plus.levels
    g = signal_2d(model_plus, pulse, SHIFT, [lv.energies[lv.up]], [0.1, 0.93])
    early = g.population[0, 0]
    top2 = sorted(np.argsort([early[k] for k in local_maxima(early)])[-2:])
    peaks = [local_maxima(early)[i] for i in top2]
    assert peaks[0] == pytest.approx(88, rel=0.03) and peaks[1] == pytest.approx(218, rel=0.03)
    # the ds-lp line grows as the dark manifold fills
    g = signal_2d(model_plus, pulse, SHIFT, [lv.energies[lv.up]], [0.1, 0.93, 5.0, 20.0])
    k_dl = int(round(model_plus.peak_frequencies()[1]))
    assert np.all(np.diff(g.population[:, 0, k_dl]) > 0)


def test_pair_scaling(model_plus, pulse):
    """The up-lp line responds to rho_up + rho_lp jointly."""
    lv = model_plus.levels
    w = model_plus.peak_frequencies()[2]
    k = raman_kernel(model_plus, pulse, [w])
    base = np.zeros((lv.dim, lv.dim))
    base[lv.up, lv.up], base[lv.lp, lv.lp] = 0.3, 0.2
    s0 = evaluate(k, base)[0]
    assert evaluate(k, 2.5 * base)[0] == pytest.approx(2.5 * s0, rel=1e-12)
    # moving weight between the two members leaves the dominant term unchanged
    moved = base.copy()
    moved[lv.up, lv.up], moved[lv.lp, lv.lp] = 0.2, 0.3
    assert evaluate(k, moved)[0] == pytest.approx(s0, rel=0.02)


def test_factorised_operator_form(model_plus, pulse):
    rho = np.diag(np.real(np.diagonal(model_plus.propagator.apply(initial_superposition(model_plus), 2.0))))
    kern = evaluate(raman_kernel(model_plus, pulse, SHIFT), rho)
    np.testing.assert_allclose(factorized_window_signal(model_plus, pulse, SHIFT, rho), kern, atol=1e-12 * np.abs(kern).max())


def test_coherence_oscillates_at_up_lp_gap(model_plus, pulse):
    t = np.arange(0.0, 0.2, 0.002)
    k = raman_kernel(model_plus, pulse, [model_plus.peak_frequencies()[0]])
    rho0 = initial_superposition(model_plus)
    c = np.array([evaluate(k, split_channels(model_plus.propagator.apply(rho0, x))[1])[0] for x in t])
    spec = np.abs(np.fft.rfft((c - c.mean()) * np.hanning(len(c)), n=1 << 16))
    freq = 2 * np.pi * np.fft.rfftfreq(1 << 16, d=t[1] - t[0])
    assert freq[np.argmax(spec)] == pytest.approx(model_plus.peak_frequencies()[2], abs=2.0)


def test_coherence_vanishes(model_plus, pulse):
    g = signal_1d(model_plus, pulse, SHIFT, [0.0, 1.0, 5.0])
    c0 = np.max(np.abs(g.coherence[0]))
    assert c0 > 0
    assert np.max(np.abs(g.coherence[1])) < 0.05 * c0
    assert np.max(np.abs(g.coherence[2])) < 1e-6 * c0


def test_threads_do_not_change_results(model_plus, pulse):
    pump = np.linspace(2600, 2950, 12)
    a = signal_2d(model_plus, pulse, SHIFT, pump, [0.5, 1.0, 5.0, 20.0], threads=1)
    b = signal_2d(model_plus, pulse, SHIFT, pump, [0.5, 1.0, 5.0, 20.0], threads=4)
    np.testing.assert_array_equal(a.total, b.total)


def test_2d_shape_and_additivity(model_plus, pulse):
    pump = np.linspace(2600, 2950, 7)
    g = signal_2d(model_plus, pulse, SHIFT, pump, [1.0, 5.0])
    assert g.total.shape == (2, 7, SHIFT.size)
    assert np.max(np.abs(g.total - g.population - g.coherence)) <= 1e-10 * np.max(np.abs(g.total))


def test_budget_error(model_plus, pulse):
    with pytest.raises(GridBudgetError, match="coarsen"):
        signal_2d(model_plus, pulse, SHIFT, np.arange(100.0), [1.0, 2.0], max_points=10_000)


def test_separation_flag(model_plus, pulse, caplog):
    with caplog.at_level(logging.WARNING):
        g = signal_1d(model_plus, pulse, SHIFT[:10], [0.03, 1.0])
    assert g.valid.tolist() == [False, True]
    assert "overlap" in caplog.text
    with pytest.raises(SeparationError):
        signal_1d(model_plus, pulse, SHIFT[:10], [0.03], strict=True)


def test_normalized(model_plus, pulse):
    g = signal_1d(model_plus, pulse, SHIFT, [5.0, 1.0]).normalized()
    assert np.max(np.abs(g.total[1])) == pytest.approx(1.0)
    assert g.meta["normalization"] > 0


def test_doorway_dark_weight_zero(model_plus):
    d = doorway_states(model_plus, [2700.0, 2800.0])
    dark = model_plus.levels.dark
    assert np.max(np.abs(d[:, dark][:, :, dark])) < 1e-20


def test_dark_rotation_signals():
    from polariton_fsrs.validation import rebuild, rotate_dark

    spec = make_spec(1.25, ct_energy=1.6)
    pulse = PulseSpec()
    base = build_model(spec, BathSpec())
    rot = build_model(spec, BathSpec(), rebuild(spec, rotate_dark(base.basis, np.random.default_rng(7))))
    pump = [2664.7, 2883.8]
    for fn in (signal_2d, signal_ct):
        a = fn(base, pulse, SHIFT, pump, [1.0, 20.0]).total
        b = fn(rot, pulse, SHIFT, pump, [1.0, 20.0]).total
        np.testing.assert_allclose(a, b, atol=1e-10 * np.max(np.abs(a)))


# charge-transfer spectra

def test_ct_requires_level(model_plus, pulse):
    with pytest.raises(ValueError, match="charge-transfer"):
        ct_kernel(model_plus, pulse, SHIFT)


def test_ct_peaks(model_ct, pulse):
    lv = model_ct.levels
    g = signal_ct(model_ct, pulse, SHIFT, [lv.energies[lv.up]], [1.0])
    peaks = local_maxima(g.population[0, 0])
    assert len(peaks) == 3
    for got, ref in zip(peaks, (230, 360, 450)):
        assert got == pytest.approx(ref, rel=0.03)
    for got, ref in zip(peaks, model_ct.ct_peak_frequencies()):
        assert abs(got - ref) <= 1.0


def test_ct_zero_dipoles(pulse):
    model = build_model(make_spec(1.25, ct_energy=1.6, ct_dipoles=0.0), BathSpec())
    g = signal_ct(model, pulse, SHIFT, [2700.0], [1.0])
    assert not np.any(g.total)


def test_ct_lp_slice_has_no_up_peak(model_ct, pulse):
    lv = model_ct.levels
    delays = [0.03, 0.93, 5.0, 20.0]
    pump = lv.energies[lv.lp]
    g = signal_ct(model_ct, pulse, SHIFT, [pump], delays)
    k_up = int(round(model_ct.ct_peak_frequencies()[2]))
    kern = ct_kernel(model_ct, pulse, SHIFT)
    door = doorway_states(model_ct, [pump])[0]
    for i, t in enumerate(delays):
        row = g.population[i, 0]
        parts = state_contributions(kern, model_ct.propagator.apply(door, t))
        np.testing.assert_allclose(parts.sum(axis=0), row, atol=1e-12 * row.max())
        assert parts[lv.up, k_up] < 0.01 * row.max()


@pytest.mark.parametrize("state", ["up", "lp", "dark"])
def test_ct_peak_linear_in_single_population(model_ct, pulse, state):
    lv = model_ct.levels
    idx = {"up": lv.up, "lp": lv.lp, "dark": lv.dark[0]}[state]
    col = {"up": 2, "lp": 0, "dark": 1}[state]
    w = model_ct.ct_peak_frequencies()[col]
    k = ct_kernel(model_ct, pulse, [w])
    x = np.linspace(0.0, 1.0, 11)
    y = []
    for p in x:
        rho = np.zeros((lv.dim, lv.dim))
        rho[lv.lp, lv.lp] = rho[lv.up, lv.up] = 0.1
        rho[idx, idx] = p
        y.append(evaluate(k, rho)[0])
    r = np.corrcoef(x, y)[0, 1]
    assert r**2 > 0.999


def test_ct_signal_has_no_parametric_partner(model_ct, pulse):
    """A peak at w_{e,ct} sees rho_ee only: zero population in e kills it."""
    lv = model_ct.levels
    w = model_ct.ct_peak_frequencies()[0]
    k = ct_kernel(model_ct, pulse, [w])
    rho = np.zeros((lv.dim, lv.dim))
    rho[lv.up, lv.up] = 1.0
    with_up = evaluate(k, rho)[0]
    rho2 = np.zeros((lv.dim, lv.dim))
    rho2[lv.lp, lv.lp] = 1.0
    assert evaluate(k, rho2)[0] > 20 * abs(with_up)


def test_spectrum_grid_replace_is_dataclass(model_plus, pulse):
    g = signal_1d(model_plus, pulse, SHIFT[:5], [1.0])
    assert dataclasses.is_dataclass(g)
    assert g.channel("population") is g.population
