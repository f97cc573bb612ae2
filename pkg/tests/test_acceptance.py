"""End-to-end acceptance checks for the bundled example.

Each test prints one ``criterion N: PASS|FAIL`` line (visible without ``-s``)
before asserting.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from stabcert.certifier import (
    certify,
    remainder_bound_auto,
    solve_delta,
)
from stabcert.errors import StabilityConditionError
from stabcert.gronwall import SampledFunction, gronwall_bound
from stabcert.linalg import eigendecompose, eta_condition
from stabcert.scenarios import example1_manual_model, example1_system
from stabcert.simulator import integrate, integrate_batch, rk4_integrate, sphere_directions, sweep_roa
from stabcert.synthesis import place_poles, synthesize
from stabcert.sysmodel import PerturbationSpec, remainder_evaluate

A = np.array([[0.0, 1.0], [0.0, 0.0]])
B = np.array([[0.0], [1.0]])


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"
    return _report


@pytest.fixture(scope="module")
def system():
    return example1_system()


@pytest.fixture(scope="module")
def synth(system):
    return synthesize(system)


@pytest.fixture(scope="module")
def cert(system, synth):
    return certify(system, example1_manual_model(synth.k_norm), synth=synth)


def unit_ball(count, radius, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, 2))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * np.sqrt(rng.uniform(0, 1, (count, 1)))


def containment(system, synth, cert, X0):
    res = integrate_batch(system, synth, X0, (0.0, 60.0), 1e-3, cert=cert)
    ok = (np.all(res.final_norm < 1e-6) and not res.epsilon0_violations.any()
          and not res.envelope_violations.any() and not res.blew_up.any())
    detail = (f"runs={len(X0)} max|x|={res.max_norm.max():.3g} "
              f"max final={res.final_norm.max():.3g} eps0 viol={res.epsilon0_violations.sum()} "
              f"env viol={res.envelope_violations.sum()}")
    return ok, detail


def test_criterion_1_gain(report):
    t = time.perf_counter()
    s = place_poles(A, B, [-0.5, -0.75])
    elapsed = time.perf_counter() - t
    ok = (np.max(np.abs(s.K - [[0.375, 1.25]])) <= 1e-9 and abs(s.k_norm - 1.3050) <= 5e-5)
    report(1, ok, f"K={s.K.ravel().tolist()} |K|={s.k_norm:.6f} ({elapsed * 1e3:.1f} ms)")


def test_criterion_2_eta(report):
    eta = eta_condition(eigendecompose(A - B @ np.array([[0.375, 1.25]])))
    report(2, abs(eta - 11.0902) <= 2e-2, f"eta={eta:.7f}")


def test_criterion_3_certificate(report, system, synth):
    t = time.perf_counter()
    c = certify(system, example1_manual_model(synth.k_norm))
    elapsed = time.perf_counter() - t
    ok = (abs(c.gamma0_max - 0.0196) <= 2e-4 and abs(c.epsilon0 - 0.0674) <= 5e-4
          and abs(c.delta - 0.0059) <= 1e-4 and c.model.rho == pytest.approx(4.3050, abs=1e-4))
    report(3, ok, f"Gamma0={c.gamma0_max:.6f} eps0={c.epsilon0:.6f} delta={c.delta:.6f} "
                  f"({elapsed * 1e3:.1f} ms)")


def test_criterion_4_containment(report, system, synth, cert):
    # A small margin makes the envelope decay, which is the sharper check;
    # its delta is below the limiting one so every start is inside both balls.
    strict = certify(system, example1_manual_model(synth.k_norm), margin=0.05, synth=synth)
    radii = strict.delta * np.array([0.25, 0.5, 0.75, 1.0])
    X0 = np.vstack([r * sphere_directions(2, 50, seed=4) for r in radii])
    t = time.perf_counter()
    ok, detail = containment(system, synth, strict, X0)
    elapsed = time.perf_counter() - t
    ok &= bool(np.linalg.norm(X0, axis=1).max() <= cert.delta)
    report(4, ok and elapsed < 60, f"{detail} alpha2={strict.alpha2:.3g} ({elapsed:.1f} s)")


def test_criterion_5_unperturbed_limit(report, synth, cert):
    d0 = solve_delta(cert.epsilon0, cert.eta, 0.0, cert.lambda_m, cert.gamma)
    c_max = cert.epsilon0 * (cert.lambda_m - cert.gamma) / cert.eta
    ds = [solve_delta(cert.epsilon0, cert.eta, c, cert.lambda_m, cert.gamma)
          for c in np.linspace(0.0, 0.99 * c_max, 10)]
    ok = abs(d0 - cert.epsilon0 / cert.eta) <= 1e-12 and all(b < a for a, b in zip(ds, ds[1:]))
    report(5, ok, f"delta(c=0)={d0:.10g} eps0/eta={cert.epsilon0 / cert.eta:.10g}")


def test_criterion_6_gronwall(report, system, synth):
    rng = np.random.default_rng(6)
    grid = np.linspace(0.0, 5.0, 5001)
    worst = np.inf
    all_ok = True
    for _ in range(100):
        v = rng.uniform(0.0, 2.0)
        b = rng.uniform(-1.0, v)
        C = rng.uniform(0.1, 5.0)
        a = rng.uniform(0.0, C)
        w0, r = rng.uniform(0.0, 3.0), rng.uniform(0.0, 4.0)
        check = gronwall_bound(SampledFunction(grid, a * np.exp(b * grid)),
                               SampledFunction(grid, np.full_like(grid, v)),
                               SampledFunction(grid, w0 * np.exp(-r * grid)), C)
        all_ok &= check.hypothesis_holds and check.conclusion_holds and check.max_slack >= -1e-6
        worst = min(worst, check.max_slack)

    strict = certify(system, example1_manual_model(synth.k_norm), margin=0.05, synth=synth)
    x0 = 0.9 * strict.delta * np.array([0.6, 0.8])
    traj = integrate(system, synth, x0, (0.0, 20.0), 1e-3)
    t = traj.times
    chain = gronwall_bound(
        SampledFunction(t, np.exp(-strict.lambda_m * t) * traj.norms),
        SampledFunction(t, np.full_like(t, strict.eta * (strict.theta + strict.sigma))),
        SampledFunction(t, strict.eta * strict.c * np.exp((strict.gamma - strict.lambda_m) * t)),
        strict.eta * np.linalg.norm(x0),
    )
    ok = all_ok and chain.hypothesis_holds and chain.conclusion_holds
    report(6, ok, f"worst random slack={worst:.3g} chain slack={chain.max_slack:.3g}")


def test_criterion_7_sigma_extension(report, system, synth):
    threshold = -synth.lambda_m / synth.eta
    model = example1_manual_model(synth.k_norm)
    phases = [("constant", {"direction": [0.0, 1.0]}), ("radial", {})]
    details, ok = [], True
    for k, (phase, params) in enumerate(phases):
        pert = PerturbationSpec(sigma=0.004, c=0.001, gamma=-10.0, phase=phase, params=params)
        variant = replace(system, perturbation=pert)
        c = certify(variant, model, synth=synth)
        X0 = c.delta * np.vstack([r * sphere_directions(2, 5, seed=70 + k)
                                  for r in np.linspace(0.2, 1.0, 5)])
        run_ok, detail = containment(variant, synth, c, X0)
        ok &= run_ok
        details.append(f"{phase}: delta={c.delta:.4g} {detail}")

    too_big = replace(system, perturbation=PerturbationSpec(sigma=1.1 * threshold, c=0.001,
                                                            gamma=-10.0, phase="radial"))
    try:
        certify(too_big, model, synth=synth)
        ok = False
        details.append("sigma above threshold certified")
    except StabilityConditionError as exc:
        ok &= "sigma" in exc.inequality
        details.append(f"sigma={1.1 * threshold:.4g} rejected: {exc.inequality}")
    report(7, ok, "; ".join(details))


def test_criterion_8_integrator_order(report):
    errs = [abs(rk4_integrate(lambda t, x: -x, [1.0], 0.0, 5.0, dt).states[-1, 0] - np.exp(-5.0))
            for dt in (0.1, 0.05)]
    ratio = errs[0] / errs[1]
    report(8, 14.0 <= ratio <= 18.0, f"error ratio={ratio:.4f}")


def test_criterion_9_remainder_validity(report, system, synth):
    details, ok = [], True
    for seed, model in enumerate([example1_manual_model(synth.k_norm),
                                  remainder_bound_auto(system.field, synth.K)]):
        c = certify(system, model, synth=synth)
        X = unit_ball(100_000, c.epsilon0, seed=90 + seed)
        gap = (np.linalg.norm(remainder_evaluate(system.field, synth.K, X), axis=1)
               - c.gamma0 * np.linalg.norm(X, axis=1))
        ok &= gap.max() <= 0
        details.append(f"{model.source}: eps0={c.epsilon0:.4g} max gap={gap.max():.3g}")
    report(9, ok, "; ".join(details))


def test_criterion_10_conservatism(report, system, synth, cert, capsys):
    radii = [0.5 * cert.delta, cert.delta] + list(np.geomspace(2 * cert.delta, 1.0, 10))
    res = sweep_roa(system, synth, cert, radii, 8, dt=2e-3, check=False)
    s = res.summary()
    first = s["smallest_non_converged_radius"]
    ratio = "n/a" if first is None else f"{s['conservatism_ratio']:.3g}"
    report(10, True, f"delta={cert.delta:.4g} smallest non-converged radius={first} "
                     f"ratio={ratio} (informational)")
