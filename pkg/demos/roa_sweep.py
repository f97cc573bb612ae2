# How conservative is delta?  Start on circles of growing radius and see
# where trajectories first fail to converge.  Nothing here is asserted;
# the gap between delta and the empirical boundary is the point.
import numpy as np

from stabcert import certify, example1_system, synthesize
from stabcert.scenarios import example1_manual_model
from stabcert.simulator import sweep_roa


def main():
    system = example1_system()
    synth = synthesize(system)
    cert = certify(system, example1_manual_model(synth.k_norm), synth=synth)

    radii = [0.5 * cert.delta, cert.delta] + list(np.geomspace(2 * cert.delta, 1.0, 10))
    res = sweep_roa(system, synth, cert, radii, 8, dt=2e-3, check=False)

    print("  radius   converged/runs   max |x|")
    for r in radii:
        rows = [row for row in res.rows if row.radius == r]
        ok = sum(row.converged for row in rows)
        peak = max(row.max_norm for row in rows)
        print(f"{r:8.4f}   {ok:3d}/{len(rows):<3d}          {peak:.3g}")

    s = res.summary()
    print(f"\ndelta = {cert.delta:.4g}")
    print(f"smallest non-converged radius = {s['smallest_non_converged_radius']}")
    if s["conservatism_ratio"] is not None:
        print(f"ratio = {s['conservatism_ratio']:.1f}")


if __name__ == "__main__":
    main()
