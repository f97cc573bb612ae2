# One certified run from x0 = (6e-4, 5e-4) under w2 = 0.001 e^{-10t} cos(x1 + x2).
#
# The state never leaves the eps0 ball, stays under the envelope and decays
# at roughly the slowest closed-loop rate.  A CSV is written next to this
# script so the curve can be plotted with any tool.
from pathlib import Path

from stabcert import certify, example1_system, integrate, synthesize
from stabcert.io import write_trajectory_csv
from stabcert.scenarios import example1_manual_model
from stabcert.simulator import envelope_series, verify_envelope


def main():
    system = example1_system()
    synth = synthesize(system)
    cert = certify(system, example1_manual_model(synth.k_norm), synth=synth)

    traj = integrate(system, synth, system.initial_state, (0.0, 30.0), 1e-3)
    report = verify_envelope(traj, cert, epsilon_tilde=1e-4)

    for t in (0, 5, 10, 20, 30):
        k = int(round(t / traj.dt))
        print(f"t = {t:4.1f}   |x| = {traj.norms[k]:.3e}")
    print()
    print(f"max |x|            {report.max_norm:.3e}  (eps0 = {cert.epsilon0:.4f})")
    print(f"envelope breaches  {report.envelope_violations}")
    print(f"fitted decay rate  {report.decay_rate_fit:.4f}  (lambda_m = {cert.lambda_m})")
    print(f"|x| < 1e-4 after   t = {report.t_star:.2f}")

    out = Path(__file__).with_name("trajectory.csv")
    write_trajectory_csv(out, traj, envelope_series(cert, traj), cert.epsilon0)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
