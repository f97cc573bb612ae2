# The envelope comes from a Gronwall-Bellman argument on
#
#   U(t) = e^{-lambda_m t} |x(t)|,  V = eta (Theta + sigma),
#   W(t) = eta c e^{(gamma - lambda_m) t},  C = eta |x0|.
#
# Sample those functions along a simulated run and check both sides of the
# inequality numerically.
import numpy as np

from stabcert import certify, example1_system, integrate, synthesize
from stabcert.gronwall import SampledFunction, gronwall_bound
from stabcert.scenarios import example1_manual_model


def main():
    system = example1_system()
    synth = synthesize(system)
    cert = certify(system, example1_manual_model(synth.k_norm), margin=0.05, synth=synth)

    x0 = 0.9 * cert.delta * np.array([0.6, 0.8])
    traj = integrate(system, synth, x0, (0.0, 20.0), 1e-3)
    t = traj.times

    U = SampledFunction(t, np.exp(-cert.lambda_m * t) * traj.norms)
    V = SampledFunction(t, np.full_like(t, cert.eta * (cert.theta + cert.sigma)))
    W = SampledFunction(t, cert.eta * cert.c * np.exp((cert.gamma - cert.lambda_m) * t))
    check = gronwall_bound(U, V, W, C=cert.eta * np.linalg.norm(x0))

    print(f"hypothesis holds: {check.hypothesis_holds}  (worst relative slack {check.hypothesis_slack:.3f})")
    print(f"conclusion holds: {check.conclusion_holds}  (worst relative slack {check.max_slack:.3f})")


if __name__ == "__main__":
    main()
