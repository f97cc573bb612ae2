# Certificate for the bundled two-state example.
#
#   x1' = x1^3 + x2^2 u + x2,   x2' = u,   poles placed at -0.5 and -0.75
#
# Prints the gain, the conditioning of the eigenbasis and the radius delta
# of the ball of initial states that provably converge, first with the
# limiting Gamma0 and then with a 10% margin so that the envelope decays.
import numpy as np

from stabcert import certify, example1_system, synthesize
from stabcert.io import certificate_text
from stabcert.scenarios import example1_manual_model


def main():
    system = example1_system()
    synth = synthesize(system)
    model = example1_manual_model(synth.k_norm)

    cert = certify(system, model, synth=synth)
    print(certificate_text(cert, system))

    strict = certify(system, model, margin=0.1, synth=synth)
    print("with margin 0.1:")
    print(f"  delta  = {strict.delta:.6g}  (limiting {cert.delta:.6g})")
    print(f"  alpha2 = {strict.alpha2:.6g}")
    t = np.array([0.0, 10.0, 50.0, 100.0])
    print("  envelope for |x0| = delta:", np.array2string(strict.envelope(strict.delta, t), precision=3))


if __name__ == "__main__":
    main()
