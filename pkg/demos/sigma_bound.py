# State-proportional disturbances: |w| <= sigma |x| + c e^{gamma t}.
#
# sigma eats into the room left for Gamma0, so delta shrinks as sigma grows
# and certification stops at sigma = -lambda_m / eta.
import numpy as np
from dataclasses import replace

from stabcert import PerturbationSpec, certify, example1_system, synthesize
from stabcert.errors import StabilityConditionError
from stabcert.scenarios import example1_manual_model


def main():
    system = example1_system()
    synth = synthesize(system)
    model = example1_manual_model(synth.k_norm)
    limit = -synth.lambda_m / synth.eta
    print(f"sigma threshold -lambda_m/eta = {limit:.6f}\n")

    print(" sigma     Gamma0     eps0      delta")
    for sigma in np.r_[np.linspace(0.0, 0.04, 9), limit, 0.05]:
        pert = PerturbationSpec(sigma=sigma, c=0.001, gamma=-10.0, phase="radial")
        try:
            c = certify(replace(system, perturbation=pert), model, synth=synth)
            print(f"{sigma:.4f}  {c.gamma0:.6f}  {c.epsilon0:.6f}  {c.delta:.3e}")
        except StabilityConditionError as exc:
            print(f"{sigma:.4f}  rejected: {exc.inequality}")


if __name__ == "__main__":
    main()
