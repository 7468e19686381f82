"""
Handing the leftover field to a second pair
===========================================

After the first pair has interacted for tau1, the cavities still hold
correlated light. A second pair of qubits then interacts for tau2 and we
record the best negativity it reaches. Between the two passages the cavities
may lose photons at a rate kappa; the no-jump damping used here keeps the
trace fixed.
"""
import math

import numpy as np

from entransfer import (
    SqueezeParams,
    apply_cavity_decay,
    assemble_cavity_state_closed_form,
    field_after_pair,
    max_over_tau2,
)

theta = math.asin(math.sqrt(0.1))
rho = assemble_cavity_state_closed_form(SqueezeParams(0.86, theta, 20))
tau2 = np.arange(0, 151) * math.pi / 100
kappas = (0.0, 0.2, 0.4, 0.6, 1.0)

print(" tau1/pi " + "".join(f"  k*t={k:<4}" for k in kappas))
for tau1 in np.arange(9) * math.pi / 4:
    field = field_after_pair(rho, tau1)
    best = [max_over_tau2(apply_cavity_decay(field, k), tau2)[1] for k in kappas]
    print(f"{tau1 / math.pi:8.2f} " + "".join(f"{b:11.5f}" for b in best))
