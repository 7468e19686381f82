"""
Mixedness, the entanglement frontier and the leftover field
===========================================================

For each qubit-pair state we place (linear entropy, negativity) against the
largest negativity any two-qubit state can have at that mixedness. We also
follow the leftover cavity field through the uncertainty function of its
partially transposed covariance matrix, which is negative whenever the
field is still entangled.
"""
import math

import numpy as np

from entransfer import (
    QubitPairMatrix,
    SqueezeParams,
    assemble_cavity_state_closed_form,
    boundary_negativity,
    closed_form_elements,
    covariance_matrix,
    distance_to_boundary,
    field_after_pair,
    linear_entropy,
    negativity,
    simon_delta,
)

theta = math.asin(math.sqrt(0.1))
taus = np.arange(0, 61) * math.pi / 40

for r, n_max in ((0.46, 20), (0.86, 20), (2.0, 188)):
    A, B, C, D, F = closed_form_elements(r, theta, taus, n_max)
    pairs = [QubitPairMatrix.from_elements(*x) for x in zip(A, B, C, D, F)]
    s_l = np.array([linear_entropy(q) for q in pairs])
    eps = np.array([negativity(q) for q in pairs])
    k = int(np.argmax(eps))
    print(f"r={r}: max eps {eps[k]:.4f} at S_L={s_l[k]:.4f}, frontier there "
          f"{float(boundary_negativity(s_l[k])):.4f}, "
          f"closest approach {np.min(distance_to_boundary(s_l, eps)):.4g}")

# %%
# The field left in the cavities after the first pair
rho = assemble_cavity_state_closed_form(SqueezeParams(0.46, theta, 20))
print("\n tau/pi   uncertainty function")
for tau in np.arange(0, 13) * math.pi / 8:
    field = field_after_pair(rho, tau)
    print(f"{tau / math.pi:7.3f}   {simon_delta(covariance_matrix(field), partial_transposed=True):+.3e}")
