"""
Entanglement picked up by one qubit pair
========================================

A two-mode squeezed source leaks a small fraction of its light into two
cavities. A pair of qubits, one per cavity, then interacts with the cavity
fields for a scaled time tau. This script builds the cavity state, compares
the series expression with brute-force evolution, and tabulates the
negativity of the qubit pair against tau.
"""
import math

import numpy as np

from entransfer import (
    SqueezeParams,
    assemble_cavity_state_closed_form,
    closed_form_elements,
    interact_pair,
    negativity,
    prepare_cavity_state_oracle,
    reduced_qubit_state,
    QubitPairMatrix,
)

# 10% of each source mode reaches its cavity
theta = math.asin(math.sqrt(0.1))
params = SqueezeParams(0.86, theta, 20)
print("truncation weight kept:", params.weight)

# the cavity state two ways: via the beam-splitter unitary and via the coefficient sum
rho_bs = prepare_cavity_state_oracle(params)
rho = assemble_cavity_state_closed_form(params)
print("max entry difference:", np.max(np.abs(rho_bs.matrix - rho.matrix)))

# %%
# The qubit pair state only has populations and one coherence, so a short
# series over photon numbers gives it directly. Check one point against the
# full joint evolution followed by tracing out the cavities.
tau = math.pi / 2
joint = reduced_qubit_state(interact_pair(rho, tau))
A, B, C, D, F = (x[0] for x in closed_form_elements(0.86, theta, [tau], 20))
print("series vs joint evolution:",
      np.max(np.abs(joint.matrix - QubitPairMatrix.from_elements(A, B, C, D, F).matrix)))

# %%
# Negativity along tau for a few squeezing strengths
taus = np.arange(0, 31) * math.pi / 20
print("\n tau/pi " + "".join(f"   r={r:<5}" for r in (0.26, 0.86, 1.2)))
curves = []
for r in (0.26, 0.86, 1.2):
    n_max = 20 if r < 1 else 37
    A, B, C, D, F = closed_form_elements(r, theta, taus, n_max)
    curves.append([negativity(QubitPairMatrix.from_elements(*x)) for x in zip(A, B, C, D, F)])
for i, t in enumerate(taus):
    print(f"{t / math.pi:7.2f} " + "".join(f"{c[i]:11.5f}" for c in curves))
