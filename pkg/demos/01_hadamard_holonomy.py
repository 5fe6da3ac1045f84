"""
Building a Hadamard gate from two squeezing loops
=================================================

A rectangular loop in the (x, r1) plane of squeezing space produces the
holonomy exp(-i sigma_y Sigma_I); a loop in the (y, r1) plane produces
exp(-i sigma_x Sigma_II). Choosing the loop heights so that Sigma_I = pi/4 and
Sigma_II = pi/2 makes the product equal to -i times the Hadamard gate.

Run:  python demos/01_hadamard_holonomy.py
"""
import math

import numpy as np

from holonoise import HADAMARD, LoopPair, ideal_gate, sigma_I, sigma_II

print("loop length  ->  required height, enclosed area")
for l in (1.0, 2.0, 10.0):
    loops = LoopPair.from_lengths(l, l)
    print(f"  l = {l:5.1f}: d_x = {loops.dx:.6f} (area {sigma_I(loops.loop_I):.12f}),"
          f" d_y = {loops.dy:.6f} (area {sigma_II(loops.loop_II):.12f})")

# Longer loops need lower squeezing; below l_x = pi/4 no height suffices.
print(f"\nshortest admissible x loop: l_x > pi/4 = {math.pi / 4:.6f}")

gate = ideal_gate(LoopPair.from_lengths(1.0, 1.0))
print("\ncomposed holonomy for l_x = l_y = 1:")
print(np.array2string(gate, precision=6, suppress_small=True))
print(f"max |U + i H| = {np.max(np.abs(gate + 1j * HADAMARD)):.2e}")
