"""Ring constants and the golden NTT.

Derives the constants for each preset, then multiplies two random
polynomials both through the NTT and by schoolbook convolution.
"""

import random

from nttforge.ring import iter_presets, negacyclic_mul_schoolbook, ntt_forward, ntt_inverse, ntt_polymul

rng = random.Random(1)
for p in iter_presets():
    print(f"{p.label:11s} Q={p.Q:<8d} N={p.N:<5d} n={p.n:<3d} R={p.R:<9d} psi={p.psi:<8d} "
          f"stages={p.stages} variant={p.variant}")
    a = [rng.randrange(p.Q) for _ in range(p.N)]
    b = [rng.randrange(p.Q) for _ in range(p.N)]
    assert ntt_inverse(ntt_forward(a, p), p) == a
    same = ntt_polymul(a, b, p) == negacyclic_mul_schoolbook(a, b, p)
    print(f"{'':11s} inverse(forward(a)) == a; NTT product matches schoolbook: {same}")
