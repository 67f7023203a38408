"""Shift-add multiplication by constants.

13*x costs two adders: 13 = ((x<<1) + x)<<2 + x.  The same search then runs
over Dilithium's butterfly constants to show how much sharing saves over
plain CSD recoding.
"""

from nttforge.mcm import csd_recode, csd_total, format_graph, graph_eval, mcm_decompose, scm_decompose
from nttforge.ring import INVERSE, preset, twiddle_schedule

g = scm_decompose(13, width=8)
print(format_graph(g))
print("13 * 7 =", graph_eval(g, 7)[13])
print("CSD of 13:", csd_recode(13).digits)

p = preset("kyber")
f, i = twiddle_schedule(p), twiddle_schedule(p, INVERSE)
pairs = sorted({(w, wi) for rf, ri in zip(f.stages, i.stages) for (_, w), (_, wi) in zip(rf, ri)})
opt = sum(mcm_decompose(pr, p.n).cost for pr in pairs)
base = sum(csd_total(pr) for pr in pairs)
print(f"kyber: {len(pairs)} (twiddle, inverse twiddle) pairs, {opt} adders shared vs {base} with CSD")
