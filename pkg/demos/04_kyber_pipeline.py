"""Full Kyber flow: build, write Verilog, verify against the golden model.

Takes a few seconds to build and ten or so to simulate 1000 vectors.
"""

import sys
import time
from pathlib import Path

from nttforge.ring import preset
from nttforge.rtl import PipelinePolicy, generate_design
from nttforge.rtl.verilog import emit_verilog, file_name
from nttforge.sim import check_equivalence

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
p = preset("kyber")
for depth in (1, 2, 4):
    t = time.perf_counter()
    ir = generate_design(p, PipelinePolicy(max_adder_depth=depth))
    print(f"max_adder_depth={depth}: latency {ir.latency}, {ir.count('reg')} registers, "
          f"{time.perf_counter() - t:.1f}s")

path = out / file_name(p)
path.write_text(emit_verilog(ir))
print("wrote", path)
print(check_equivalence(ir, p, trials=1000, seed=7).text())
