"""Structural metrics: the numbers an EDA flow would consume."""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import __version__
from .ir import DatapathIR
from .pipeline import adder_levels, max_segment_depth

KEYS = ("adders", "subs", "muxes", "regs", "latency", "butterflies", "csd_adders", "opt_adders")


@dataclass
class MetricsReport:
    adders: int
    subs: int
    muxes: int
    regs: int
    latency: int
    butterflies: int
    csd_adders: int
    opt_adders: int
    extra: dict = field(default_factory=dict)
    per_stage: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in KEYS}
        d.update(self.extra)
        return d

    def text(self, header: dict | None = None) -> str:
        lines = [f"tool = nttforge {__version__}"]
        for k, v in (header or {}).items():
            lines.append(f"{k} = {v}")
        for k, v in self.as_dict().items():
            lines.append(f"{k} = {v}")
        for s in sorted(self.per_stage):
            row = self.per_stage[s]
            lines.append(f"stage.{s} = " + " ".join(f"{k}:{row[k]}" for k in sorted(row)))
        return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" not in line or line.startswith("#"):
            continue
        k, v = (x.strip() for x in line.split("=", 1))
        out[k] = int(v) if v.lstrip("-").isdigit() else v
    return out


def _stage_name(coord, stages: int) -> str:
    if coord is None:
        return "top"
    s = coord[0]
    if s < 0:
        return "in_bank"
    if s >= stages:
        return "out_bank"
    return str(s)


def structural_report(ir: DatapathIR) -> MetricsReport:
    c = ir.counts()
    stages = ir.params.stages
    per = {}
    kind_key = {"add": "adders", "sub": "subs", "csub": "subs", "modsub": "subs", "mux": "muxes", "reg": "regs"}
    for nd in ir.nodes:
        key = kind_key.get(nd.kind)
        if key is None:
            continue
        row = per.setdefault(_stage_name(nd.coord, stages), {"adders": 0, "subs": 0, "muxes": 0, "regs": 0})
        row[key] += 1
    levels = adder_levels(ir)
    extra = {
        "csubs": c["csub"],
        "modsubs": c["modsub"],
        "shifts": c["shl"] + c["shr"],
        "multipliers": 0,
        "nodes": len(ir.nodes),
        "reg_bits": sum(nd.width for nd in ir.nodes if nd.kind == "reg"),
        "adder_levels": max(levels, default=0),
        "max_stage_depth": max_segment_depth(ir),
        "stages": stages,
    }
    return MetricsReport(
        adders=c["add"], subs=c["sub"] + c["csub"] + c["modsub"], muxes=c["mux"], regs=c["reg"],
        latency=ir.latency, butterflies=ir.info.get("butterflies", 0),
        csd_adders=ir.info.get("csd_adders", 0), opt_adders=ir.info.get("opt_adders", 0),
        extra=extra, per_stage=per,
    )
