import re

import pytest

from nttforge.ring import INVERSE, derive_params, twiddle_schedule
from nttforge.rtl import COMBINATIONAL, IRError, PipelinePolicy, build_datapath, check_balanced, insert_pipeline
from nttforge.rtl.build import generate_design, plan_butterflies
from nttforge.rtl.ir import ADDER_KINDS, KINDS
from nttforge.rtl.pipeline import adder_levels, max_segment_depth, register_delays, strip_registers
from nttforge.rtl.report import KEYS, parse_metrics, structural_report
from nttforge.rtl.verilog import emit_verilog, file_name, parse_verilog, scan_text, structural_check


def test_toy_butterflies_and_balance(toy_ir):
    assert toy_ir.info["butterflies"] == 12
    assert check_balanced(toy_ir) == toy_ir.latency
    toy_ir.check()


def test_kyber_structure(kyber_ir):
    assert kyber_ir.info["butterflies"] == 896 and kyber_ir.info["stages"] == 7
    check_balanced(kyber_ir)


def test_no_multiplier_kinds(toy_ir):
    assert {nd.kind for nd in toy_ir.nodes} <= set(KINDS)
    assert "mul" not in KINDS


def test_mode_only_selects_muxes(toy_ir):
    ir = toy_ir
    mode_like = set()
    for i, nd in enumerate(ir.nodes):
        if nd.kind == "mode" or (nd.kind == "reg" and nd.args[0] in mode_like):
            mode_like.add(i)
    for nd in ir.nodes:
        for pos, a in enumerate(nd.args):
            if a in mode_like:
                assert nd.kind == "reg" or (nd.kind == "mux" and pos == 0)


def test_pipeline_idempotent(toy_ir):
    again = insert_pipeline(toy_ir, toy_ir.policy)
    assert again.counts() == toy_ir.counts() and again.latency == toy_ir.latency
    assert emit_verilog(again) == emit_verilog(toy_ir)


def test_depth_one_latency_equals_adder_levels(toy_ir):
    ir = insert_pipeline(toy_ir, PipelinePolicy(1, register_inputs=False, register_outputs=True))
    assert ir.latency == max(adder_levels(strip_registers(toy_ir)))
    assert max_segment_depth(ir) == 1
    check_balanced(ir)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_depth_bound_respected(toy_ir, d):
    ir = insert_pipeline(toy_ir, PipelinePolicy(d))
    assert max_segment_depth(ir) <= d
    check_balanced(ir)


@pytest.mark.parametrize("ri,ro", [(False, False), (True, False), (True, True)])
def test_unbounded_depth_has_io_registers_only(toy_ir, ri, ro):
    ir = insert_pipeline(toy_ir, PipelinePolicy(None, ri, ro))
    assert ir.latency == ri + ro
    check_balanced(ir)


def test_combinational_report_latency_zero(toy_ir):
    ir = insert_pipeline(toy_ir, COMBINATIONAL)
    assert ir.count("reg") == 0
    assert structural_report(ir).latency == 0


def test_policy_validation():
    with pytest.raises(ValueError):
        PipelinePolicy(0)


def test_unbalanced_is_detected(toy_ir):
    ir = toy_ir.copy()
    # bypass one register in front of an adder
    for i, nd in enumerate(ir.nodes):
        if nd.kind in ADDER_KINDS and ir.nodes[nd.args[0]].kind == "reg":
            src = ir.nodes[nd.args[0]].args[0]
            nd.args = (src,) + nd.args[1:]
            break
    with pytest.raises(IRError, match="unbalanced|different delays|registers deep"):
        check_balanced(ir)


def test_plan_coverage_and_mismatch(toy):
    fwd, inv = twiddle_schedule(toy), twiddle_schedule(toy, INVERSE)
    plans = plan_butterflies(toy, fwd, inv)
    missing = dict(plans)
    del missing[1, 2]
    with pytest.raises(IRError, match="stage 1 butterfly 2"):
        build_datapath(toy, fwd, inv, missing)
    swapped = dict(plans)
    swapped[2, 3] = plans[2, 0] if plans[2, 0].twiddle != plans[2, 3].twiddle else plans[2, 1]
    with pytest.raises(IRError, match="stage 2 butterfly 3"):
        build_datapath(toy, fwd, inv, swapped)


def test_corrections_override(toy):
    ir2 = generate_design(toy, corrections=2)
    assert ir2.count("csub") > generate_design(toy).count("csub")
    with pytest.raises(IRError, match="corrections"):
        generate_design(toy, corrections=0)


@pytest.mark.parametrize("q,N,variant", [(17, 8, "full"), (97, 16, "full"), (17, 8, "incomplete"), (257, 64, "full")])
def test_butterfly_count_formula(q, N, variant):
    p = derive_params(q, N, variant)
    ir = generate_design(p)
    assert ir.info["butterflies"] == N // 2 * p.stages
    check_balanced(ir)


def test_verilog_text_audit(toy_ir):
    text = emit_verilog(toy_ir)
    assert scan_text(text)["multiplications"] == 0
    assert "*" not in re.sub(r"//.*", "", text)
    assert text.count("\nmodule q17_ntt8 (") == 1
    assert file_name(toy_ir.params) == "q17_ntt8.v"
    assert structural_check(text, toy_ir) == toy_ir.counts()


def test_verilog_deterministic(toy):
    assert emit_verilog(generate_design(toy)) == emit_verilog(generate_design(toy))


def test_verilog_roundtrip_counts(kyber_ir):
    text = emit_verilog(kyber_ir)
    back = parse_verilog(text)
    assert back.counts() == kyber_ir.counts()
    assert back.latency == kyber_ir.latency
    assert [n.width for n in back.nodes] == [n.width for n in kyber_ir.nodes]
    assert "input [3071:0] din" in text


def test_verilog_rejects_garbage(toy_ir):
    text = emit_verilog(toy_ir)
    with pytest.raises(IRError):
        parse_verilog(text.replace("wire [", "wire (", 1))
    with pytest.raises(IRError):
        parse_verilog(text.replace("// params", "// nothing"))
    with pytest.raises(IRError):
        structural_check(text.replace(" + ", " * ", 1))


def test_verilog_bad_module_name(toy_ir):
    with pytest.raises(IRError):
        emit_verilog(toy_ir, "1bad name")


def test_report_keys_and_text(toy_ir):
    rep = structural_report(toy_ir)
    assert rep.butterflies == 12 and rep.extra["multipliers"] == 0
    d = parse_metrics(rep.text())
    for k in KEYS:
        assert d[k] == getattr(rep, k)
    assert rep.opt_adders <= rep.csd_adders
    assert sum(r["regs"] for r in rep.per_stage.values()) == rep.regs


def test_register_delays_match_latency(toy_ir):
    dl = register_delays(toy_ir)
    assert {dl[o] for o in toy_ir.outputs} == {toy_ir.latency}
