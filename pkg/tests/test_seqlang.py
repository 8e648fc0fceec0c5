import math

import numpy as np
import pytest

from phonon_optics import (
    ExecutionError,
    ParseError,
    Truncation,
    execute,
    fidelity,
    format_program,
    make_cat,
    make_coherent,
    parse,
    parse_state_spec,
)
from phonon_optics.seqlang import Angle, DirectRecord, ReportRecord, TraceRecord
from seq_generator import random_program

MZ_DEMO = "init coherent 0 0 2 0 nmax 40\nmz pi/3\nreport\n"


# parsing ---------------------------------------------------------------------


def test_parse_three_statement_program():
    p = parse("init fock 1 0 nmax 4\nbs1 pi/2\nreport")
    assert [s.verb for s in p.statements] == ["init", "bs1", "report"]
    assert p.nmax == 4
    assert p.statements[1].args["theta"].value == pytest.approx(math.pi / 2)


def test_parse_empty_program():
    with pytest.raises(ParseError, match="missing 'init'"):
        parse("")
    with pytest.raises(ParseError, match="missing 'init'"):
        parse("# only a comment\n\n")


def test_parse_mz_demo():
    p = parse(MZ_DEMO)
    assert [s.verb for s in p.statements] == ["init", "mz", "report"]


def test_parse_comments_and_blank_lines():
    p = parse("# header\ninit fock 0 0 nmax 2\n\nbs2 0.5 # trailing comment\n")
    assert len(p.statements) == 2
    assert p.statements[1].args["theta"].value == 0.5


def test_init_must_come_first():
    err = pytest.raises(ParseError, match="must start with 'init'")
    with err as exc_info:
        parse("bs1 pi/2\ninit fock 0 0 nmax 2")
    assert exc_info.value.line == 1
    assert exc_info.value.col == 1


def test_single_init_only():
    with pytest.raises(ParseError, match="first statement") as exc_info:
        parse("init fock 0 0 nmax 2\ninit fock 1 0 nmax 2")
    assert exc_info.value.line == 2


def test_unknown_verb_is_located():
    with pytest.raises(ParseError, match="unknown verb") as exc_info:
        parse("init fock 0 0 nmax 2\n  warp 3")
    assert exc_info.value.line == 2
    assert exc_info.value.col == 3


def test_arity_errors():
    with pytest.raises(ParseError, match="missing"):
        parse("init fock 1 0 nmax")
    with pytest.raises(ParseError, match="missing an angle"):
        parse("init fock 1 0 nmax 4\nbs1")
    # a shifted argument is reported at the offending token instead
    with pytest.raises(ParseError, match="expected an integer N"):
        parse("init fock 1 nmax 4")
    with pytest.raises(ParseError, match="trailing argument") as exc_info:
        parse("init fock 1 0 nmax 4\nbs1 pi/2 19")
    assert exc_info.value.line == 2
    assert exc_info.value.col == 10


def test_type_errors_are_located():
    with pytest.raises(ParseError, match="expected an integer") as exc_info:
        parse("init fock one 0 nmax 4")
    assert exc_info.value.col == 11
    with pytest.raises(ParseError, match="expected an angle"):
        parse("init fock 0 0 nmax 4\nbs1 fast")
    with pytest.raises(ParseError, match="one of single/two"):
        parse("init fock 0 0 nmax 4\njcm both 1 0 1 8")


def test_fock_index_beyond_nmax():
    with pytest.raises(ParseError, match="exceeds the truncation") as exc_info:
        parse("init fock 2 3 nmax 4")
    assert exc_info.value.line == 1
    assert exc_info.value.col == 11


def test_init_value_checks():
    with pytest.raises(ParseError, match="nmax must be >= 0"):
        parse("init fock 0 0 nmax -1")
    with pytest.raises(ParseError, match="nsamples must be >= 2"):
        parse("init fock 0 0 nmax 2\njcm single 1.0 0 1 1")
    with pytest.raises(ParseError, match="t1 must exceed t0"):
        parse("init fock 0 0 nmax 2\njcm single 1.0 2 1 8")


def test_angle_literal_forms():
    p = parse(
        "init fock 0 0 nmax 2\n"
        "bs1 pi\nbs1 pi/2\nbs1 3*pi/4\nbs1 -pi/3\nbs1 -2*pi\nbs1 0.125\nbs1 -1e-3"
    )
    values = [s.args["theta"].value for s in p.statements[1:]]
    assert values == pytest.approx(
        [math.pi, math.pi / 2, 3 * math.pi / 4, -math.pi / 3, -2 * math.pi, 0.125, -1e-3]
    )


def test_angle_text_round_trip():
    for angle in (
        Angle.from_pi(1, 1),
        Angle.from_pi(1, 2),
        Angle.from_pi(-1, 3),
        Angle.from_pi(3, 4),
        Angle.from_pi(-5, 2),
        Angle.from_value(0.7),
        Angle.from_value(-2.5e-4),
    ):
        text = angle.text()
        p = parse(f"init fock 0 0 nmax 2\nbs1 {text}")
        assert p.statements[1].args["theta"] == angle


# formatting ------------------------------------------------------------------


def test_format_canonicalizes_case_and_spacing():
    p = parse("init fock 0 0 nmax 2\n  BS1   PI/2")
    assert format_program(p).splitlines()[1] == "bs1 pi/2"


def test_format_round_trip_examples():
    for text in (
        "init fock 1 0 nmax 4\nbs1 pi/2\nreport",
        MZ_DEMO,
        "init cat 1.5 0 odd c nmax 30\nbs2 pi/2\nps r -pi/4\ncphase c 2*pi\n"
        "jcm two 0.5 0.0 12.0 64\ndirect r 0.001\nreport",
    ):
        p = parse(text)
        assert parse(format_program(p)).statements == p.statements


def test_format_round_trip_random_programs():
    rng = np.random.default_rng(42)
    for _ in range(200):
        program = random_program(rng)
        assert parse(format_program(program)).statements == program.statements


# execution -------------------------------------------------------------------


def test_execute_beam_split_fock():
    result = execute(parse("init fock 1 0 nmax 4\nbs1 pi/2\nreport"))
    record = result.records[0]
    assert isinstance(record, ReportRecord)
    assert record.jz == pytest.approx(0.0, abs=1e-14)
    assert record.distribution.p_m[0] == pytest.approx(0.5, abs=1e-12)
    assert record.distribution.p_m[1] == pytest.approx(0.5, abs=1e-12)


def test_execute_mz_at_zero_phase():
    result = execute(parse("init coherent 0 0 2 0 nmax 40\nmz 0\nreport"))
    assert result.records[0].jz == pytest.approx(2.0, abs=1e-9)


def test_execute_init_only_report():
    result = execute(parse("init fock 2 1 nmax 5\nreport"))
    assert result.records[0].distribution.p_mn[2, 1] == pytest.approx(1.0)
    assert result.records[0].jz == pytest.approx(0.5)


def test_execute_cphase_is_half_angle_phase_shift():
    chi_t = 0.9
    via_cphase = execute(parse(f"init coherent 1 0 0.5 0 nmax 20\ncphase c {chi_t}"))
    via_ps = execute(parse(f"init coherent 1 0 0.5 0 nmax 20\nps c {chi_t / 2}"))
    assert fidelity(via_cphase.final_state, via_ps.final_state) == pytest.approx(1.0, abs=1e-12)


def test_execute_collects_probe_records():
    text = (
        "init fock 1 1 nmax 6\n"
        "jcm two 1.0 0.0 12.56 32\n"
        "direct c 0.001\n"
        "report"
    )
    result = execute(parse(text))
    kinds = [type(r) for r in result.records]
    assert kinds == [TraceRecord, DirectRecord, ReportRecord]
    trace = result.records[0].trace
    assert trace.kind == "two"
    assert trace.times.size == 32
    assert result.records[1].estimate.mean_n_linearized == pytest.approx(1.0, rel=1e-4)


def test_execute_runtime_error_carries_line():
    with pytest.raises(ExecutionError, match="line 1") as exc_info:
        execute(parse("init cat 0 0 odd c nmax 4"))
    assert exc_info.value.line == 1


def test_execute_is_deterministic():
    program = parse("init coherent 0.3 0.1 0.7 0 nmax 15\nbs2 pi/3\nmz 0.4\nreport")
    a = execute(program).records[0]
    b = execute(program).records[0]
    assert a.jx == b.jx and a.jy == b.jy and a.jz == b.jz
    assert np.array_equal(a.distribution.p_mn, b.distribution.p_mn)


def test_execute_matches_library_state():
    result = execute(parse("init coherent 0 0 1.5 0 nmax 25"))
    want = make_coherent(0, 1.5, Truncation(25))
    assert fidelity(result.final_state, want) == pytest.approx(1.0, abs=1e-12)
    cat = execute(parse("init cat 1 0 even r nmax 25")).final_state
    assert fidelity(cat, make_cat(1, "even", "r", Truncation(25))) == pytest.approx(
        1.0, abs=1e-12
    )


# state specs -----------------------------------------------------------------


def test_parse_state_spec():
    s = parse_state_spec("coherent 0 0 2 0 nmax 40")
    assert s.trunc.n_total_max == 40
    s = parse_state_spec("fock 1 0 nmax 4", nmax_override=9)
    assert s.trunc.n_total_max == 9


def test_parse_state_spec_rejects_garbage():
    with pytest.raises(ParseError):
        parse_state_spec("fock 1 nmax 4")
    with pytest.raises(ParseError):
        parse_state_spec("coherent 0 0 2 0 nmax 40\nreport")
