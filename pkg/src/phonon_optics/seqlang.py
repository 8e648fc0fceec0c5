"""Line-oriented pulse-sequence language.

One statement per line; ``#`` starts a comment and blank lines are ignored.

    init (fock M N | coherent RE IM RE IM | cat RE IM (even|odd) (c|r)) nmax INT
    bs1 ANGLE | bs2 ANGLE | ps (c|r) ANGLE | cphase (c|r) ANGLE
    mz ANGLE | jcm (single|two) COUPLING T0 T1 NSAMPLES | direct (c|r) CHI_T
    report

Angles are decimal radians or rational multiples of pi: ``pi``, ``pi/2``,
``3*pi/4``, ``-pi/3`` and so on (integer numerator and denominator).  All
other numbers are plain decimal literals.  Exactly one ``init`` statement is
required and it must come first; verbs and keywords are case insensitive.

``execute`` threads a motional state through the statements.  ``cphase``
acts with ion 2 implicitly prepared in |g>, which turns the conditional
phase with angle chi_t into the plain phase shifter at chi_t / 2.  ``mz``
expands to the splitter, phase, splitter pipeline.  ``jcm`` and ``direct``
emit probe records without changing the state; ``report`` records the
number distributions and the Schwinger expectations at that point.
Formatting is canonical (lowercase, single spaces) and parsing a formatted
program reproduces the statement structure exactly; comments are not
preserved.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import interferometer
from .detection import DirectEstimate, SignalTrace, direct_mean_phonon, signal
from .fockspace import (
    JointDistribution,
    MotionalState,
    Truncation,
    expect,
    make_cat,
    make_coherent,
    make_fock,
    number_distributions,
)
from .operators import apply, beam_splitter, phase_shifter


class ParseError(Exception):
    """Rejection with the line and column of the offending token."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ExecutionError(Exception):
    """Runtime failure of a parsed program, tagged with the statement's line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


_PI_RE = re.compile(r"^([+-]?)(?:(\d+)\*)?pi(?:/(\d+))?$", re.IGNORECASE)
_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class Angle:
    """Angle literal; keeps the rational-pi spelling when one was used."""

    value: float
    pi_num: int | None = None
    pi_den: int = 1

    @classmethod
    def from_pi(cls, num: int, den: int = 1) -> "Angle":
        if den <= 0:
            raise ValueError("denominator must be positive")
        return cls(num * math.pi / den, num, den)

    @classmethod
    def from_value(cls, value: float) -> "Angle":
        return cls(float(value))

    def text(self) -> str:
        if self.pi_num is None:
            return repr(self.value)
        sign = "-" if self.pi_num < 0 else ""
        mag = abs(self.pi_num)
        head = f"{sign}pi" if mag == 1 else f"{sign}{mag}*pi"
        return head if self.pi_den == 1 else f"{head}/{self.pi_den}"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    col_start: int
    col_end: int


@dataclass
class Statement:
    verb: str
    args: dict


@dataclass
class PulseProgram:
    statements: list[Statement]
    source_spans: list[SourceSpan]

    @property
    def nmax(self) -> int:
        return self.statements[0].args["nmax"]


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int  # 1-based

    @property
    def end(self) -> int:
        return self.col + len(self.text)


class _LineReader:
    """Hands out the tokens of one line with located errors."""

    def __init__(self, tokens: list[_Token], line: int, verb: str, verb_end: int):
        self.tokens = tokens
        self.line = line
        self.verb = verb
        self.verb_end = verb_end
        self.pos = 0

    def _fail_here(self, message: str):
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise ParseError(self.line, tok.col, message)
        col = self.tokens[-1].end if self.tokens else self.verb_end
        raise ParseError(self.line, col, message)

    def take(self, what: str) -> _Token:
        if self.pos >= len(self.tokens):
            self._fail_here(f"'{self.verb}' is missing {what}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def take_keyword(self, *options: str) -> str:
        tok = self.take("one of " + "/".join(options))
        word = tok.text.lower()
        if word not in options:
            raise ParseError(
                self.line, tok.col, f"expected one of {'/'.join(options)}, got {tok.text!r}"
            )
        return word

    def take_int(self, what: str) -> tuple[int, _Token]:
        tok = self.take(what)
        if not _INT_RE.match(tok.text):
            raise ParseError(self.line, tok.col, f"expected an integer {what}, got {tok.text!r}")
        return int(tok.text), tok

    def take_float(self, what: str) -> float:
        tok = self.take(what)
        try:
            value = float(tok.text)
        except ValueError:
            raise ParseError(self.line, tok.col, f"expected a number for {what}, got {tok.text!r}")
        if not math.isfinite(value):
            raise ParseError(self.line, tok.col, f"{what} must be finite, got {tok.text!r}")
        return value

    def take_angle(self, what: str = "an angle") -> Angle:
        tok = self.take(what)
        m = _PI_RE.match(tok.text)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            num = sign * (int(m.group(2)) if m.group(2) else 1)
            den = int(m.group(3)) if m.group(3) else 1
            if den == 0:
                raise ParseError(self.line, tok.col, "angle denominator must be nonzero")
            return Angle.from_pi(num, den)
        try:
            value = float(tok.text)
        except ValueError:
            raise ParseError(
                self.line,
                tok.col,
                f"expected {what} (decimal radians or a pi fraction), got {tok.text!r}",
            )
        if not math.isfinite(value):
            raise ParseError(self.line, tok.col, "angles must be finite")
        return Angle.from_value(value)

    def finish(self):
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise ParseError(
                self.line, tok.col, f"unexpected trailing argument {tok.text!r} after '{self.verb}'"
            )


def _parse_init(r: _LineReader) -> dict:
    kind = r.take_keyword("fock", "coherent", "cat")
    if kind == "fock":
        m, m_tok = r.take_int("M")
        n, n_tok = r.take_int("N")
        state = ("fock", m, n)
        index_toks = (m_tok, n_tok)
    elif kind == "coherent":
        are = r.take_float("alpha real part")
        aim = r.take_float("alpha imaginary part")
        bre = r.take_float("beta real part")
        bim = r.take_float("beta imaginary part")
        state = ("coherent", are, aim, bre, bim)
        index_toks = ()
    else:
        are = r.take_float("alpha real part")
        aim = r.take_float("alpha imaginary part")
        parity = r.take_keyword("even", "odd")
        mode = r.take_keyword("c", "r")
        state = ("cat", are, aim, parity, mode)
        index_toks = ()

    key = r.take("the keyword 'nmax'")
    if key.text.lower() != "nmax":
        raise ParseError(r.line, key.col, f"expected keyword 'nmax', got {key.text!r}")
    nmax, nmax_tok = r.take_int("nmax")
    if nmax < 0:
        raise ParseError(r.line, nmax_tok.col, f"nmax must be >= 0, got {nmax}")
    if kind == "fock":
        m, n = state[1], state[2]
        if m < 0 or n < 0:
            bad = index_toks[0] if m < 0 else index_toks[1]
            raise ParseError(r.line, bad.col, "fock indices must be >= 0")
        if m + n > nmax:
            raise ParseError(
                r.line, index_toks[0].col,
                f"fock state ({m}, {n}) exceeds the truncation: {m} + {n} > nmax = {nmax}",
            )
    return {"state": state, "nmax": nmax}


def _parse_statement(tokens: list[_Token], line: int) -> Statement:
    verb_tok = tokens[0]
    verb = verb_tok.text.lower()
    r = _LineReader(tokens[1:], line, verb, verb_tok.end)
    if verb == "init":
        args = _parse_init(r)
    elif verb in ("bs1", "bs2"):
        args = {"theta": r.take_angle()}
    elif verb in ("ps", "cphase"):
        mode = r.take_keyword("c", "r")
        args = {"mode": mode, "angle": r.take_angle()}
    elif verb == "mz":
        args = {"phi": r.take_angle()}
    elif verb == "jcm":
        kind = r.take_keyword("single", "two")
        coupling = r.take_float("coupling")
        t0 = r.take_float("t0")
        t1 = r.take_float("t1")
        nsamples, ns_tok = r.take_int("nsamples")
        if nsamples < 2:
            raise ParseError(line, ns_tok.col, f"nsamples must be >= 2, got {nsamples}")
        if not t1 > t0:
            raise ParseError(line, tokens[4].col, f"t1 must exceed t0, got {t0} .. {t1}")
        args = {"kind": kind, "coupling": coupling, "t0": t0, "t1": t1, "nsamples": nsamples}
    elif verb == "direct":
        mode = r.take_keyword("c", "r")
        args = {"mode": mode, "chi_t": r.take_float("chi_t")}
    elif verb == "report":
        args = {}
    else:
        raise ParseError(line, verb_tok.col, f"unknown verb {verb_tok.text!r}")
    r.finish()
    return Statement(verb, args)


def _tokenize(text: str) -> list[list[_Token]]:
    lines: list[list[_Token]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        hash_at = raw.find("#")
        body = raw if hash_at < 0 else raw[:hash_at]
        toks = [
            _Token(m.group(0), lineno, m.start() + 1)
            for m in re.finditer(r"\S+", body)
        ]
        if toks:
            lines.append(toks)
    return lines


def parse(text: str) -> PulseProgram:
    """Parse program text; raises ParseError with line and column on failure."""
    statements: list[Statement] = []
    spans: list[SourceSpan] = []
    for tokens in _tokenize(text):
        line = tokens[0].line
        stmt = _parse_statement(tokens, line)
        if stmt.verb == "init" and statements:
            raise ParseError(line, tokens[0].col, "'init' must be the first statement")
        if stmt.verb != "init" and not statements:
            raise ParseError(line, tokens[0].col, "the program must start with 'init'")
        statements.append(stmt)
        spans.append(SourceSpan(line, tokens[0].col, tokens[-1].end))
    if not statements:
        raise ParseError(1, 1, "empty program: missing 'init'")
    return PulseProgram(statements, spans)


def parse_state_spec(spec: str, nmax_override: int | None = None) -> MotionalState:
    """Build the initial state from the init clause alone (CLI state-spec)."""
    program = parse("init " + spec.strip())
    if len(program.statements) != 1:
        raise ParseError(1, 1, "state spec must be a single init clause")
    args = dict(program.statements[0].args)
    if nmax_override is not None:
        args["nmax"] = nmax_override
    return _build_initial_state(args, line=1)


def _build_initial_state(args: dict, line: int) -> MotionalState:
    trunc = Truncation(args["nmax"])
    state = args["state"]
    try:
        if state[0] == "fock":
            return make_fock(state[1], state[2], trunc)
        if state[0] == "coherent":
            return make_coherent(complex(state[1], state[2]), complex(state[3], state[4]), trunc)
        return make_cat(complex(state[1], state[2]), state[3], state[4], trunc)
    except ValueError as exc:
        raise ExecutionError(line, str(exc)) from exc


@dataclass
class ReportRecord:
    index: int
    distribution: JointDistribution
    jx: float
    jy: float
    jz: float


@dataclass
class TraceRecord:
    index: int
    trace: SignalTrace


@dataclass
class DirectRecord:
    index: int
    estimate: DirectEstimate


@dataclass
class ExecutionResult:
    final_state: MotionalState
    records: list


def execute(program: PulseProgram) -> ExecutionResult:
    """Run a parsed program; deterministic for identical programs."""
    records: list = []
    state: MotionalState | None = None
    for idx, (stmt, span) in enumerate(zip(program.statements, program.source_spans)):
        line = span.line
        try:
            if stmt.verb == "init":
                state = _build_initial_state(stmt.args, line)
            elif stmt.verb in ("bs1", "bs2"):
                u = beam_splitter("b1" if stmt.verb == "bs1" else "b2",
                                  stmt.args["theta"].value, state.trunc)
                state = apply(u, state)
            elif stmt.verb == "ps":
                state = apply(
                    phase_shifter(stmt.args["mode"], stmt.args["angle"].value, state.trunc),
                    state,
                )
            elif stmt.verb == "cphase":
                # ion 2 implicitly in |g>: phase shift at chi_t / 2
                state = apply(
                    phase_shifter(stmt.args["mode"], stmt.args["angle"].value / 2.0, state.trunc),
                    state,
                )
            elif stmt.verb == "mz":
                state = interferometer.mz_output(state, stmt.args["phi"].value)
            elif stmt.verb == "jcm":
                times = np.linspace(stmt.args["t0"], stmt.args["t1"], stmt.args["nsamples"])
                trace = signal(state, stmt.args["coupling"], times, stmt.args["kind"])
                records.append(TraceRecord(idx, trace))
            elif stmt.verb == "direct":
                est = direct_mean_phonon(state, stmt.args["chi_t"], 1.0, stmt.args["mode"])
                records.append(DirectRecord(idx, est))
            elif stmt.verb == "report":
                records.append(
                    ReportRecord(
                        idx,
                        number_distributions(state),
                        expect(state, "jx"),
                        expect(state, "jy"),
                        expect(state, "jz"),
                    )
                )
            else:  # pragma: no cover - parser rejects unknown verbs
                raise ExecutionError(line, f"unknown verb {stmt.verb!r}")
        except ExecutionError:
            raise
        except (ValueError, AssertionError) as exc:
            raise ExecutionError(line, str(exc)) from exc
    return ExecutionResult(state, records)


def _format_statement(stmt: Statement) -> str:
    if stmt.verb == "init":
        state = stmt.args["state"]
        if state[0] == "fock":
            body = f"fock {state[1]} {state[2]}"
        elif state[0] == "coherent":
            body = "coherent " + " ".join(repr(x) for x in state[1:])
        else:
            body = f"cat {state[1]!r} {state[2]!r} {state[3]} {state[4]}"
        return f"init {body} nmax {stmt.args['nmax']}"
    if stmt.verb in ("bs1", "bs2"):
        return f"{stmt.verb} {stmt.args['theta'].text()}"
    if stmt.verb in ("ps", "cphase"):
        return f"{stmt.verb} {stmt.args['mode']} {stmt.args['angle'].text()}"
    if stmt.verb == "mz":
        return f"mz {stmt.args['phi'].text()}"
    if stmt.verb == "jcm":
        a = stmt.args
        return (
            f"jcm {a['kind']} {a['coupling']!r} {a['t0']!r} {a['t1']!r} {a['nsamples']}"
        )
    if stmt.verb == "direct":
        return f"direct {stmt.args['mode']} {stmt.args['chi_t']!r}"
    return "report"


def format_program(program: PulseProgram) -> str:
    """Canonical text: lowercase verbs, single spaces, one statement per line.

    Parsing the result reproduces the statement structure; comments and
    original spacing are not preserved.
    """
    return "\n".join(_format_statement(s) for s in program.statements) + "\n"
