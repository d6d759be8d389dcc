"""Independent openQASM 2.0 grammar checker used as a test oracle.

Deliberately written from the published grammar, with no reference to the
emitter: a tokenizer plus a recursive-descent parser covering the statement
forms a measurement suite can contain (version header, include, register
declarations, gate calls with parameter expressions, barrier, measure,
reset). Register references are checked against declarations, including
index bounds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<real>(\d+\.\d*|\d*\.\d+)([eE][-+]?\d+)?)
  | (?P<nninteger>\d+)
  | (?P<arrow>->)
  | (?P<builtin>U|CX)
  | (?P<id>[a-z][A-Za-z0-9_]*)
  | (?P<keywordcap>OPENQASM)
  | (?P<string>"[^"\n]*")
  | (?P<sym>[{}()\[\];,+\-*/^])
    """,
    re.VERBOSE,
)

UNARY_FUNCS = {"sin", "cos", "tan", "exp", "ln", "sqrt"}
KEYWORDS = {
    "include", "qreg", "creg", "gate", "opaque", "measure", "reset",
    "barrier", "if", "pi", "U", "CX",
} | UNARY_FUNCS


class QasmSyntaxError(Exception):
    pass


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    return tokens


@dataclass
class Program:
    version: str
    includes: list[str] = field(default_factory=list)
    qregs: dict[str, int] = field(default_factory=dict)
    cregs: dict[str, int] = field(default_factory=dict)
    # each op: (name, [param expressions], [argument strings])
    operations: list[tuple[str, list[str], list[str]]] = field(default_factory=list)

    def count_ops(self, name: str) -> int:
        return sum(1 for op, _, _ in self.operations if op == name)


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise QasmSyntaxError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise QasmSyntaxError(f"expected {text!r}, got {tok.text!r} at offset {tok.pos}")
        return tok

    def expect_kind(self, kind: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise QasmSyntaxError(f"expected {kind}, got {tok.text!r} at offset {tok.pos}")
        return tok

    # --- expressions (precedence climbing) ---

    def parse_exp(self) -> str:
        return self._parse_additive()

    def _parse_additive(self) -> str:
        left = self._parse_multiplicative()
        while self.peek() is not None and self.peek().text in ("+", "-"):
            op = self.next().text
            left = f"({left}{op}{self._parse_multiplicative()})"
        return left

    def _parse_multiplicative(self) -> str:
        left = self._parse_power()
        while self.peek() is not None and self.peek().text in ("*", "/"):
            op = self.next().text
            left = f"({left}{op}{self._parse_power()})"
        return left

    def _parse_power(self) -> str:
        base = self._parse_unary()
        if self.peek() is not None and self.peek().text == "^":
            self.next()
            return f"({base}^{self._parse_power()})"
        return base

    def _parse_unary(self) -> str:
        tok = self.peek()
        if tok is None:
            raise QasmSyntaxError("unexpected end of expression")
        if tok.text == "-":
            self.next()
            return f"(-{self._parse_unary()})"
        if tok.kind in ("real", "nninteger"):
            return self.next().text
        if tok.text == "pi":
            return self.next().text
        if tok.text in UNARY_FUNCS:
            name = self.next().text
            self.expect("(")
            inner = self.parse_exp()
            self.expect(")")
            return f"{name}({inner})"
        if tok.text == "(":
            self.next()
            inner = self.parse_exp()
            self.expect(")")
            return f"({inner})"
        if tok.kind == "id":
            return self.next().text
        raise QasmSyntaxError(f"bad expression token {tok.text!r} at offset {tok.pos}")

    # --- program structure ---

    def parse(self) -> Program:
        self.expect("OPENQASM")
        version = self.expect_kind("real").text
        if version != "2.0":
            raise QasmSyntaxError(f"unsupported version {version}")
        self.expect(";")
        program = Program(version)
        while self.peek() is not None:
            self._parse_statement(program)
        return program

    def _parse_statement(self, program: Program) -> None:
        tok = self.peek()
        if tok.text == "include":
            self.next()
            program.includes.append(self.expect_kind("string").text.strip('"'))
            self.expect(";")
        elif tok.text in ("qreg", "creg"):
            kind = self.next().text
            name = self.expect_kind("id").text
            if name in KEYWORDS:
                raise QasmSyntaxError(f"reserved word {name!r} used as register name")
            self.expect("[")
            size = int(self.expect_kind("nninteger").text)
            self.expect("]")
            self.expect(";")
            if size < 1 or name in program.qregs or name in program.cregs:
                raise QasmSyntaxError(f"bad register declaration {name}[{size}]")
            (program.qregs if kind == "qreg" else program.cregs)[name] = size
        elif tok.text == "measure":
            self.next()
            src = self._parse_argument(program, quantum=True)
            self.expect("->")
            dst = self._parse_argument(program, quantum=False)
            self.expect(";")
            program.operations.append(("measure", [], [src, dst]))
        elif tok.text == "reset":
            self.next()
            arg = self._parse_argument(program, quantum=True)
            self.expect(";")
            program.operations.append(("reset", [], [arg]))
        elif tok.text == "barrier":
            self.next()
            args = [self._parse_argument(program, quantum=True)]
            while self.peek() is not None and self.peek().text == ",":
                self.next()
                args.append(self._parse_argument(program, quantum=True))
            self.expect(";")
            program.operations.append(("barrier", [], args))
        elif tok.kind == "id" or tok.text in ("U", "CX"):
            name = self.next().text
            params: list[str] = []
            if self.peek() is not None and self.peek().text == "(":
                self.next()
                if self.peek() is not None and self.peek().text != ")":
                    params.append(self.parse_exp())
                    while self.peek() is not None and self.peek().text == ",":
                        self.next()
                        params.append(self.parse_exp())
                self.expect(")")
            args = [self._parse_argument(program, quantum=True)]
            while self.peek() is not None and self.peek().text == ",":
                self.next()
                args.append(self._parse_argument(program, quantum=True))
            self.expect(";")
            program.operations.append((name, params, args))
        else:
            raise QasmSyntaxError(f"unexpected token {tok.text!r} at offset {tok.pos}")

    def _parse_argument(self, program: Program, quantum: bool) -> str:
        name = self.expect_kind("id").text
        regs = program.qregs if quantum else program.cregs
        if name not in regs:
            raise QasmSyntaxError(f"reference to undeclared register {name!r}")
        if self.peek() is not None and self.peek().text == "[":
            self.next()
            index = int(self.expect_kind("nninteger").text)
            self.expect("]")
            if index >= regs[name]:
                raise QasmSyntaxError(f"index {index} out of range for {name}[{regs[name]}]")
            return f"{name}[{index}]"
        return name


def parse_qasm(text: str) -> Program:
    """Parse openQASM 2.0 source, raising QasmSyntaxError on any violation."""
    return Parser(text).parse()
