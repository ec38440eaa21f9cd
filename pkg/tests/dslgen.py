"""Random syntax-tree generator used by the round-trip fuzzer and the corpus tests."""
from __future__ import annotations

import random
import string

from aurakit.dsl.ast import (
    Assert, Binary, Branch, Call, Click, Export, Literal, Name, Program, Read, RepeatUntil,
    Select, SetValue, Unary, WaitUntil, WidgetRef,
)
from aurakit.dsl.lexer import KEYWORDS, MAX_IDENT, MAX_TEXT_LITERAL

WORDS = ["tab", "start", "scan", "lamp", "status", "focus", "beam", "dwell", "ms", "nm", "x", "y",
         "value", "export", "mode", "gain", "stage", "run", "a", "b", "c2", "_tmp", "Reading"]
TEXT_CHARS = string.ascii_letters + string.digits + " _-.:#/\\\"\t\n'()=µ°"
COMPARE = ("==", "!=", "<", "<=", ">", ">=")
ARITH = ("+", "-", "*", "/")


def ident(rng: random.Random, hyphen: bool = False) -> str:
    parts = [rng.choice(WORDS) for _ in range(rng.randint(1, 3))]
    sep = "-" if hyphen and rng.random() < 0.3 else "_"
    word = sep.join(parts)
    if sep == "-" and any(not p[0].isalpha() for p in parts[1:]):
        word = "_".join(parts)
    if rng.random() < 0.05:
        word = (word + "_" + "z" * MAX_IDENT)[:MAX_IDENT]
    if word in KEYWORDS or word.endswith("-"):
        word = word + "_v"
    return word[:MAX_IDENT]


def text(rng: random.Random) -> str:
    n = rng.choice([0, 1, 5, 12, 40, MAX_TEXT_LITERAL])
    return "".join(rng.choice(TEXT_CHARS) for _ in range(rng.randint(0, n)))


def real(rng: random.Random) -> float:
    kind = rng.randrange(5)
    if kind == 0:
        return float(rng.randint(0, 1000))
    if kind == 1:
        return rng.uniform(0, 1)
    if kind == 2:
        return rng.uniform(-1e6, 1e6)
    if kind == 3:
        return rng.choice([1e-7, 2.5e-12, 1e16, 6.02e23, 0.1, 1 / 3])
    return -min(rng.expovariate(1.0), 1e6)


def literal(rng: random.Random) -> Literal:
    k = rng.randrange(4)
    if k == 0:
        return Literal("int", rng.choice([0, 1, rng.randint(0, 10**6), -rng.randint(1, 500)]))
    if k == 1:
        return Literal("real", real(rng))
    if k == 2:
        return Literal("text", text(rng))
    return Literal("bool", rng.random() < 0.5)


def expr(rng: random.Random, depth: int = 3):
    if depth <= 0 or rng.random() < 0.3:
        k = rng.randrange(3)
        if k == 0:
            return literal(rng)
        if k == 1:
            return Name(ident(rng))
        return WidgetRef(ident(rng, hyphen=True))
    k = rng.randrange(6)
    if k == 0:
        return Unary(rng.choice(["-", "not"]), expr(rng, depth - 1))
    if k == 1:
        return Binary(rng.choice(COMPARE), expr(rng, depth - 1), expr(rng, depth - 1))
    if k == 2:
        return Binary(rng.choice(["and", "or"]), expr(rng, depth - 1), expr(rng, depth - 1))
    return Binary(rng.choice(ARITH), expr(rng, depth - 1), expr(rng, depth - 1))


def block(rng: random.Random, depth: int, size: int) -> tuple:
    return tuple(step(rng, depth) for _ in range(rng.randint(0, size)))


def step(rng: random.Random, depth: int = 2):
    k = rng.randrange(11 if depth > 0 else 9)
    e = lambda: expr(rng, rng.randint(0, 4))  # noqa: E731
    if k == 0:
        return Click(ident(rng, hyphen=True))
    if k == 1:
        return SetValue(ident(rng, hyphen=True), e())
    if k == 2:
        return Select(ident(rng, hyphen=True), e())
    if k == 3:
        return Read(ident(rng, hyphen=True), ident(rng))
    if k == 4:
        return WaitUntil(e(), rng.randint(0, 10**7), rng.randint(0, 10**4))
    if k == 5:
        return Assert(e())
    if k == 6:
        return Export(ident(rng, hyphen=True), e() if rng.random() < 0.5 else None)
    if k in (7, 8):
        return Call(ident(rng, hyphen=True), tuple(e() for _ in range(rng.randint(0, 4))))
    if k == 9:
        orelse = block(rng, depth - 1, 3) if rng.random() < 0.5 else ()
        return Branch(e(), block(rng, depth - 1, 4), orelse)
    return RepeatUntil(e(), block(rng, depth - 1, 4), rng.randint(0, 1000))


def program(rng: random.Random, size: int = 8, depth: int = 3) -> Program:
    return Program(block(rng, depth, size))
