"""Line-oriented instance configs: parsing, emitting and building instances.

Grammar (``#`` starts a comment)::

    field rational | field gf <p>
    group free <r> torsion <n1> <n2> ...
    eps <i> <j> <scalar>
    gen <name> color (<c1>,...,<ck>) bound <b>
    der <name> = d/d<gen>
    der <name> color (<c1>,...) matrix [[...],[...],...]
    D = <name> <name> ...
    check <id> [budget <n>] [trials <n>] [cutoff <n>]

Matrix entry ``[k][j]`` is the coefficient of basis monomial k in the image
of basis monomial j. Unlisted ``eps`` pairs are 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .algebra import coordinate_derivation, free_truncated_algebra, make_D, make_derivation
from .foundation import Bicharacter, ConstructionError, Grading, make_field
from .theorems import CHECK_ORDER, Instance, window_instance

KEYWORDS = ("field", "group", "eps", "gen", "der", "D", "check")
CHECK_OPTIONS = ("budget", "trials", "cutoff")


class ConfigError(ConstructionError):
    """PARSE_ERROR or SEMANTIC_ERROR with a position and, for parse errors, the expected tokens."""

    def __init__(self, code: str, message: str, line: int = 0, column: int = 0,
                 expected: Sequence[str] = (), rule: str | None = None):
        self.line, self.column = line, column
        self.expected = tuple(expected)
        self.rule = rule
        where = f"line {line}, column {column}: " if line else ""
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        tag = f"{rule}: " if rule else ""
        super().__init__(code, f"{where}{tag}{message}{exp}", rule)


@dataclass
class GenDecl:
    name: str
    color: tuple
    bound: int
    line: int = dc_field(default=0, compare=False, repr=False)


@dataclass
class DerDecl:
    name: str
    gen: str | None = None  # coordinate derivation d/d<gen>
    color: tuple | None = None
    matrix: list | None = None  # rows of Fractions
    line: int = dc_field(default=0, compare=False, repr=False)


@dataclass
class CheckDecl:
    id: str
    budget: int | None = None
    trials: int | None = None
    cutoff: int | None = None

    def params(self) -> dict:
        return {k: getattr(self, k) for k in CHECK_OPTIONS if getattr(self, k) is not None}


@dataclass
class ConfigSpec:
    field_kind: str = ""
    p: int | None = None
    free_rank: int = 0
    torsion: tuple = ()
    eps: dict = dc_field(default_factory=dict)  # (i, j) -> Fraction
    gens: list = dc_field(default_factory=list)
    ders: list = dc_field(default_factory=list)
    D: list = dc_field(default_factory=list)
    checks: list = dc_field(default_factory=list)


_TOKEN = re.compile(
    r"\s*(?:(?P<id>\d+\.\d+)|(?P<num>-?\d+(?:/\d+)?)|(?P<word>[A-Za-z_][A-Za-z0-9_./']*)|(?P<punct>[()\[\],=])|(?P<bad>\S))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            break
        kind = m.lastgroup
        if kind is None:
            break
        text = m.group(kind)
        col = m.start(kind) + 1
        if kind == "bad":
            raise ConfigError("PARSE_ERROR", f"unexpected character {text!r}", lineno, col)
        toks.append(_Tok(kind, text, col))
        pos = m.end()
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int, length: int):
        self.toks, self.i, self.lineno, self.end = toks, 0, lineno, length + 1

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def fail(self, expected: Sequence[str], what: str = "") -> ConfigError:
        t = self.peek()
        got = f"got {t.text!r}" if t else "got end of line"
        return ConfigError("PARSE_ERROR", what or got, self.lineno, t.col if t else self.end, expected)

    def take(self, kind: str | None = None, text: str | None = None, expected: Sequence[str] = ()) -> _Tok:
        t = self.peek()
        if t is None or (kind and t.kind != kind) or (text is not None and t.text != text):
            raise self.fail(expected or ([text] if text else [f"<{kind}>"]))
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t is not None and t.text == text:
            self.i += 1
            return True
        return False

    def integer(self, what: str) -> int:
        t = self.take("num", expected=[f"<{what}>"])
        if "/" in t.text:
            raise ConfigError("PARSE_ERROR", f"{what} must be an integer", self.lineno, t.col, [f"<{what}>"])
        return int(t.text)

    def scalar(self) -> Fraction:
        t = self.take("num", expected=["<scalar>"])
        try:
            return Fraction(t.text)
        except ZeroDivisionError:
            raise ConfigError("PARSE_ERROR", "zero denominator", self.lineno, t.col, ["<scalar>"]) from None

    def name(self, what: str = "name") -> _Tok:
        return self.take("word", expected=[f"<{what}>"])

    def done(self):
        if self.peek() is not None:
            raise self.fail(["end of line"])


def _color(ln: _Line) -> tuple:
    ln.take(text="(")
    coords = []
    if not ln.accept(")"):
        coords.append(ln.integer("integer"))
        while not ln.accept(")"):
            ln.take(text=",", expected=[",", ")"])
            coords.append(ln.integer("integer"))
    return tuple(coords)


def _matrix(ln: _Line) -> list:
    ln.take(text="[")
    rows = []
    while True:
        ln.take(text="[", expected=["["])
        row = [ln.scalar()]
        while not ln.accept("]"):
            ln.take(text=",", expected=[",", "]"])
            row.append(ln.scalar())
        rows.append(row)
        if ln.accept("]"):
            return rows
        ln.take(text=",", expected=[",", "]"])


def parse_config(text: str) -> ConfigSpec:
    spec = ConfigSpec()
    seen_field = seen_group = seen_D = False
    names: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = _tokenize(body, lineno)
        if not toks:
            continue
        ln = _Line(toks, lineno, len(body.rstrip()))
        head = ln.peek()
        if head.text not in KEYWORDS:
            raise ConfigError("PARSE_ERROR", f"unknown keyword {head.text!r}", lineno, head.col, KEYWORDS)
        ln.i += 1
        kw = head.text

        def sem(rule: str, msg: str, col: int = head.col):
            return ConfigError("SEMANTIC_ERROR", msg, lineno, col, rule=rule)

        if kw == "field":
            if seen_field:
                raise sem("DUPLICATE", "field declared twice")
            seen_field = True
            t = ln.take("word", expected=["rational", "gf"])
            if t.text == "rational":
                spec.field_kind, spec.p = "rational", None
            elif t.text == "gf":
                spec.field_kind, spec.p = "gf", ln.integer("prime")
                if spec.p == 2:
                    raise sem("CHAR_TWO", "characteristic 2 is excluded", t.col)
            else:
                ln.i -= 1
                raise ln.fail(["rational", "gf"])
        elif kw == "group":
            if seen_group:
                raise sem("DUPLICATE", "group declared twice")
            seen_group = True
            ln.take(text="free", expected=["free"])
            spec.free_rank = ln.integer("rank")
            tors = []
            if ln.accept("torsion"):
                while ln.peek() is not None:
                    tors.append(ln.integer("modulus"))
                if not tors:
                    raise ln.fail(["<modulus>"])
            spec.torsion = tuple(tors)
        elif kw == "eps":
            i, j = ln.integer("index"), ln.integer("index")
            if (i, j) in spec.eps:
                raise sem("DUPLICATE", f"eps {i} {j} given twice")
            spec.eps[(i, j)] = ln.scalar()
        elif kw == "gen":
            nt = ln.name()
            if nt.text in names:
                raise sem("DUPLICATE", f"name {nt.text!r} already declared", nt.col)
            ln.take(text="color", expected=["color"])
            c = _color(ln)
            ln.take(text="bound", expected=["bound"])
            b = ln.integer("bound")
            names[nt.text] = "gen"
            spec.gens.append(GenDecl(nt.text, c, b, line=lineno))
        elif kw == "der":
            nt = ln.name()
            if nt.text in names:
                raise sem("DUPLICATE", f"name {nt.text!r} already declared", nt.col)
            t = ln.peek()
            if t is not None and t.text == "=":
                ln.i += 1
                target = ln.take("word", expected=["d/d<gen>"])
                if not target.text.startswith("d/d") or len(target.text) == 3:
                    raise ConfigError("PARSE_ERROR", f"got {target.text!r}", lineno, target.col, ["d/d<gen>"])
                gen = target.text[3:]
                if names.get(gen) != "gen":
                    raise sem("UNKNOWN_NAME", f"unknown generator {gen!r}", target.col)
                spec.ders.append(DerDecl(nt.text, gen=gen, line=lineno))
            elif t is not None and t.text == "color":
                ln.i += 1
                c = _color(ln)
                ln.take(text="matrix", expected=["matrix"])
                spec.ders.append(DerDecl(nt.text, color=c, matrix=_matrix(ln), line=lineno))
            else:
                raise ln.fail(["=", "color"])
            names[nt.text] = "der"
        elif kw == "D":
            if seen_D:
                raise sem("DUPLICATE", "D declared twice")
            seen_D = True
            ln.take(text="=", expected=["="])
            members = []
            while ln.peek() is not None:
                t = ln.name("derivation")
                if names.get(t.text) != "der":
                    raise sem("UNKNOWN_NAME", f"unknown derivation {t.text!r}", t.col)
                if t.text in members:
                    raise sem("DUPLICATE", f"{t.text!r} listed twice in D", t.col)
                members.append(t.text)
            if not members:
                raise ln.fail(["<derivation>"])
            spec.D = members
        elif kw == "check":
            t = ln.take("id", expected=list(CHECK_ORDER))
            if t.text not in CHECK_ORDER:
                raise sem("UNKNOWN_CHECK", f"unknown check {t.text!r}; choose from {', '.join(CHECK_ORDER)}", t.col)
            if any(c.id == t.text for c in spec.checks):
                raise sem("DUPLICATE", f"check {t.text} listed twice", t.col)
            decl = CheckDecl(t.text)
            while ln.peek() is not None:
                opt = ln.take("word", expected=CHECK_OPTIONS)
                if opt.text not in CHECK_OPTIONS:
                    ln.i -= 1
                    raise ln.fail(CHECK_OPTIONS)
                val = ln.integer(opt.text)
                if val < 0 or (opt.text != "cutoff" and val == 0):
                    raise sem("BAD_OPTION", f"{opt.text} must be positive", opt.col)
                setattr(decl, opt.text, val)
            spec.checks.append(decl)
        ln.done()
    if not seen_field:
        raise ConfigError("SEMANTIC_ERROR", "missing 'field' line", rule="MISSING_FIELD")
    if not spec.gens:
        raise ConfigError("SEMANTIC_ERROR", "no generators declared", rule="MISSING_GEN")
    if not seen_D:
        raise ConfigError("SEMANTIC_ERROR", "missing 'D = ...' line", rule="MISSING_D")
    ngens = spec.free_rank + len(spec.torsion)
    for (i, j) in spec.eps:
        if not (0 <= i < ngens and 0 <= j < ngens):
            raise ConfigError("SEMANTIC_ERROR", f"eps index ({i}, {j}) outside 0..{ngens - 1}", rule="BAD_INDEX")
    for g in spec.gens:
        if len(g.color) != ngens:
            raise ConfigError("SEMANTIC_ERROR", f"color of {g.name} has {len(g.color)} coordinates, group needs {ngens}",
                              g.line, 1, rule="COLOR_ARITY")
    for d in spec.ders:
        if d.color is not None and len(d.color) != ngens:
            raise ConfigError("SEMANTIC_ERROR", f"color of {d.name} has {len(d.color)} coordinates, group needs {ngens}",
                              d.line, 1, rule="COLOR_ARITY")
    return spec


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_color(c) -> str:
    return "(" + ",".join(str(v) for v in c) + ")"


def emit_config(spec: ConfigSpec) -> str:
    out = ["field rational" if spec.field_kind == "rational" else f"field gf {spec.p}"]
    grp = f"group free {spec.free_rank}"
    if spec.torsion:
        grp += " torsion " + " ".join(str(n) for n in spec.torsion)
    out.append(grp)
    for (i, j), v in sorted(spec.eps.items()):
        out.append(f"eps {i} {j} {_fmt(v)}")
    for g in spec.gens:
        out.append(f"gen {g.name} color {_fmt_color(g.color)} bound {g.bound}")
    for d in spec.ders:
        if d.gen is not None:
            out.append(f"der {d.name} = d/d{d.gen}")
        else:
            rows = ",".join("[" + ",".join(_fmt(x) for x in r) + "]" for r in d.matrix)
            out.append(f"der {d.name} color {_fmt_color(d.color)} matrix [{rows}]")
    out.append("D = " + " ".join(spec.D))
    for c in spec.checks:
        opts = "".join(f" {k} {v}" for k, v in c.params().items())
        out.append(f"check {c.id}{opts}")
    return "\n".join(out) + "\n"


def _semantic(err: ConstructionError) -> ConfigError:
    return ConfigError("SEMANTIC_ERROR", str(err).split(": ", 1)[-1], rule=err.code)


def build_instance(spec: ConfigSpec, name: str = "instance") -> Instance:
    try:
        field = make_field(spec.field_kind, spec.p)
    except ConstructionError as e:
        raise _semantic(e) from None
    g = Grading(spec.free_rank, tuple(spec.torsion))
    n = g.ngens
    E = [[spec.eps.get((i, j), Fraction(1)) for j in range(n)] for i in range(n)]
    bichar = Bicharacter(g, field, E)
    gens = [(x.name, g.color(x.color), x.bound) for x in spec.gens]
    gen_index = {x.name: k for k, x in enumerate(spec.gens)}
    ders = {d.name: d for d in spec.ders}
    members = [ders[nm] for nm in spec.D]

    def der_color(d: DerDecl):
        if d.gen is not None:
            return g.neg(gens[gen_index[d.gen]][1])
        return g.color(d.color)

    infinite = not field.characteristic and any(not bichar.is_odd(der_color(d)) for d in members)
    if infinite and all(d.gen is not None for d in members):
        return window_instance(field, bichar, gens, [gen_index[d.gen] for d in members], list(spec.D), name)
    A = free_truncated_algebra(field, bichar, gens)
    built = {}
    for d in spec.ders:
        if d.gen is not None:
            der = coordinate_derivation(A, gen_index[d.gen])
            der.name = d.name
        else:
            if len(d.matrix) != A.dim or any(len(r) != A.dim for r in d.matrix):
                raise ConfigError("SEMANTIC_ERROR", f"matrix of {d.name} must be {A.dim}x{A.dim}", rule="BAD_SHAPE")
            der = make_derivation(A, d.matrix, d.color, d.name)
        built[d.name] = der
    D = make_D(A, [built[nm] for nm in spec.D])
    return Instance(A, D, name)


def _field_decl(field: str) -> tuple[str, int | None]:
    s = field.strip().lower().replace(" ", "")
    if s in ("rational", "q", "qq"):
        return "rational", None
    m = re.fullmatch(r"(?:gf|f)(\d+)", s)
    if not m:
        raise ConfigError("SEMANTIC_ERROR", f"unknown field {field!r}; use rational or gf<p>", rule="BAD_FIELD")
    p = int(m.group(1))
    if p == 2:
        raise ConfigError("SEMANTIC_ERROR", "characteristic 2 is excluded", rule="CHAR_TWO")
    return "gf", p


EXAMPLES = ("h2n", "truncated_witt", "exceptional", "tensor_counterexample", "rational_weyl")


def example_config(name: str, n: int = 2, field: str = "gf3") -> ConfigSpec:
    """Ready-to-run config for a corpus instance."""
    if name not in EXAMPLES:
        raise ConfigError("SEMANTIC_ERROR", f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}",
                          rule="UNKNOWN_EXAMPLE")
    kind, p = _field_decl(field) if name != "rational_weyl" else ("rational", None)
    spec = ConfigSpec(field_kind=kind, p=p)
    if name == "h2n":
        if n < 2:
            raise ConfigError("SEMANTIC_ERROR", f"n must be at least 2, got {n}", rule="N_TOO_SMALL")
        spec.torsion = (2,)
        spec.eps = {(0, 0): Fraction(-1)}
        spec.gens = [GenDecl(f"x{i + 1}", (1,), 2) for i in range(n)]
        spec.ders = [DerDecl(f"d{i + 1}", gen=f"x{i + 1}") for i in range(n)]
        spec.D = [f"d{i + 1}" for i in range(n)]
        spec.checks = [CheckDecl(c) for c in CHECK_ORDER]
    elif name in ("truncated_witt", "tensor_counterexample"):
        if p is None:
            raise ConfigError("SEMANTIC_ERROR", f"{name} needs a finite field", rule="NEEDS_FINITE_FIELD")
        spec.gens = [GenDecl("t", (), p)] + ([GenDecl("s", (), p)] if name == "tensor_counterexample" else [])
        spec.ders = [DerDecl("d", gen="t")]
        spec.D = ["d"]
        spec.checks = [CheckDecl(c) for c in CHECK_ORDER]
    elif name == "exceptional":
        spec.torsion = (2,)
        spec.eps = {(0, 0): Fraction(-1)}
        spec.gens = [GenDecl("t", (1,), 2)]
        spec.ders = [DerDecl("d", gen="t")]
        spec.D = ["d"]
        spec.checks = [CheckDecl(c) for c in CHECK_ORDER]
    else:
        spec.gens = [GenDecl("t", (), 3)]
        spec.ders = [DerDecl("d", gen="t")]
        spec.D = ["d"]
        spec.checks = [CheckDecl("3.9", cutoff=4)]
    return spec
