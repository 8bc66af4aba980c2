"""Poly-string grammar and JSON file formats.

Grammar: integer/rational coefficients, + - * ^, parentheses, generator
identifiers, and ddr(name) atoms on de Rham carriers.  "i" is reserved over
Q(i).  Whitespace is insignificant.  Malformed input raises ParseError with
line and column.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import GaussRational


class ParseError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


_OPS = set("+-*^()")


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch == "/":
            tokens.append(("/", "/", line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, alg, text):
        self.alg = alg
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, got {tok[1]!r}", tok[2], tok[3])
        self.pos += 1
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"trailing input {tok[1]!r}", tok[2], tok[3])
        return e

    def expr(self):
        sign = 1
        tok = self.peek()
        while tok[0] in ("+", "-"):
            if tok[0] == "-":
                sign = -sign
            self.take()
            tok = self.peek()
        e = self.term()
        if sign < 0:
            e = -e
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self):
        e = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "*":
                self.take()
                e = e * self.factor()
            elif tok[0] in ("name", "int", "("):
                # implicit multiplication: 2x, x y
                e = e * self.factor()
            else:
                return e

    def factor(self):
        tok = self.peek()
        if tok[0] == "-":
            self.take()
            return -self.factor()
        e = self.atom()
        if self.peek()[0] == "^":
            self.take()
            neg = False
            if self.peek()[0] == "-":
                self.take()
                neg = True
            etok = self.take("int")
            if neg:
                raise ParseError("negative exponents are not supported", etok[2], etok[3])
            e0 = e
            power = int(etok[1])
            if power == 0:
                return self.alg.one()
            for _ in range(power - 1):
                e = e * e0
        return e

    def atom(self):
        tok = self.take()
        kind, text, line, col = tok
        if kind == "int":
            num = int(text)
            if self.peek()[0] == "/":
                self.take()
                dtok = self.take("int")
                den = int(dtok[1])
                if den == 0:
                    raise ParseError("zero denominator", dtok[2], dtok[3])
                return self.alg.scalar(Fraction(num, den))
            return self.alg.scalar(num)
        if kind == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind == "name":
            if text == "i":
                if not self.alg.field.has_i:
                    raise ParseError("i is reserved for gaussian mode", line, col)
                return self.alg.scalar(GaussRational(0, 1))
            if text == "ddr":
                if self.peek()[0] == "(":
                    self.take("(")
                    ntok = self.take("name")
                    self.take(")")
                    full = f"ddr({ntok[1]})"
                    if full not in self.alg.by_name:
                        raise ParseError(f"unknown form generator {full!r}", ntok[2], ntok[3])
                    return self.alg.gen(full)
            if text not in self.alg.by_name:
                raise ParseError(f"unknown generator {text!r}", line, col)
            return self.alg.gen(text)
        raise ParseError(f"unexpected token {text!r}", line, col)


def parse_element(alg, text):
    return _Parser(alg, text).parse()


def _render_coeff(c, lead):
    if isinstance(c, GaussRational):
        if c.im == 0:
            c = c.re
        else:
            s = repr(c)
            return s if lead else f"+ {s}"
    if c < 0:
        body = f"{-c}" if -c != 1 else ""
        return f"-{body}" if lead else f"- {body}"
    body = f"{c}" if c != 1 else ""
    return body if lead else f"+ {body}"


def render_element(e):
    if e.is_zero():
        return "0"
    alg = e.alg
    parts = []
    for m, c in e.sorted_terms():
        even, odd = m
        factors = []
        for i, exp in even:
            n = alg.gens[i].name
            factors.append(n if exp == 1 else f"{n}^{exp}")
        factors += [alg.gens[i].name for i in odd]
        cs = _render_coeff(c, lead=not parts)
        if not factors:
            one = "1" if cs in ("", "-", "+ ", "- ") else ""
            if cs in ("", "-"):
                parts.append(cs + "1")
            elif cs in ("+ ", "- "):
                parts.append(cs + "1")
            else:
                parts.append(cs)
            continue
        body = "*".join(factors)
        if cs in ("", "+ "):
            parts.append(("" if not parts else "+ ") + body)
        elif cs == "-":
            parts.append("-" + body)
        elif cs == "- ":
            parts.append("- " + body)
        else:
            parts.append(f"{cs}*{body}")
    s = " ".join(parts)
    if e.denom:
        dens = []
        for ui, exp in e.denom:
            n = f"({e.alg.unit_names[ui]})"
            dens.append(n if exp == 1 else f"{n}^{exp}")
        s = f"({s}) / ({'*'.join(dens)})"
    return s


# -- presentation files ---------------------------------------------------------


def presentation_to_dict(pres):
    d = {
        "field": pres.field.kind,
        "units": list(pres.unit_names),
        "generators": [{"name": g.name, "degree": g.degree} for g in pres.gens],
        "differential": {},
    }
    if pres.differential:
        for i, val in sorted(pres.differential.items()):
            d["differential"][pres.gens[i].name] = render_element(val)
    return d


def presentation_from_dict(d, label=""):
    from .algebra import Presentation
    from .fields import field_by_name

    field = field_by_name(d["field"])
    gens = [(g["name"], int(g["degree"])) for g in d["generators"]]
    for name, deg in gens:
        if deg > 0:
            raise ValueError(f"generator {name} has positive degree {deg}")
    pres = Presentation(field, gens, units=d.get("units", ()), label=label)
    pres.define_differential(d.get("differential", {}))
    return pres
