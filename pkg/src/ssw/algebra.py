"""Free graded-commutative algebra kernel over an exact field.

Elements are stored sparsely as {monomial: coefficient}.  A monomial is a
pair (even, odd): `even` is a tuple of (generator index, exponent) and `odd`
a tuple of generator indices, both sorted by the canonical generator order
(degree, name).  Odd generators square to zero; reordering odd generators
accumulates the Koszul sign.  A presentation may declare base-ring units;
elements then carry a denominator which is a product of declared units.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import CoefficientField, GaussRational


class Generator:
    __slots__ = ("name", "degree", "form_degree", "index", "rank")

    def __init__(self, name, degree, form_degree=0):
        self.name = name
        self.degree = degree  # total degree (internal + form part)
        self.form_degree = form_degree
        self.index = -1
        self.rank = -1

    @property
    def parity(self):
        return self.degree & 1

    def __repr__(self):
        return f"Generator({self.name!r}, {self.degree})"


class Presentation:
    """A free graded-commutative algebra, optionally with a differential.

    Degree-0 generators with form_degree 0 form the base polynomial ring.
    The differential, once defined, raises degree by exactly one and is zero
    on the base.
    """

    def __init__(self, field: CoefficientField, generators, units=(), label=""):
        self.field = field
        self.label = label
        self.gens: list[Generator] = []
        self.by_name: dict[str, Generator] = {}
        for spec in generators:
            g = spec if isinstance(spec, Generator) else Generator(*spec)
            if g.name in self.by_name:
                raise ValueError(f"duplicate generator name {g.name!r}")
            g.index = len(self.gens)
            self.gens.append(g)
            self.by_name[g.name] = g
        for rank, g in enumerate(sorted(self.gens, key=lambda g: (g.degree, g.name))):
            g.rank = rank
        self.rank_of = [g.rank for g in self.gens]
        self.degree_of = [g.degree for g in self.gens]
        self.differential: dict[int, AlgElement] | None = None
        # units are parsed/assigned after construction so they can be elements
        self.units: list[AlgElement] = []
        self.unit_names: list[str] = []
        for u in units:
            self.declare_unit(u)

    # -- construction helpers -------------------------------------------------

    def declare_unit(self, u):
        from .parsing import parse_element

        if isinstance(u, str):
            name = u
            u = parse_element(self, u)
        else:
            name = str(u)
        if u.is_zero():
            raise ValueError("the zero element cannot be a unit")
        if any(self.gens[i].degree != 0 for m in u.terms for i in m[1]) or any(
            self.gens[i].degree != 0 for m in u.terms for i, _ in m[0]
        ):
            raise ValueError("units must be base-ring elements")
        self.units.append(u)
        self.unit_names.append(name)
        return len(self.units) - 1

    def define_differential(self, images: dict):
        """images: generator name -> AlgElement (or poly string), absent means 0."""
        from .parsing import parse_element

        diff: dict[int, AlgElement] = {}
        for name, val in images.items():
            g = self.by_name.get(name)
            if g is None:
                raise KeyError(f"unknown generator {name!r}")
            if isinstance(val, str):
                val = parse_element(self, val)
            if val.is_zero():
                continue
            d = val.degree()
            if d is None or d != g.degree + 1:
                raise ValueError(
                    f"differential of {name} must be homogeneous of degree "
                    f"{g.degree + 1}, got degree {d}"
                )
            diff[g.index] = val
        for g in self.gens:
            if g.degree == 0 and g.index in diff:
                raise ValueError(f"degree-0 generator {g.name} must have zero differential")
        self.differential = diff

    # -- element constructors --------------------------------------------------

    def zero(self):
        return AlgElement(self, {})

    def one(self):
        return AlgElement(self, {((), ()): self.field.one})

    def scalar(self, c):
        c = self.field.coerce(c)
        if not c:
            return self.zero()
        return AlgElement(self, {((), ()): c})

    def gen(self, name):
        g = self.by_name.get(name)
        if g is None:
            raise KeyError(f"unknown generator {name!r} in {self.label or 'presentation'}")
        if g.parity:
            mono = ((), (g.index,))
        else:
            mono = (((g.index, 1),), ())
        return AlgElement(self, {mono: self.field.one})

    def monomial(self, names):
        out = self.one()
        for n in names:
            out = out * self.gen(n)
        return out

    def base_gens(self):
        return [g for g in self.gens if g.degree == 0 and g.form_degree == 0]

    def d(self, e):
        """Apply the differential (a parity-1 derivation) to an element."""
        if self.differential is None:
            raise ValueError("presentation has no differential")
        return apply_derivation(self, self.differential, 1, e)

    def __repr__(self):
        return f"Presentation({self.label or len(self.gens)} gens)"


# -- monomial arithmetic ------------------------------------------------------


def _merge_odd(rank_of, o1, o2):
    """Merge two rank-sorted odd index tuples; return (tuple, sign) or None."""
    if not o1:
        return o2, 1
    if not o2:
        return o1, 1
    out = []
    i, j, n1 = 0, 0, len(o1)
    inv = 0
    while i < n1 and j < len(o2):
        a, b = o1[i], o2[j]
        if a == b:
            return None
        if rank_of[a] < rank_of[b]:
            out.append(a)
            i += 1
        else:
            out.append(b)
            inv += n1 - i
            j += 1
    out.extend(o1[i:])
    out.extend(o2[j:])
    return tuple(out), (-1 if inv & 1 else 1)


def _merge_even(rank_of, e1, e2):
    if not e1:
        return e2
    if not e2:
        return e1
    out = []
    i, j = 0, 0
    while i < len(e1) and j < len(e2):
        (a, ea), (b, eb) = e1[i], e2[j]
        if a == b:
            out.append((a, ea + eb))
            i += 1
            j += 1
        elif rank_of[a] < rank_of[b]:
            out.append(e1[i])
            i += 1
        else:
            out.append(e2[j])
            j += 1
    out.extend(e1[i:])
    out.extend(e2[j:])
    return tuple(out)


def mono_mul(alg, m1, m2):
    """Product of two canonical monomials: (monomial, sign) or None if zero."""
    merged = _merge_odd(alg.rank_of, m1[1], m2[1])
    if merged is None:
        return None
    odd, sign = merged
    return (_merge_even(alg.rank_of, m1[0], m2[0]), odd), sign


def mono_degree(alg, m):
    d = 0
    for i, e in m[0]:
        d += alg.degree_of[i] * e
    for i in m[1]:
        d += alg.degree_of[i]
    return d


def mono_form_degree(alg, m):
    d = 0
    for i, e in m[0]:
        d += alg.gens[i].form_degree * e
    for i in m[1]:
        d += alg.gens[i].form_degree
    return d


def mono_key(alg, m):
    """Deterministic sort key: (total degree, ranked letters)."""
    letters = [(alg.rank_of[i], e) for i, e in m[0]]
    letters += [(alg.rank_of[i], 1) for i in m[1]]
    letters.sort()
    return (mono_degree(alg, m), tuple(letters))


# -- elements -----------------------------------------------------------------


class AlgElement:
    """Normalized element; optionally divided by a product of declared units."""

    __slots__ = ("alg", "terms", "denom")

    def __init__(self, alg, terms, denom=()):
        self.alg = alg
        self.terms = terms
        self.denom = denom if terms else ()

    # denom is a sorted tuple of (unit index, exponent)

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Common degree of all terms, or None (zero or inhomogeneous)."""
        d = None
        for m in self.terms:
            md = mono_degree(self.alg, m)
            if d is None:
                d = md
            elif d != md:
                return None
        return d

    def form_degree(self):
        d = None
        for m in self.terms:
            md = mono_form_degree(self.alg, m)
            if d is None:
                d = md
            elif d != md:
                return None
        return d

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.alg is not other.alg:
            raise ValueError("elements from different presentations")
        if not self.terms:
            return other
        if not other.terms:
            return self
        if self.denom == other.denom:
            terms = dict(self.terms)
            for m, c in other.terms.items():
                nc = terms.get(m)
                nc = c if nc is None else nc + c
                if nc:
                    terms[m] = nc
                elif m in terms:
                    del terms[m]
            return _reduce(AlgElement(self.alg, terms, self.denom))
        a, b = _common_denominator(self, other)
        return a + b

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return AlgElement(self.alg, {m: -c for m, c in self.terms.items()}, self.denom)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.alg is not other.alg:
            raise ValueError("elements from different presentations")
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = mono_mul(self.alg, m1, m2)
                if r is None:
                    continue
                m, sign = r
                c = c1 * c2 if sign > 0 else -(c1 * c2)
                nc = terms.get(m)
                nc = c if nc is None else nc + c
                if nc:
                    terms[m] = nc
                elif m in terms:
                    del terms[m]
        return _reduce(AlgElement(self.alg, terms, _denom_mul(self.denom, other.denom)))

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, AlgElement):
            return other
        if isinstance(other, (int, Fraction, GaussRational)):
            return self.alg.scalar(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussRational)):
            other = self.alg.scalar(other)
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self.alg is other.alg and self.denom == other.denom and self.terms == other.terms

    __hash__ = None

    def scaled(self, c):
        c = self.alg.field.coerce(c)
        if not c:
            return self.alg.zero()
        return AlgElement(self.alg, {m: c * v for m, v in self.terms.items()}, self.denom)

    def coefficient(self, mono):
        return self.terms.get(mono, self.alg.field.zero)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mono_key(self.alg, mc[0]))

    def evaluate(self, assignment: dict):
        """Evaluate a base-ring element at scalar values {gen name: scalar}."""
        alg = self.alg
        total = alg.field.zero
        for (even, odd), c in self.terms.items():
            if odd:
                raise ValueError("cannot evaluate odd generators at a point")
            v = c
            for i, e in even:
                g = alg.gens[i]
                if g.name not in assignment:
                    raise KeyError(f"no value for {g.name}")
                v = v * (alg.field.coerce(assignment[g.name]) ** e)
            total = total + v
        for ui, e in self.denom:
            uval = self.alg.units[ui].evaluate(assignment)
            if not uval:
                raise ZeroDivisionError(f"unit {self.alg.unit_names[ui]} vanishes at point")
            total = total / (uval**e)
        return total

    def __repr__(self):
        from .parsing import render_element

        return render_element(self)


def _denom_mul(d1, d2):
    if not d1:
        return d2
    if not d2:
        return d1
    acc = dict(d1)
    for u, e in d2:
        acc[u] = acc.get(u, 0) + e
    return tuple(sorted(acc.items()))


def _denom_element(alg, denom):
    out = alg.one()
    for u, e in denom:
        for _ in range(e):
            out = out * alg.units[u]
    return out


def _common_denominator(a, b):
    da, db = dict(a.denom), dict(b.denom)
    lcm = dict(da)
    for u, e in db.items():
        lcm[u] = max(lcm.get(u, 0), e)
    lcm_t = tuple(sorted(lcm.items()))

    def scale(x, dx):
        extra = tuple(sorted((u, e - dx.get(u, 0)) for u, e in lcm.items() if e - dx.get(u, 0) > 0))
        if not extra:
            return AlgElement(x.alg, x.terms, lcm_t)
        mult = _denom_element(x.alg, extra)
        scaled = AlgElement(x.alg, x.terms, ()) * mult
        return AlgElement(x.alg, scaled.terms, lcm_t)

    return scale(a, da), scale(b, db)


def _reduce(e):
    """Cancel declared units from the denominator when division is exact."""
    if not e.denom or not e.terms:
        return AlgElement(e.alg, e.terms, ())
    denom = dict(e.denom)
    terms = e.terms
    changed = True
    while changed:
        changed = False
        for u in sorted(denom):
            while denom.get(u, 0) > 0:
                q = _exact_divide(e.alg, terms, e.alg.units[u])
                if q is None:
                    break
                terms = q
                denom[u] -= 1
                if denom[u] == 0:
                    del denom[u]
                changed = True
    return AlgElement(e.alg, terms, tuple(sorted(denom.items())))


def _exact_divide(alg, terms, u):
    """Divide {mono: coeff} by base element u; None unless division is exact."""
    # group terms by their non-base part; each group is a base polynomial
    groups: dict = {}
    for (even, odd), c in terms.items():
        base = []
        rest = []
        for i, e in even:
            (base if alg.degree_of[i] == 0 and alg.gens[i].form_degree == 0 else rest).append((i, e))
        key = (tuple(rest), odd)
        groups.setdefault(key, {})[tuple(base)] = c
    u_poly = {}
    for (even, odd), c in u.terms.items():
        if odd:
            return None
        u_poly[even] = c
    out: dict = {}
    for key, poly in groups.items():
        q = _poly_divide(alg, poly, u_poly)
        if q is None:
            return None
        rest, odd = key
        for base, c in q.items():
            mono = (_merge_even(alg.rank_of, base, rest), odd)
            out[mono] = c
    return out


def _poly_divide(alg, poly, u_poly):
    """Long division of base polynomials (dicts even-tuple -> coeff)."""

    def lead(p):
        return max(p, key=lambda m: tuple(sorted((alg.rank_of[i], e) for i, e in m)))

    lu = lead(u_poly)
    cu = u_poly[lu]
    lu_d = dict(lu)
    rem = dict(poly)
    quo: dict = {}
    while rem:
        lr = lead(rem)
        lr_d = dict(lr)
        if any(lr_d.get(i, 0) < e for i, e in lu_d.items()):
            return None
        m = tuple(
            sorted(
                ((i, e - lu_d.get(i, 0)) for i, e in lr_d.items() if e - lu_d.get(i, 0) > 0),
                key=lambda t: alg.rank_of[t[0]],
            )
        )
        c = rem[lr] / cu
        quo[m] = quo.get(m, alg.field.zero) + c
        # rem -= c * m * u
        for um, uc in u_poly.items():
            prod = _merge_even(alg.rank_of, m, um)
            nc = rem.get(prod, alg.field.zero) - c * uc
            if nc:
                rem[prod] = nc
            elif prod in rem:
                del rem[prod]
    return quo


# -- normalization of raw products --------------------------------------------


def normalize(alg, raw):
    """Sum of (coefficient, [generator names]) products, in canonical form."""
    total = alg.zero()
    for coeff, names in raw:
        term = alg.scalar(coeff)
        for n in names:
            term = term * alg.gen(n)
        total = total + term
    return total


# -- graded derivations --------------------------------------------------------


def apply_derivation(alg, spec, parity, e):
    """Extend spec (generator index -> AlgElement) as a graded derivation.

    Leibniz rule: D(ab) = D(a) b + (-1)^(parity * |a|) a D(b).  The spec must
    be degree-homogeneous; parity is the parity of the degree shift.
    """
    if not isinstance(e, AlgElement):
        raise TypeError("apply_derivation expects an AlgElement")
    out = alg.zero()
    for (even, odd), c in e.terms.items():
        # even generators contribute with no sign (their degrees are even),
        # but the image must be inserted before the odd factors
        for pos, (i, exp) in enumerate(even):
            val = spec.get(i)
            if val is None or (isinstance(val, AlgElement) and val.is_zero()):
                continue
            rest_even = list(even)
            if exp > 1:
                rest_even[pos] = (i, exp - 1)
            else:
                del rest_even[pos]
            left = AlgElement(alg, {(tuple(rest_even), ()): c * exp})
            right = AlgElement(alg, {((), odd): alg.field.one})
            out = out + left * val * right
        # odd generators: walk positions, sign (-1)^(parity * #odd before)
        for pos, i in enumerate(odd):
            val = spec.get(i)
            if val is None or (isinstance(val, AlgElement) and val.is_zero()):
                continue
            sign = -1 if (parity and pos & 1) else 1
            left = AlgElement(alg, {(even, odd[:pos]): c if sign > 0 else -c})
            right = AlgElement(alg, {((), odd[pos + 1 :]): alg.field.one})
            out = out + left * val * right
    if e.denom:
        # D(N/U) = (D(N) U - N D(U)) / U^2
        U = _denom_element(alg, e.denom)
        N = AlgElement(alg, e.terms, ())
        DN = apply_derivation(alg, spec, parity, N)
        DU = apply_derivation(alg, spec, parity, U)
        num = DN * U - N * DU
        return _reduce(AlgElement(alg, num.terms, _denom_mul(num.denom, _denom_mul(e.denom, e.denom))))
    return out


def partial_derivative(e, name):
    """Left partial derivative with respect to a generator."""
    alg = e.alg
    g = alg.by_name[name]
    spec = {g.index: alg.one()}
    return apply_derivation(alg, spec, g.parity, e)


def differential_spec_check(alg, spec, parity):
    for i, val in spec.items():
        if val is None or val.is_zero():
            continue
        d = val.degree()
        if d is None:
            raise ValueError(f"derivation image of {alg.gens[i].name} is inhomogeneous")
        if (d - alg.degree_of[i]) & 1 != parity & 1:
            raise ValueError("derivation images do not match the stated parity")


# -- reports ------------------------------------------------------------------


class CheckRecord:
    __slots__ = ("name", "status", "residual_terms", "detail")

    def __init__(self, name, ok, residual=None, detail=""):
        self.name = name
        if isinstance(ok, str):
            self.status = ok
        else:
            self.status = "pass" if ok else "fail"
        if residual is None:
            self.residual_terms = 0
        elif isinstance(residual, int):
            self.residual_terms = residual
        else:
            self.residual_terms = len(residual.terms)
            if self.residual_terms and not detail:
                detail = repr(residual)
        self.detail = detail

    @property
    def ok(self):
        return self.status in ("pass", "skip")

    def as_dict(self):
        d = {"name": self.name, "status": self.status, "residual_terms": self.residual_terms}
        if self.detail:
            d["detail"] = self.detail
        return d

    def __repr__(self):
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{self.status.upper():4s}] {self.name}{extra}"


def check_d_squared(pres):
    """Per-generator report that d(d(g)) = 0."""
    if pres.differential is None:
        raise ValueError("presentation has no differential")
    records = []
    for g in pres.gens:
        img = pres.differential.get(g.index)
        if img is None:
            records.append(CheckRecord(f"d2[{g.name}]", True))
            continue
        r = pres.d(img)
        records.append(CheckRecord(f"d2[{g.name}]", r.is_zero(), r))
    return records


# -- morphisms ----------------------------------------------------------------


class CdgaMorphism:
    """Degree-preserving algebra map determined by generator images."""

    def __init__(self, source: Presentation, target: Presentation, images: dict, label=""):
        from .parsing import parse_element

        self.source = source
        self.target = target
        self.label = label
        self.images: dict[int, AlgElement] = {}
        for name, val in images.items():
            g = source.by_name.get(name)
            if g is None:
                raise KeyError(f"unknown source generator {name!r}")
            if isinstance(val, str):
                val = parse_element(target, val)
            if not val.is_zero():
                d = val.degree()
                if d != g.degree:
                    raise ValueError(
                        f"image of {name} has degree {d}, expected {g.degree}"
                    )
            self.images[g.index] = val
        for g in source.gens:
            if g.index not in self.images:
                raise KeyError(f"no image given for generator {g.name}")
        # units must be carried to declared units of the target (by name)
        self._unit_map = {}
        for ui, uname in enumerate(source.unit_names):
            if uname in target.unit_names:
                self._unit_map[ui] = target.unit_names.index(uname)

    def apply(self, e: AlgElement) -> AlgElement:
        if e.alg is not self.source:
            raise ValueError("element not in the source presentation")
        out = self.target.zero()
        for (even, odd), c in e.terms.items():
            term = self.target.scalar(c)
            for i, exp in even:
                img = self.images[i]
                for _ in range(exp):
                    term = term * img
                    if term.is_zero():
                        break
                if term.is_zero():
                    break
            if term.is_zero():
                out = out + term
                continue
            for i in odd:
                term = term * self.images[i]
                if term.is_zero():
                    break
            out = out + term
        if e.denom:
            mapped = []
            for ui, exp in e.denom:
                ti = self._unit_map.get(ui)
                if ti is None:
                    raise ValueError(
                        f"cannot transport unit {self.source.unit_names[ui]} along morphism"
                    )
                mapped.append((ti, exp))
            out = _reduce(AlgElement(self.target, out.terms, _denom_mul(out.denom, tuple(sorted(mapped)))))
        return out

    def compose(self, inner: "CdgaMorphism") -> "CdgaMorphism":
        """self o inner."""
        if inner.target is not self.source:
            raise ValueError("morphisms not composable")
        images = {g.name: self.apply(inner.images[g.index]) for g in inner.source.gens}
        return CdgaMorphism(inner.source, self.target, images, label=f"{self.label}o{inner.label}")

    def check(self):
        """Report: commutes with differentials on every generator."""
        records = []
        for g in self.source.gens:
            dsrc = self.source.differential.get(g.index) if self.source.differential else None
            lhs = self.apply(dsrc) if dsrc is not None else self.target.zero()
            rhs = self.target.d(self.images[g.index])
            r = lhs - rhs
            records.append(CheckRecord(f"chain[{self.label or 'phi'}:{g.name}]", r.is_zero(), r))
        return records

    def is_identity_table(self):
        for g in self.source.gens:
            img = self.images[g.index]
            if img != self.target.gen(g.name):
                return False
        return True


def identity_morphism(pres):
    return CdgaMorphism(pres, pres, {g.name: pres.gen(g.name) for g in pres.gens}, label="id")
