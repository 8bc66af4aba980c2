"""De Rham complex of a presented cdga.

The carrier adjoins, for each generator g, a form generator ddr(g) of
form-degree 1 whose total degree is deg(g) + 1, so the Koszul rule in total
degree governs all products.  Two anticommuting differentials act: the de
Rham differential (g -> ddr(g)) and the internal differential extending the
presentation's d with d(ddr g) = -ddr(dg).
"""

from __future__ import annotations

from .algebra import (
    AlgElement,
    CdgaMorphism,
    CheckRecord,
    Generator,
    Presentation,
    apply_derivation,
    mono_form_degree,
)


class FormAlgebra:
    """Bigraded carrier of de Rham expressions over a presentation."""

    def __init__(self, base: Presentation):
        self.base = base
        gens = []
        for g in base.gens:
            gens.append(Generator(g.name, g.degree, 0))
        for g in base.gens:
            gens.append(Generator(f"ddr({g.name})", g.degree + 1, 1))
        self.alg = Presentation(base.field, gens, label=f"DR({base.label})")
        for u in base.unit_names:
            self.alg.declare_unit(u)
        n = len(base.gens)
        self._ddr_index = {i: n + i for i in range(n)}
        # de Rham differential: g -> ddr(g), ddr(g) -> 0
        self._ddr_spec = {
            i: self.alg.gen(f"ddr({base.gens[i].name})") for i in range(n)
        }
        # internal differential: g -> lift(dg), ddr(g) -> -ddr(lift(dg))
        self._d_spec = {}
        if base.differential is not None:
            for i in range(n):
                img = base.differential.get(i)
                if img is None:
                    continue
                lifted = self.lift(img)
                self._d_spec[i] = lifted
                self._d_spec[n + i] = -apply_derivation(self.alg, self._ddr_spec, 1, lifted)

    def lift(self, e: AlgElement) -> AlgElement:
        """Lift an element of the base presentation into the carrier."""
        if e.alg is self.alg:
            return e
        if e.alg is not self.base:
            raise ValueError("element does not live on the base presentation")
        # generator indices agree on the first block by construction
        return AlgElement(self.alg, dict(e.terms), e.denom)

    def zero(self):
        return self.alg.zero()

    def ddr(self, e: AlgElement) -> AlgElement:
        return apply_derivation(self.alg, self._ddr_spec, 1, self.lift(e))

    def d(self, e: AlgElement) -> AlgElement:
        return apply_derivation(self.alg, self._d_spec, 1, self.lift(e))

    def wedge(self, a: AlgElement, b: AlgElement) -> AlgElement:
        if a.alg is not self.alg or b.alg is not self.alg:
            raise ValueError("wedge arguments must live on the same carrier")
        return a * b

    def contract(self, gen_name: str, e: AlgElement) -> AlgElement:
        """Interior product along the vector dual to a generator."""
        g = self.base.by_name[gen_name]
        spec = {self._ddr_index[g.index]: self.alg.one()}
        return apply_derivation(self.alg, spec, (g.degree + 1) & 1, self.lift(e))

    def parse(self, text: str) -> AlgElement:
        from .parsing import parse_element

        return parse_element(self.alg, text)


_FORM_CACHE: dict[int, FormAlgebra] = {}


def forms(pres: Presentation) -> FormAlgebra:
    fa = _FORM_CACHE.get(id(pres))
    if fa is None or fa.base is not pres:
        fa = FormAlgebra(pres)
        _FORM_CACHE[id(pres)] = fa
    return fa


def pullback_form(phi: CdgaMorphism, omega: AlgElement) -> AlgElement:
    """Transport a form along a cdga morphism (ddr g -> ddr(phi g))."""
    fsrc = forms(phi.source)
    ftgt = forms(phi.target)
    if omega.alg is not fsrc.alg:
        raise ValueError("form does not live on the source carrier")
    induced = getattr(phi, "_form_morphism", None)
    if induced is None:
        images = {}
        for g in phi.source.gens:
            img = ftgt.lift(phi.images[g.index])
            images[g.name] = img
            images[f"ddr({g.name})"] = ftgt.ddr(img)
        induced = CdgaMorphism(fsrc.alg, ftgt.alg, images, label=f"DR({phi.label})")
        phi._form_morphism = induced
    return induced.apply(omega)


class ShiftedClosedTwoForm:
    """(shift)-shifted closed 2-form with all higher terms zero."""

    def __init__(self, carrier: Presentation, shift: int, leading: AlgElement):
        fa = forms(carrier)
        self.carrier = carrier
        self.shift = shift
        self.leading = leading if leading.alg is fa.alg else fa.lift(leading)
        self.higher = ()  # pinned to zero

    def __repr__(self):
        return f"ShiftedClosedTwoForm(shift={self.shift}, {self.leading!r})"


def _pairing_matrix(form: ShiftedClosedTwoForm):
    """Generator-pairing matrix of a constant-coefficient 2-form, or None."""
    fa = forms(form.carrier)
    gens = form.carrier.gens
    n = len(gens)
    ddr_of = {}
    for g in gens:
        ddr_of[fa.alg.by_name[f"ddr({g.name})"].index] = g.index
    mat = [[fa.alg.field.zero for _ in range(n)] for _ in range(n)]
    for (even, odd), c in form.leading.terms.items():
        letters = []
        for i, e in even:
            letters.extend([i] * e)
        letters.extend(odd)
        if len(letters) != 2 or any(i not in ddr_of for i in letters):
            return None
        a, b = ddr_of[letters[0]], ddr_of[letters[1]]
        ga, gb = gens[a], gens[b]
        sign = -1 if ((ga.degree + 1) & 1) and ((gb.degree + 1) & 1) else 1
        mat[a][b] = mat[a][b] + c
        mat[b][a] = mat[b][a] + (c if sign > 0 else -c)
    return mat


def check_shifted_symplectic(pres: Presentation, form: ShiftedClosedTwoForm):
    """Closedness under both differentials plus generator-pairing invertibility."""
    from .linalg import rank

    fa = forms(pres)
    records = []
    lead = form.leading
    fd = lead.form_degree()
    deg = lead.degree()
    homog = fd == 2 and deg == form.shift + 2
    records.append(
        CheckRecord(
            "symplectic:bidegree",
            homog,
            detail="" if homog else f"form degree {fd}, total degree {deg}",
        )
    )
    dr = fa.d(lead)
    records.append(CheckRecord("symplectic:d-closed", dr.is_zero(), dr))
    ddr = fa.ddr(lead)
    records.append(CheckRecord("symplectic:ddr-closed", ddr.is_zero(), ddr))
    mat = _pairing_matrix(form)
    if mat is None:
        records.append(
            CheckRecord(
                "symplectic:nondegenerate",
                "skip",
                detail="non-constant coefficients; nondegeneracy not checked",
            )
        )
    else:
        n = len(mat)
        ok = rank(mat, pres.field) == n
        records.append(CheckRecord("symplectic:nondegenerate", ok))
    return records


class IsotropyWitness:
    """Homotopy h with d(h) = transported leading form and ddr(h) = 0.

    `transport` carries the symplectic carrier's forms onto the carrier of h
    (an inclusion into a replacement, or an honest section map).
    """

    def __init__(self, label, form: ShiftedClosedTwoForm, transport: CdgaMorphism, homotopy: AlgElement):
        self.label = label
        self.form = form
        self.transport = transport
        self.homotopy = homotopy

    def carrier(self):
        return self.transport.target


def check_isotropic(witness: IsotropyWitness, direction: str = "pullback"):
    if direction not in ("pullback", "pushforward"):
        raise ValueError("direction must be pullback or pushforward")
    fa = forms(witness.transport.target)
    moved = pullback_form(witness.transport, witness.form.leading)
    dh = fa.d(witness.homotopy)
    r1 = dh - moved
    r2 = fa.ddr(witness.homotopy)
    return [
        CheckRecord(f"isotropic[{witness.label}]:d(h)=f*w", r1.is_zero(), r1),
        CheckRecord(f"isotropic[{witness.label}]:ddr(h)=0", r2.is_zero(), r2),
    ]
