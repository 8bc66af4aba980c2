"""Builders and validators for the Darboux-form cdga families.

even:     generators y_i, z_i (degree -1), w_j (degree -2) over a polynomial
          base; Hamiltonian sum(f_i y_i + g_i z_i) with sum(f_i g_i) = 0.
general:  generators y_j (degree -1), z_k (degree -2); data f_j with
          sum(f_j^2) = 0; h_j = f_j/2, g_k^j = df_j/dx_k.
weighted: invertible weights q_j; h_j = f_j/(2 q_j),
          g_k^j = df_j/dx_k - (f_j/(2 q_j)) dq_j/dx_k;
          sum(f_j^2 / q_j) = 0.
"""

from __future__ import annotations

from .algebra import (
    AlgElement,
    CdgaMorphism,
    CheckRecord,
    Presentation,
    check_d_squared,
    partial_derivative,
)
from .derham import ShiftedClosedTwoForm, check_shifted_symplectic, forms
from .fields import field_by_name
from .parsing import parse_element


class CmeViolation(ValueError):
    def __init__(self, kind, residual):
        super().__init__(f"classical master equation ({kind}) violated: {residual!r}")
        self.residual = residual


def _scratch_base(field, x_names, units=()):
    return Presentation(field, [(x, 0) for x in x_names], units=units, label="base")


class DarbouxData:
    """Shared plumbing: a scratch base ring used to parse the input data."""

    def __init__(self, field, x_names, units=()):
        if isinstance(field, str):
            field = field_by_name(field)
        self.field = field
        self.x_names = list(x_names)
        self.base = _scratch_base(field, x_names, units)

    def parse(self, s):
        if isinstance(s, AlgElement):
            return s
        return parse_element(self.base, s)


class EvenDarbouxData(DarbouxData):
    def __init__(self, field, x_names, f, g, y_names=None, z_names=None, w_names=None):
        super().__init__(field, x_names)
        self.f = [self.parse(s) for s in f]
        self.g = [self.parse(s) for s in g]
        if len(self.f) != len(self.g):
            raise ValueError("f and g must have equal length")
        m1 = len(self.f)
        self.y_names = list(y_names) if y_names else [f"y{i+1}" for i in range(m1)]
        self.z_names = list(z_names) if z_names else [f"z{i+1}" for i in range(m1)]
        self.w_names = list(w_names) if w_names else [f"w{j+1}" for j in range(len(x_names))]


class GeneralDarbouxData(DarbouxData):
    def __init__(self, field, x_names, f):
        super().__init__(field, x_names)
        self.f = [self.parse(s) for s in f]
        self.h = [fj.scaled(self.field.coerce(1) / 2) for fj in self.f]

    def g(self, k, j):
        """dg^j/dx_k column entry for the degree -2 differentials."""
        return partial_derivative(self.f[j], self.x_names[k])


class WeightedDarbouxData(DarbouxData):
    def __init__(self, field, x_names, f, q):
        if len(f) != len(q):
            raise ValueError("f and q must have equal length")
        # declare the weights invertible before parsing h, g
        scratch = DarbouxData(field, x_names)
        q_elems = [scratch.parse(s) for s in q]
        for qj in q_elems:
            if qj.is_zero():
                raise ValueError("weights must be nonzero")
        super().__init__(field, x_names, units=[str(s) for s in q])
        self.f = [self.parse(s) for s in f]
        self.q = [self.parse(str(s)) for s in q]
        half = self.field.coerce(1) / 2
        self.h = []
        for fj, qj, uname in zip(self.f, self.q, self.base.unit_names):
            ui = self.base.unit_names.index(uname)
            inv_q = AlgElement(self.base, {((), ()): self.field.one}, ((ui, 1),))
            self.h.append(fj.scaled(half) * inv_q)

    def g(self, k, j):
        dq = partial_derivative(self.q[j], self.x_names[k])
        return partial_derivative(self.f[j], self.x_names[k]) - self.h[j] * dq


# -- classical master equation checks -------------------------------------------


def cme_check_even(f, g):
    if len(f) != len(g):
        raise ValueError("f and g must have equal length")
    if not f:
        return True, None
    total = f[0].alg.zero()
    for fi, gi in zip(f, g):
        total = total + fi * gi
    return total.is_zero(), total


def cme_check_general(f):
    if not f:
        return True, None
    total = f[0].alg.zero()
    for fj in f:
        total = total + fj * fj
    return total.is_zero(), total


def cme_check_weighted(f, q, base=None):
    if len(f) != len(q):
        raise ValueError("f and q must have equal length")
    if not f:
        return True, None
    alg = f[0].alg
    quarter = alg.field.coerce(1) / 4
    total = alg.zero()
    for j, (fj, qj) in enumerate(zip(f, q)):
        uname = str(qj)
        if uname in alg.unit_names:
            ui = alg.unit_names.index(uname)
        else:
            ui = alg.declare_unit(uname)
        inv_q = AlgElement(alg, {((), ()): alg.field.one}, ((ui, 1),))
        total = total + (fj * fj * inv_q).scaled(quarter)
    return total.is_zero(), total


# -- builders -------------------------------------------------------------------


class DarbouxModel:
    """A built presentation together with its shifted symplectic form."""

    def __init__(self, presentation, omega, data, extra=None):
        self.presentation = presentation
        self.omega = omega
        self.data = data
        self.extra = extra or {}

    def validate(self):
        recs = check_d_squared(self.presentation)
        recs += check_shifted_symplectic(self.presentation, self.omega)
        return recs


def _transfer(data, target, e):
    """Move an element of the scratch base into the built presentation."""
    images = {x: target.gen(x) for x in data.x_names}
    mor = CdgaMorphism(data.base, target, images, label="base")
    return mor.apply(e)


def build_even_darboux(data: EvenDarbouxData) -> DarbouxModel:
    ok, residual = cme_check_even(data.f, data.g)
    if not ok:
        raise CmeViolation("even", residual)
    m1 = len(data.f)
    gens = [(x, 0) for x in data.x_names]
    gens += [(y, -1) for y in data.y_names]
    gens += [(z, -1) for z in data.z_names]
    gens += [(w, -2) for w in data.w_names]
    A = Presentation(data.field, gens, label="even-darboux")
    f = [_transfer(data, A, fi) for fi in data.f]
    g = [_transfer(data, A, gi) for gi in data.g]
    diff = {}
    for i in range(m1):
        diff[data.y_names[i]] = g[i]
        diff[data.z_names[i]] = f[i]
    for j, xj in enumerate(data.x_names):
        dw = A.zero()
        for i in range(m1):
            dw = dw + partial_derivative(f[i], xj) * A.gen(data.y_names[i])
            dw = dw + partial_derivative(g[i], xj) * A.gen(data.z_names[i])
        diff[data.w_names[j]] = dw
    A.define_differential(diff)
    fa = forms(A)
    lead = fa.zero()
    for i in range(m1):
        lead = lead + fa.alg.gen(f"ddr({data.y_names[i]})") * fa.alg.gen(f"ddr({data.z_names[i]})")
    for j, xj in enumerate(data.x_names):
        lead = lead + fa.alg.gen(f"ddr({xj})") * fa.alg.gen(f"ddr({data.w_names[j]})")
    omega = ShiftedClosedTwoForm(A, -2, lead)
    return DarbouxModel(A, omega, data, extra={"f": f, "g": g})


def _build_general_like(data, weighted: bool) -> DarbouxModel:
    if weighted:
        ok, residual = cme_check_weighted(data.f, data.q)
        if not ok:
            raise CmeViolation("weighted", residual)
    else:
        ok, residual = cme_check_general(data.f)
        if not ok:
            raise CmeViolation("general", residual)
    m0, m1 = len(data.x_names), len(data.f)
    y_names = [f"y{j+1}" for j in range(m1)]
    z_names = [f"z{k+1}" for k in range(m0)]
    gens = [(x, 0) for x in data.x_names]
    gens += [(y, -1) for y in y_names]
    gens += [(z, -2) for z in z_names]
    units = data.base.unit_names if weighted else ()
    A = Presentation(data.field, gens, units=units, label="general-darboux")
    h = [_transfer(data, A, hj) for hj in data.h]
    diff = {}
    for j in range(m1):
        diff[y_names[j]] = h[j]
    g_cols = {}
    for k in range(m0):
        dz = A.zero()
        for j in range(m1):
            gkj = _transfer(data, A, data.g(k, j))
            g_cols[(k, j)] = gkj
            dz = dz + gkj * A.gen(y_names[j])
        diff[z_names[k]] = dz
    A.define_differential(diff)
    fa = forms(A)
    lead = fa.zero()
    for k in range(m0):
        lead = lead + fa.alg.gen(f"ddr({data.x_names[k]})") * fa.alg.gen(f"ddr({z_names[k]})")
    nu = fa.zero()
    for j in range(m1):
        dy = fa.alg.gen(f"ddr({y_names[j]})")
        if weighted:
            qj = fa.lift(_transfer(data, A, data.q[j]))
            lead = lead + fa.ddr(qj * fa.alg.gen(y_names[j])) * dy
            nu = nu - fa.ddr(qj * fa.alg.gen(y_names[j])) * dy
        else:
            lead = lead + dy * dy
            nu = nu - dy * dy
    omega = ShiftedClosedTwoForm(A, -2, lead)
    return DarbouxModel(
        A, omega, data,
        extra={"h": h, "g": g_cols, "y_names": y_names, "z_names": z_names, "nu": nu},
    )


def build_general_darboux(data: GeneralDarbouxData) -> DarbouxModel:
    return _build_general_like(data, weighted=False)


def build_weighted_darboux(data: WeightedDarbouxData) -> DarbouxModel:
    return _build_general_like(data, weighted=True)


# -- degree-truncated subalgebra --------------------------------------------------


def darboux_subalgebra(A: Presentation, cutoff: int):
    """Subalgebra on generators of degree > cutoff, with the inclusion.

    Raises if the kept generators' differentials mention a dropped one.
    """
    kept = [g for g in A.gens if g.degree > cutoff]
    kept_names = {g.name for g in kept}
    B = Presentation(A.field, [(g.name, g.degree) for g in kept], units=A.unit_names,
                     label=f"{A.label}|deg>{cutoff}")
    diff = {}
    for g in kept:
        img = A.differential.get(g.index) if A.differential else None
        if img is None:
            continue
        for (even, odd) in img.terms:
            for i, _ in even:
                if A.gens[i].name not in kept_names:
                    raise ValueError(
                        f"not closed under d: d({g.name}) mentions dropped generator {A.gens[i].name}"
                    )
            for i in odd:
                if A.gens[i].name not in kept_names:
                    raise ValueError(
                        f"not closed under d: d({g.name}) mentions dropped generator {A.gens[i].name}"
                    )
        diff[g.name] = _rename_into(B, img)
    B.define_differential(diff)
    incl = CdgaMorphism(B, A, {g.name: A.gen(g.name) for g in kept}, label="incl")
    return B, incl


def _rename_into(target: Presentation, e: AlgElement) -> AlgElement:
    """Copy an element into a presentation sharing the same generator names."""
    src = e.alg
    out: dict = {}
    for (even, odd), c in e.terms.items():
        ne = tuple(sorted(((target.by_name[src.gens[i].name].index, ex) for i, ex in even),
                          key=lambda t: target.rank_of[t[0]]))
        no = tuple(sorted((target.by_name[src.gens[i].name].index for i in odd),
                          key=lambda i: target.rank_of[i]))
        out[(ne, no)] = c
    denom = tuple((target.unit_names.index(src.unit_names[u]), ex) for u, ex in e.denom)
    return AlgElement(target, out, denom)
