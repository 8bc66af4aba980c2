"""Bounded-window complexes of free modules with labelled bases.

A complex stores, per degree, a list of hashable labels; the differential
maps a label to {label: coefficient} with coefficients in a presentation.
Coefficients may be graded (used by the representation-scheme tangent
complexes); composing twice then follows the dg-module Leibniz rule.  The
classical-base complexes in this module have closed even coefficients, for
which everything reduces to matrix algebra.
"""

from __future__ import annotations

from itertools import combinations

from .algebra import CheckRecord, Presentation, partial_derivative
from .linalg import homology_dims, sparse_rank


class FreeModuleComplex:
    def __init__(self, alg: Presentation, window, bases, diff, label=""):
        self.alg = alg
        self.window = window
        self.bases = {d: list(ls) for d, ls in bases.items() if ls}
        self.deg = {}
        for d, ls in self.bases.items():
            for l in ls:
                self.deg[l] = d
        self.diff = diff
        self.label = label

    def d_of(self, lbl):
        return self.diff.get(lbl, {})

    def apply_d(self, vec):
        """Differential of sum(coeff * label) by the Leibniz rule."""
        out = {}
        has_d = self.alg.differential is not None
        for lbl, coeff in vec.items():
            if coeff.is_zero():
                continue
            if has_d:
                dc = self.alg.d(coeff)
                if not dc.is_zero():
                    _acc(out, lbl, dc)
            cdeg = coeff.degree()
            sign = -1 if (cdeg is not None and cdeg & 1) else 1
            for tgt, a in self.d_of(lbl).items():
                term = coeff * a
                if sign < 0:
                    term = -term
                _acc(out, tgt, term)
        return {l: c for l, c in out.items() if not c.is_zero()}

    def check_complex(self):
        records = []
        by_degree = {}
        for d in sorted(self.bases):
            worst = None
            for lbl in self.bases[d]:
                r = self.apply_d({lbl: self.alg.one()})
                r2 = self.apply_d(r)
                if r2:
                    worst = (lbl, r2)
                    break
            by_degree[d] = worst
            if worst is None:
                records.append(CheckRecord(f"{self.label}:d2@{d}", True))
            else:
                lbl, r2 = worst
                records.append(
                    CheckRecord(
                        f"{self.label}:d2@{d}", False,
                        residual=len(r2),
                        detail=f"first failure at {lbl}",
                    )
                )
        return records

    def dims(self):
        return {d: len(ls) for d, ls in self.bases.items()}

    def evaluate_at(self, point):
        """Numeric matrices {degree: rows} at a base-ring point (sparse)."""
        mats = {}
        for d, labels in self.bases.items():
            cols = {}
            nxt = self.bases.get(d + 1, [])
            col_of = {l: i for i, l in enumerate(nxt)}
            rows = []
            for lbl in labels:
                row = {}
                for tgt, a in self.d_of(lbl).items():
                    v = a.evaluate(point)
                    if v:
                        row[col_of[tgt]] = v
                rows.append(row)
            mats[d] = rows
        return mats


def _acc(out, lbl, val):
    cur = out.get(lbl)
    out[lbl] = val if cur is None else cur + val


class ChainMap:
    def __init__(self, source, target, entries, label="", target_sign=1):
        self.source = source
        self.target = target
        self.entries = entries
        self.label = label
        self.target_sign = target_sign  # compare f(d e) with sign * d(f e)

    def apply(self, vec):
        out = {}
        for lbl, coeff in vec.items():
            for tgt, a in self.entries.get(lbl, {}).items():
                _acc(out, tgt, coeff * a)
        return {l: c for l, c in out.items() if not c.is_zero()}

    def check(self):
        records = []
        for d in sorted(self.source.bases):
            ok = True
            detail = ""
            for lbl in self.source.bases[d]:
                lhs = self.apply(self.source.apply_d({lbl: self.source.alg.one()}))
                rhs = self.target.apply_d(self.apply({lbl: self.source.alg.one()}))
                if self.target_sign < 0:
                    rhs = {l: -c for l, c in rhs.items()}
                if not _vec_eq(lhs, rhs):
                    ok = False
                    detail = f"first failure at {lbl}"
                    break
            records.append(CheckRecord(f"chainmap[{self.label}]@{d}", ok, detail=detail))
        return records

    def compose(self, inner: "ChainMap") -> "ChainMap":
        entries = {}
        for lbl, row in inner.entries.items():
            out = {}
            for mid, a in row.items():
                for tgt, b in self.entries.get(mid, {}).items():
                    _acc(out, tgt, a * b)
            entries[lbl] = {t: c for t, c in out.items() if not c.is_zero()}
        return ChainMap(inner.source, self.target, entries,
                        label=f"{self.label}o{inner.label}",
                        target_sign=self.target_sign * inner.target_sign)


def _vec_eq(a, b):
    if len(a) != len(b):
        return False
    for l, c in a.items():
        if l not in b or b[l] != c:
            return False
    return True


# -- the explicit tangent-cone complexes ----------------------------------------


class TangentConeData:
    """Coefficient algebra and entry data shared by the cone complexes.

    Built from general-Darboux-style data: base variables x_k, functions
    h_j = f_j/2 and the column entries g_k^j = df_j/dx_k, all living on a
    quasi-smooth algebra with dy_j = h_j.
    """

    def __init__(self, data):
        self.data = data
        m0, m1 = len(data.x_names), len(data.f)
        self.m0, self.m1 = m0, m1
        gens = [(x, 0) for x in data.x_names] + [(f"y{j+1}", -1) for j in range(m1)]
        units = data.base.unit_names
        A1 = Presentation(data.field, gens, units=units, label="A(1)")
        from .darboux import _rename_into

        self.h = [_rename_into(A1, hj) for hj in data.h]
        A1.define_differential({f"y{j+1}": self.h[j] for j in range(m1)})
        self.alg = A1
        self.g = {}
        for k in range(m0):
            for j in range(m1):
                self.g[(k, j)] = _rename_into(A1, data.g(k, j))

    def dh(self, k, i):
        """d h_k / d x_i."""
        return partial_derivative(self.h[k], self.data.x_names[i])

    def dg(self, l, j, i):
        """d g_l^j / d x_i."""
        return partial_derivative(self.g[(l, j)], self.data.x_names[i])


def _subsets(m1, size):
    if size < 0 or size > m1:
        return []
    return list(combinations(range(m1), size))


def _insert(I, j):
    """Insert y_j into the multi-index I; (new index, Koszul sign) or None."""
    if j in I:
        return None
    later = sum(1 for a in I if a > j)
    J = tuple(sorted(I + (j,)))
    return J, (-1 if later & 1 else 1)


def _d_of_yI(cone, I, make_label):
    """The h-terms d(y_I) e = sum (-1)^p h_{I_p} y_{I minus p} e."""
    out = {}
    for p, j in enumerate(I):
        rest = I[:p] + I[p + 1 :]
        coeff = cone.h[j] if p % 2 == 0 else -cone.h[j]
        if not coeff.is_zero():
            _acc(out, make_label(rest), coeff)
    return out


def build_cone_complex(cone: TangentConeData, window, variant="full", label=None):
    """The explicit cone of the section's derivative map, by y-multiplicity.

    Degree m basis: y_I d/dx_i (|I| = -m), y_I d/dy_k (|I| = 1-m),
    y_I s*d/da_l (|I| = 2-m), y_I s*d/dx_i (|I| = 1-m).  variant "full" has
    the curved columns (dh/dx, -dg/dx, -id); variant "primed" replaces them
    with zeros and +id.
    """
    lo, hi = window
    if hi != 2:
        raise ValueError("window must end at degree 2")
    m0, m1 = cone.m0, cone.m1
    bases = {}
    for m in range(lo, hi + 1):
        ls = []
        for I in _subsets(m1, -m):
            ls += [("x", I, i) for i in range(m0)]
        for I in _subsets(m1, 1 - m):
            ls += [("y", I, k) for k in range(m1)]
        for I in _subsets(m1, 2 - m):
            ls += [("qa", I, l) for l in range(m0)]
        for I in _subsets(m1, 1 - m):
            ls += [("qx", I, i) for i in range(m0)]
        bases[m] = ls
    in_window = set()
    for ls in bases.values():
        in_window.update(ls)
    alg = cone.alg
    one = alg.one()
    full = variant == "full"
    diff = {}
    for m, ls in bases.items():
        for lbl in ls:
            kind, I, i = lbl
            row = dict(_d_of_yI(cone, I, lambda rest, k=kind, ii=i: (k, rest, ii)))
            par = -1 if len(I) & 1 else 1
            if kind == "x":
                if full:
                    for k in range(m1):
                        c = cone.dh(k, i).scaled(par)
                        if not c.is_zero():
                            _acc(row, ("y", I, k), c)
                    for j in range(m1):
                        ins = _insert(I, j)
                        if ins is None:
                            continue
                        J, sgn = ins
                        for l in range(m0):
                            c = cone.dg(l, j, i).scaled(-par * sgn)
                            if not c.is_zero():
                                _acc(row, ("qa", J, l), c)
                    _acc(row, ("qx", I, i), -one if par > 0 else one)
                else:
                    _acc(row, ("qx", I, i), one if par > 0 else -one)
            elif kind == "y":
                k = i
                for l in range(m0):
                    c = cone.g[(l, k)].scaled(-par)
                    if not c.is_zero():
                        _acc(row, ("qa", I, l), c)
            # "qa" and "qx" have no intrinsic part
            row = {t: c for t, c in row.items() if t in in_window and not c.is_zero()}
            if row:
                diff[lbl] = row
    name = label or ("Tq" if full else "Tq'")
    return FreeModuleComplex(alg, window, bases, diff, label=name)


def build_Tq(cone: TangentConeData, window):
    return build_cone_complex(cone, window, variant="full")


def build_Tq_prime(cone: TangentConeData, window):
    return build_cone_complex(cone, window, variant="primed")


def build_phi(cone: TangentConeData, src: FreeModuleComplex, dst: FreeModuleComplex):
    """The involution exchanging the two cone complexes: identity off the
    s*d/dx column, and there dh/dx, -dg/dx, -id."""
    alg = cone.alg
    one = alg.one()
    entries = {}
    for d, ls in src.bases.items():
        for lbl in ls:
            kind, I, i = lbl
            if kind != "qx":
                entries[lbl] = {lbl: one}
                continue
            row = {}
            for k in range(cone.m1):
                c = cone.dh(k, i)
                if not c.is_zero():
                    _acc(row, ("y", I, k), c)
            for j in range(cone.m1):
                ins = _insert(I, j)
                if ins is None:
                    continue
                J, sgn = ins
                for l in range(cone.m0):
                    c = cone.dg(l, j, i).scaled(-sgn)
                    if not c.is_zero():
                        _acc(row, ("qa", J, l), c)
            _acc(row, ("qx", I, i), -one)
            entries[lbl] = {t: c for t, c in row.items() if t in src.deg and not c.is_zero()}
    return ChainMap(src, dst, entries, label="phi")


def build_psi_target(cone: TangentConeData, window):
    """Free module on ddr(x)[-2] (degree 2) and ddr(y)[-2] (degree 1)."""
    lo, hi = window
    m0, m1 = cone.m0, cone.m1
    bases = {}
    for m in range(lo, hi + 1):
        ls = []
        for I in _subsets(m1, 2 - m):
            ls += [("Lx", I, i) for i in range(m0)]
        for I in _subsets(m1, 1 - m):
            ls += [("Ly", I, j) for j in range(m1)]
        bases[m] = ls
    in_window = set()
    for ls in bases.values():
        in_window.update(ls)
    diff = {}
    for m, ls in bases.items():
        for lbl in ls:
            kind, I, i = lbl
            row = dict(_d_of_yI(cone, I, lambda rest, k=kind, ii=i: (k, rest, ii)))
            if kind == "Ly":
                par = -1 if len(I) & 1 else 1
                for l in range(m0):
                    c = cone.dh(i, l).scaled(par)
                    if not c.is_zero():
                        _acc(row, ("Lx", I, l), c)
            row = {t: c for t, c in row.items() if t in in_window and not c.is_zero()}
            if row:
                diff[lbl] = row
    return FreeModuleComplex(cone.alg, window, bases, diff, label="L[-2]")


def build_psi(cone: TangentConeData, src: FreeModuleComplex, dst: FreeModuleComplex):
    """d/dy_j -> 2 ddr(y_j)[-2], s*d/da_i -> -ddr(x_i)[-2], zero elsewhere."""
    alg = cone.alg
    two = alg.scalar(2)
    minus_one = alg.scalar(-1)
    entries = {}
    for d, ls in src.bases.items():
        for lbl in ls:
            kind, I, i = lbl
            if kind == "y":
                entries[lbl] = {("Ly", I, i): two}
            elif kind == "qa":
                entries[lbl] = {("Lx", I, i): minus_one}
    return ChainMap(src, dst, entries, label="psi")


def build_theta_delta(field, m0):
    """The one-block comparison p*d/da_l[-1] -> -ddr(x_l)[-2] in degree 2."""
    base = Presentation(field, [(f"x{i+1}", 0) for i in range(m0)], label="A(0)")
    base.define_differential({})
    src = FreeModuleComplex(base, (2, 2), {2: [("pa", l) for l in range(m0)]}, {}, label="Tp")
    dst = FreeModuleComplex(base, (2, 2), {2: [("Lx0", l) for l in range(m0)]}, {}, label="L0[-2]")
    entries = {("pa", l): {("Lx0", l): base.scalar(-1)} for l in range(m0)}
    cm = ChainMap(src, dst, entries, label="theta_delta")
    records = cm.check()
    # exact basis bijection
    cols = set()
    bij = True
    for row in entries.values():
        if len(row) != 1:
            bij = False
        for t, c in row.items():
            if t in cols or (c != base.scalar(-1) and c != base.scalar(1)):
                bij = False
            cols.add(t)
    bij = bij and len(cols) == m0
    records.append(CheckRecord("theta_delta:basis-bijection", bij))
    return cm, records


# -- unit cancellation with a contraction certificate ------------------------------


class ContractionCertificate:
    """Strong deformation retract data onto the reduced complex.

    iota: reduced -> original and pi: original -> reduced are chain maps,
    pi o iota = id, and id - iota o pi = d h + h d with h of degree -1.
    """

    def __init__(self, original, reduced, iota, pi, h):
        self.original = original
        self.reduced = reduced
        self.iota = iota
        self.pi = pi
        self.h = h

    def verify(self):
        K, R = self.original, self.reduced
        one = K.alg.one()
        records = []
        ok = True
        for d, ls in R.bases.items():
            for lbl in ls:
                v = _map_apply(self.pi, _map_apply(self.iota, {lbl: one}))
                if not _vec_eq(v, {lbl: one}):
                    ok = False
        records.append(CheckRecord("sdr:pi-iota=id", ok))
        ok = True
        for d, ls in R.bases.items():
            for lbl in ls:
                lhs = _map_apply(self.iota, R.apply_d({lbl: one}))
                rhs = K.apply_d(_map_apply(self.iota, {lbl: one}))
                if not _vec_eq(lhs, rhs):
                    ok = False
        records.append(CheckRecord("sdr:iota-chain", ok))
        ok = True
        for d, ls in K.bases.items():
            for lbl in ls:
                lhs = _map_apply(self.pi, K.apply_d({lbl: one}))
                rhs = R.apply_d(_map_apply(self.pi, {lbl: one}))
                if not _vec_eq(lhs, rhs):
                    ok = False
        records.append(CheckRecord("sdr:pi-chain", ok))
        ok = True
        for d, ls in K.bases.items():
            for lbl in ls:
                e = {lbl: one}
                lhs = _vec_sub(e, _map_apply(self.iota, _map_apply(self.pi, e)))
                rhs = _vec_add(
                    K.apply_d(_map_apply(self.h, e)),
                    _map_apply(self.h, K.apply_d(e)),
                )
                if not _vec_eq(lhs, rhs):
                    ok = False
        records.append(CheckRecord("sdr:homotopy-identity", ok))
        return records


def _map_apply(entries, vec):
    out = {}
    for lbl, coeff in vec.items():
        for tgt, a in entries.get(lbl, {}).items():
            _acc(out, tgt, coeff * a)
    return {l: c for l, c in out.items() if not c.is_zero()}


def _vec_sub(a, b):
    out = dict(a)
    for l, c in b.items():
        _acc(out, l, -c)
    return {l: c for l, c in out.items() if not c.is_zero()}


def _vec_add(a, b):
    out = dict(a)
    for l, c in b.items():
        _acc(out, l, c)
    return {l: c for l, c in out.items() if not c.is_zero()}


def _constant_of(e):
    """The scalar of a constant AlgElement, else None."""
    if e.denom or len(e.terms) != 1:
        return None
    ((even, odd), c), = e.terms.items()
    if even or odd:
        return None
    return c


def cancel_units(K: FreeModuleComplex):
    """Gaussian cancellation of constant unit entries, with SDR certificate."""
    alg = K.alg
    one = alg.one()
    diff = {l: dict(row) for l, row in K.diff.items()}
    bases = {d: list(ls) for d, ls in K.bases.items()}
    alive = {l for ls in bases.values() for l in ls}
    iota = {l: {l: one} for l in alive}
    pi = {l: {l: one} for l in alive}
    h: dict = {}

    def find_unit():
        for s in sorted(diff, key=repr):
            if s not in alive:
                continue
            for t, a in sorted(diff[s].items(), key=lambda kv: repr(kv[0])):
                if t not in alive:
                    continue
                c = _constant_of(a)
                if c:
                    return s, t, c
        return None

    while True:
        hit = find_unit()
        if hit is None:
            break
        s, t, u = hit
        uinv = one.scaled(1) * alg.scalar(1)
        uinv = alg.scalar(alg.field.one / u)
        ds = {k: v for k, v in diff.get(s, {}).items() if k != t and k in alive}
        # sources hitting t (other than s)
        into_t = [(sp, row[t]) for sp, row in diff.items() if sp != s and sp in alive and t in row]
        # step maps on the current complex
        step_iota = {}
        for sp in alive:
            if sp is s or sp is t:
                continue
            row = {sp: one}
            if K.deg[sp] == K.deg[s]:
                b = diff.get(sp, {}).get(t)
                if b is not None:
                    row[s] = -(b * uinv)
            step_iota[sp] = row
        step_pi = {sp: {sp: one} for sp in alive if sp is not s and sp is not t}
        step_pi[s] = {}
        step_pi[t] = {k: -(v * uinv) for k, v in ds.items()}
        step_h = {t: {s: uinv}}
        # update the differential: D - C u^-1 B
        for sp, c_coeff in into_t:
            row = diff[sp]
            del row[t]
            for k, v in ds.items():
                _acc(row, k, -(c_coeff * uinv * v))
            diff[sp] = {kk: vv for kk, vv in row.items() if not vv.is_zero()}
        diff.pop(s, None)
        for sp in list(diff):
            if t in diff[sp]:
                del diff[sp][t]
        # accumulate SDR data
        new_h_part = _compose_entries(iota, _compose_entries(step_h, pi))
        for l, row in new_h_part.items():
            cur = h.setdefault(l, {})
            for tgt, v in row.items():
                _acc(cur, tgt, v)
            h[l] = {kk: vv for kk, vv in cur.items() if not vv.is_zero()}
        iota = _compose_entries(iota, step_iota)
        pi = _compose_entries(step_pi, pi)
        alive.discard(s)
        alive.discard(t)

    rbases = {d: [l for l in ls if l in alive] for d, ls in bases.items()}
    rdiff = {l: {k: v for k, v in row.items() if k in alive}
             for l, row in diff.items() if l in alive}
    rdiff = {l: row for l, row in rdiff.items() if row}
    reduced = FreeModuleComplex(alg, K.window, rbases, rdiff, label=f"{K.label}|reduced")
    iota = {l: row for l, row in iota.items() if l in alive}
    cert = ContractionCertificate(K, reduced, iota, pi, h)
    return reduced, cert


def _compose_entries(outer, inner):
    out = {}
    for lbl, row in inner.items():
        acc = {}
        for mid, a in row.items():
            for tgt, b in outer.get(mid, {}).items():
                _acc(acc, tgt, a * b)
        acc = {t: c for t, c in acc.items() if not c.is_zero()}
        if acc:
            out[lbl] = acc
    return out


def compare_reduction_to_target(reduced: FreeModuleComplex, target: FreeModuleComplex, psi_entries):
    """Check that the surviving-block scaling carries the reduced complex
    onto the target with equal matrices."""
    records = []
    dims_ok = reduced.dims() == {d: n for d, n in target.dims().items() if n}
    records.append(CheckRecord("reduction:ranks", dims_ok,
                               detail=f"{reduced.dims()} vs {target.dims()}"))
    ok = True
    for d, ls in reduced.bases.items():
        for lbl in ls:
            img = psi_entries.get(lbl)
            if img is None or len(img) != 1:
                ok = False
                break
            lhs = _map_apply(psi_entries, reduced.apply_d({lbl: reduced.alg.one()}))
            rhs = target.apply_d(_map_apply(psi_entries, {lbl: reduced.alg.one()}))
            if not _vec_eq(lhs, rhs):
                ok = False
                break
    records.append(CheckRecord("reduction:matches-target", ok))
    return records


# -- pointwise homology probe ---------------------------------------------------------


def point_homology_probe(K: FreeModuleComplex, points, interior=None):
    """Exact homology dimensions after evaluating at base-ring points.

    Degrees reported: interior of the window (both adjacent differentials
    present), unless an explicit degree list is given.
    """
    lo, hi = K.window
    degrees = interior if interior is not None else range(lo + 1, hi + 1)
    out = []
    for pt in points:
        mats = {}
        dims = {}
        ev = K.evaluate_at(pt)
        for d in K.bases:
            dims[d] = len(K.bases[d])
            mats[d] = ev[d]
        hd = homology_dims(mats, dims, K.alg.field)
        out.append({d: hd.get(d, 0) for d in degrees if d in dims})
    return out
