"""Free associative graded algebra, the exterior-coalgebra shuffle coproduct,
and the cobar-type resolution of the polynomial ring.

Generators are indexed by nonempty subsets of {1..n}: singletons x_i in
degree 0, pairs c_ij in degree -1, triples in degree -2 (named by oriented
index order), and the full set in degree -3.  The differential extends the
reduced shuffle coproduct; in weight w its degree-0 homology matches the
polynomial ring and its degree(-1) homology vanishes.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .algebra import CheckRecord
from .linalg import sparse_rank


class NCGen:
    __slots__ = ("name", "degree", "weight", "index", "subset", "orientation")

    def __init__(self, name, degree, weight, subset=None, orientation=1):
        self.name = name
        self.degree = degree
        self.weight = weight
        self.subset = subset
        self.orientation = orientation
        self.index = -1


class FreeAlgebra:
    """Free associative algebra on graded generators; words are index tuples."""

    def __init__(self, gens, label=""):
        self.gens = list(gens)
        self.by_name = {}
        for i, g in enumerate(self.gens):
            g.index = i
            self.by_name[g.name] = g
        self.label = label
        self.diff: dict[int, "NCElement"] | None = None

    def zero(self):
        return NCElement(self, {})

    def one(self):
        return NCElement(self, {(): Fraction(1)})

    def gen(self, name):
        g = self.by_name[name]
        return NCElement(self, {(g.index,): Fraction(1)})

    def word_degree(self, w):
        return sum(self.gens[i].degree for i in w)

    def word_weight(self, w):
        return sum(self.gens[i].weight for i in w)

    def define_differential(self, images: dict):
        self.diff = {self.by_name[n].index: v for n, v in images.items()}

    def d(self, e: "NCElement") -> "NCElement":
        out = self.zero()
        for w, c in e.terms.items():
            pref_deg = 0
            for pos, gi in enumerate(w):
                img = self.diff.get(gi)
                if img is not None and img.terms:
                    sign = -1 if pref_deg & 1 else 1
                    for iw, ic in img.terms.items():
                        nw = w[:pos] + iw + w[pos + 1 :]
                        coeff = c * ic * sign
                        out._add_term(nw, coeff)
                pref_deg += self.gens[gi].degree
        return out


class NCElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms):
        self.alg = alg
        self.terms = terms

    def _add_term(self, w, c):
        nc = self.terms.get(w)
        nc = c if nc is None else nc + c
        if nc:
            self.terms[w] = nc
        elif w in self.terms:
            del self.terms[w]

    def __add__(self, other):
        out = dict(self.terms)
        e = NCElement(self.alg, out)
        for w, c in other.terms.items():
            e._add_term(w, c)
        return e

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return NCElement(self.alg, {w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.alg.zero()
            return NCElement(self.alg, {w: c * other for w, c in self.terms.items()})
        out = NCElement(self.alg, {})
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out._add_term(w1 + w2, c1 * c2)
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, NCElement) and self.alg is other.alg and self.terms == other.terms

    __hash__ = None

    def is_zero(self):
        return not self.terms

    def commutator(self, other):
        return self * other - other * self

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            body = "*".join(self.alg.gens[i].name for i in w) or "1"
            parts.append(f"({c})*{body}")
        return " + ".join(parts)


# -- shuffle coproduct ------------------------------------------------------------


def shuffle_sign(s1, s2):
    """Koszul sign of the shuffle sorting (s1, s2) into ascending order."""
    inv = sum(1 for a in s1 for b in s2 if a > b)
    return -1 if inv & 1 else 1


def exterior_coalgebra(n):
    """Reduced shuffle coproduct table: subset -> [(s1, s2, sign)]."""
    table = {}
    universe = list(range(1, n + 1))
    for size in range(1, n + 1):
        for S in combinations(universe, size):
            entries = []
            for k in range(1, size):
                for s1 in combinations(S, k):
                    s2 = tuple(a for a in S if a not in s1)
                    entries.append((s1, s2, shuffle_sign(s1, s2)))
            table[S] = entries
    return table


_TRIPLE_NAMES_4 = {
    (2, 3, 4): ("s234", 1),
    (1, 3, 4): ("s143", -1),  # oriented as 1,4,3
    (1, 2, 4): ("s124", 1),
    (1, 2, 3): ("s132", -1),  # oriented as 1,3,2
}


def _gen_table(n):
    """(name, degree, weight, orientation) for each subset of {1..n}."""
    out = {}
    for size in range(1, n + 1):
        for S in combinations(range(1, n + 1), size):
            if size == 1:
                out[S] = (f"x{S[0]}", 0, 1, 1)
            elif size == 2:
                out[S] = (f"c{S[0]}{S[1]}", -1, 2, 1)
            elif size == 3:
                if n == 4:
                    name, orientation = _TRIPLE_NAMES_4[S]
                else:
                    name, orientation = "s" + "".join(map(str, S)), 1
                out[S] = (name, -2, 3, orientation)
            else:
                out[S] = ("t", -3, 4, 1)
    return out


class CobarDga:
    def __init__(self, n):
        if not 1 <= n <= 4:
            raise ValueError("n must be between 1 and 4")
        self.n = n
        table = _gen_table(n)
        gens = []
        self.subset_of = {}
        for S in sorted(table, key=lambda s: (len(s), s)):
            name, deg, wt, orient = table[S]
            gens.append(NCGen(name, deg, wt, subset=S, orientation=orient))
        self.alg = FreeAlgebra(gens, label=f"cobar({n})")
        for g in self.alg.gens:
            self.subset_of[g.subset] = g
        coprod = exterior_coalgebra(n)
        images = {}
        for g in self.alg.gens:
            S = g.subset
            if len(S) == 1:
                continue
            val = self.alg.zero()
            for s1, s2, eps in coprod[S]:
                g1, g2 = self.subset_of[s1], self.subset_of[s2]
                sign = eps * g1.orientation * g2.orientation
                if len(s1) % 2 == 0:
                    sign = -sign
                val._add_term((g1.index, g2.index), Fraction(sign) * g.orientation)
            images[g.name] = val
        self.alg.define_differential(images)

    def d(self, name):
        return self.alg.d(self.alg.gen(name))

    def differential_of(self, name):
        g = self.alg.by_name[name]
        img = self.alg.diff.get(g.index)
        return img if img is not None else self.alg.zero()

    def check_d_squared(self):
        records = []
        for g in self.alg.gens:
            r = self.alg.d(self.alg.d(self.alg.gen(g.name)))
            records.append(CheckRecord(f"cobar-d2[{g.name}]", r.is_zero(), len(r.terms)))
        return records


def cobar(n) -> CobarDga:
    return CobarDga(n)


# -- weight-graded homology ----------------------------------------------------------


def _words_by(alg, degree, weight):
    memo = {}

    def rec(deg, wt):
        if (deg, wt) in memo:
            return memo[(deg, wt)]
        if wt == 0:
            res = [()] if deg == 0 else []
        elif wt < 0:
            res = []
        else:
            res = []
            for g in alg.gens:
                if g.weight > wt:
                    continue
                for tail in rec(deg - g.degree, wt - g.weight):
                    res.append((g.index,) + tail)
        memo[(deg, wt)] = res
        return res

    return rec(degree, weight)


def h0_hilbert_check(G: CobarDga, weight_bound: int):
    """Per weight w <= bound: dim H^0 = binomial(n-1+w, w) and H^-1 = 0."""
    from math import comb

    alg = G.alg
    records = []
    for w in range(0, weight_bound + 1):
        b0 = _words_by(alg, 0, w)
        b1 = _words_by(alg, -1, w)
        b2 = _words_by(alg, -2, w)
        col0 = {word: j for j, word in enumerate(b0)}
        col1 = {word: j for j, word in enumerate(b1)}
        rows1 = []
        for word in b1:
            img = alg.d(NCElement(alg, {word: Fraction(1)}))
            rows1.append({col0[u]: c for u, c in img.terms.items()})
        rows2 = []
        for word in b2:
            img = alg.d(NCElement(alg, {word: Fraction(1)}))
            rows2.append({col1[u]: c for u, c in img.terms.items()})
        from .fields import QQ

        r1 = sparse_rank(rows1, QQ)
        r2 = sparse_rank(rows2, QQ)
        h0 = len(b0) - r1
        h1 = len(b1) - r1 - r2
        expected = comb(G.n - 1 + w, w)
        records.append(
            CheckRecord(
                f"hilbert:H0@w={w}", h0 == expected,
                detail=f"dim {h0}, expected {expected}",
            )
        )
        records.append(CheckRecord(f"hilbert:H-1@w={w}", h1 == 0, detail=f"dim {h1}"))
    return records
