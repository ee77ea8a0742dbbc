"""Permutation criteria for x^r f(x^s), with a brute-force oracle.

Every criterion returns a boolean plus, where useful, a witness of the
first violation (lexicographic (i, j), or smallest c / k).  The
:func:`full_equivalence` driver runs them all and cross-checks the
conditions that are mathematically equivalent against each other and
against exhaustive evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Any

import numpy as np

from .cyclopoly import (
    Decomposition,
    FactoredForm,
    MappingCoeffs,
    Poly,
    coset_of,
    cyclotomic_map_all,
    decompose,
    evaluate_all,
    format_poly,
    lth_powers,
    mapping_coeffs,
)
from .errors import (
    HypothesisFails,
    PreconditionUnmet,
    ZeroCoefficient,
    ZeroDenominator,
)
from .ffield import (
    DlogTable,
    FieldElement,
    FieldSpec,
    check_budget,
    default_table,
    format_field,
    make_field,
    max_q,
)

# condition names
PERMUTATION = "permutation"
GCD_R_S = "gcd_r_s"
NONZERO = "nonzero_branches"
NNC = "index_product"
MAPPING = "mapping_permutation"
COSET_DISTINCT = "coset_distinct"
INDEX_PAIRWISE = "index_pairwise"
SUFF_INDEX = "suff_index"
DISTINCT_REPS = "distinct_reps"
ROOTS_OF_UNITY = "roots_of_unity"
POWER_SUMS = "power_sums"

NECESSARY = (GCD_R_S, NONZERO, NNC)
EQUIVALENT = (MAPPING, COSET_DISTINCT, INDEX_PAIRWISE, DISTINCT_REPS,
              ROOTS_OF_UNITY, POWER_SUMS)

REFS = {
    PERMUTATION: "main (i)",
    GCD_R_S: "Newnecess (i)",
    NONZERO: "Newnecess (ii)",
    NNC: "NNC",
    MAPPING: "main (ii)",
    COSET_DISTINCT: "main (iii)",
    INDEX_PAIRWISE: "main (iv)",
    SUFF_INDEX: "Suff",
    DISTINCT_REPS: "main (vi)",
    ROOTS_OF_UNITY: "main (vii)",
    POWER_SUMS: "main (viii)",
}


@dataclass
class Condition:
    name: str
    ref: str
    holds: bool
    witness: Any = None

    def to_json(self) -> dict:
        return {"name": self.name, "ref": self.ref, "holds": bool(self.holds),
                "witness": _jsonable(self.witness)}


def _jsonable(x):
    if isinstance(x, FieldElement):
        return str(x)
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class VerdictReport:
    """Outcome of every evaluated criterion for one polynomial and one l.

    ``consistent`` is False only when conditions proved equivalent (or a
    proved necessary condition) contradict each other or the oracle; the
    names involved are kept in ``disagreements``.  ``disputed`` lists
    printed-theorem certificates whose verdict contradicts the oracle in a
    regime where the printed statement is known not to hold (these do not
    affect ``consistent``).
    """

    polynomial: str
    field: str
    l: int
    r: int
    conditions: list[Condition] = field(default_factory=list)
    oracle: bool | None = None
    consistent: bool = True
    disagreements: list[str] = field(default_factory=list)
    disputed: list[str] = field(default_factory=list)

    def get(self, name: str) -> Condition | None:
        for c in self.conditions:
            if c.name == name:
                return c
        return None

    def holds(self, name: str) -> bool | None:
        c = self.get(name)
        return None if c is None else c.holds

    @property
    def is_pp(self) -> bool:
        if self.oracle is not None:
            return self.oracle
        mapping = self.holds(MAPPING)
        if mapping is not None:
            return mapping
        if not all(self.holds(n) is not False for n in NECESSARY):
            return False
        return bool(self.holds(INDEX_PAIRWISE))

    def to_json(self) -> dict:
        return {
            "polynomial": self.polynomial,
            "field": self.field,
            "l": self.l,
            "r": self.r,
            "conditions": [c.to_json() for c in self.conditions],
            "oracle": self.oracle,
            "consistent": self.consistent,
            "disputed": list(self.disputed),
        }


# -- oracle ------------------------------------------------------------------

def _bijective(values: np.ndarray, q: int) -> tuple[bool, tuple[int, int] | None]:
    counts = np.bincount(values, minlength=q)
    repeated = np.flatnonzero(counts > 1)
    if repeated.size == 0:
        return True, None
    x, y = np.flatnonzero(values == repeated[0])[:2]
    return False, (int(x), int(y))


def oracle_is_permutation(P: Poly, limit: int | None = None) -> tuple[bool, tuple[FieldElement, FieldElement] | None]:
    """Evaluate P on all of F_q and test the image for distinctness.

    On failure the witness is the two smallest preimages of the smallest
    value that is hit twice.
    """
    F = P.field
    check_budget(F.q, limit)
    ok, pair = _bijective(evaluate_all(P), F.q)
    if ok:
        return True, None
    return False, (FieldElement(F, pair[0]), FieldElement(F, pair[1]))


# -- helpers -----------------------------------------------------------------

def _require_nonzero(mc: MappingCoeffs) -> np.ndarray:
    if not mc.all_nonzero():
        i = mc.values.index(0)
        raise ZeroCoefficient(f"A_{i} = 0")
    return np.asarray(mc.values, dtype=np.int64)


def _product(F: FieldSpec, values) -> int:
    acc = 1
    for v in values:
        acc = F.mul(acc, int(v))
    return acc


def _first_pair(labels) -> tuple[int, int] | None:
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    pairs = [(g[0], g[1]) for g in groups.values() if len(g) > 1]
    return min(pairs) if pairs else None


def _report(ff: FactoredForm) -> VerdictReport:
    return VerdictReport(format_poly(ff.expanded), format_field(ff.field), ff.decomp.l, ff.r)


# -- necessary conditions ----------------------------------------------------

def twice_index_of_product(mc: MappingCoeffs, table: DlogTable) -> int:
    """2 * Ind(A_0 A_1 ... A_{l-1}) reduced mod q - 1."""
    prod = _product(mc.field, _require_nonzero(mc))
    return 2 * table.index(prod) % table.order


def nec_conditions(ff: FactoredForm, mc: MappingCoeffs, table: DlogTable) -> VerdictReport:
    """The three necessary conditions; any failure proves P is not a PP."""
    rep = _report(ff)
    s, l = ff.decomp.s, ff.decomp.l
    g = gcd(ff.r, s)
    rep.conditions.append(Condition(GCD_R_S, REFS[GCD_R_S], g == 1, None if g == 1 else g))
    zeros = [i for i, a in enumerate(mc.values) if a == 0]
    rep.conditions.append(Condition(NONZERO, REFS[NONZERO], not zeros, zeros[0] if zeros else None))
    if zeros:
        rep.conditions.append(Condition(NNC, REFS[NNC], False, {"skipped": "ZeroCoefficient"}))
    else:
        twice = twice_index_of_product(mc, table)
        rep.conditions.append(Condition(NNC, REFS[NNC], twice % l == 0, twice))
    return rep


# -- the equivalent conditions -----------------------------------------------

def cond_index_pairwise(mc: MappingCoeffs, r: int, table: DlogTable,
                        decomp: Decomposition) -> tuple[bool, tuple[int, int] | None]:
    """Ind(A_i / A_j) is not r (j - i) mod l for every pair i < j."""
    A = _require_nonzero(mc)
    F, l = mc.field, decomp.l
    inverses = F.vpow(A, F.q - 2)
    for i in range(l - 1):
        j = np.arange(i + 1, l, dtype=np.int64)
        lhs = table.index_of[F.vmul(A[i], inverses[j])] % l
        bad = np.flatnonzero(lhs == r * (j - i) % l)
        if bad.size:
            return False, (i, int(j[bad[0]]))
    return True, None


def cond_suff_index(mc: MappingCoeffs, r: int, table: DlogTable,
                    decomp: Decomposition) -> tuple[bool, tuple[int, int] | None]:
    """For every pair i < j, 2 Ind(prod_{k != i} A_k * A_j) is not
    2 r (i - j) mod l.  Requires l | 2 Ind(prod A_k)."""
    A = _require_nonzero(mc)
    F, l = mc.field, decomp.l
    if twice_index_of_product(mc, table) % l:
        raise PreconditionUnmet("l does not divide 2 Ind(A_0 ... A_{l-1})")
    prefix = [1]
    for a in A:
        prefix.append(F.mul(prefix[-1], int(a)))
    suffix = [1]
    for a in reversed(A):
        suffix.append(F.mul(suffix[-1], int(a)))
    suffix.reverse()
    for i in range(l - 1):
        without_i = F.mul(prefix[i], suffix[i + 1])
        j = np.arange(i + 1, l, dtype=np.int64)
        lhs = 2 * table.index_of[F.vmul(without_i, A[j])] % l
        bad = np.flatnonzero(lhs == 2 * r * (i - j) % l)
        if bad.size:
            return False, (i, int(j[bad[0]]))
    return True, None


def _shifted_branches(mc: MappingCoeffs, r: int, table: DlogTable) -> np.ndarray:
    """The elements A_i gamma^(i r)."""
    A = _require_nonzero(mc)
    F = mc.field
    g_r = F.pow(table.gamma.value, r)
    shifts = np.empty(len(A), dtype=np.int64)
    cur = 1
    for i in range(len(A)):
        shifts[i] = cur
        cur = F.mul(cur, g_r)
    return F.vmul(A, shifts)


def cond_coset_distinct(mc: MappingCoeffs, r: int, table: DlogTable,
                        decomp: Decomposition) -> tuple[bool, tuple[int, int] | None]:
    """The cosets A_i C_{ir} are pairwise distinct."""
    labels = [coset_of(table, decomp, int(e)) for e in _shifted_branches(mc, r, table)]
    pair = _first_pair(labels)
    return pair is None, pair


def cond_distinct_reps(mc: MappingCoeffs, r: int, table: DlogTable,
                       decomp: Decomposition) -> bool:
    """{A_i gamma^(ir)} meets every coset of F_q^* / C_0 exactly once.

    Each element is mapped to the smallest code of its coset e * C_0, where
    C_0 is computed as the set of l-th powers; no index lookups involved.
    """
    F = mc.field
    elems = _shifted_branches(mc, r, table)
    C0 = lth_powers(F, decomp.l)
    reps = F.vmul(elems[:, None], C0[None, :]).min(axis=1)
    return len(set(reps.tolist())) == decomp.l


def _root_terms(mc: MappingCoeffs, r: int, decomp: Decomposition) -> tuple[np.ndarray, np.ndarray]:
    """The elements A_i^s xi^(i r)."""
    A = _require_nonzero(mc)
    F = mc.field
    xi_r = F.pow(decomp.xi, r)
    xi_pows = np.empty(len(A), dtype=np.int64)
    cur = 1
    for i in range(len(A)):
        xi_pows[i] = cur
        cur = F.mul(cur, xi_r)
    return F.vmul(F.vpow(A, decomp.s), xi_pows), xi_pows


def cond_roots_unity(mc: MappingCoeffs, r: int, decomp: Decomposition) -> bool:
    """{A_i^s xi^(ir)} is the full set of l-th roots of unity."""
    F = mc.field
    B, _ = _root_terms(mc, r, decomp)
    if not np.all(F.vpow(B, decomp.l) == 1):
        raise AssertionError("A_i^s xi^(ir) must be an l-th root of unity")
    return len(np.unique(B)) == decomp.l


def cond_power_sums(mc: MappingCoeffs, r: int,
                    decomp: Decomposition) -> tuple[bool, int | None]:
    """sum_i xi^(c r i) A_i^(c s) = 0 for c = 1 .. l-1."""
    A = _require_nonzero(mc)
    F = mc.field
    _, xi_ri = _root_terms(mc, r, decomp)
    A_s = F.vpow(A, decomp.s)
    xi_cur, a_cur = xi_ri, A_s
    for c in range(1, decomp.l):
        if F.vsum(F.vmul(xi_cur, a_cur)) != 0:
            return False, c
        xi_cur = F.vmul(xi_cur, xi_ri)
        a_cur = F.vmul(a_cur, A_s)
    return True, None


# -- driver ------------------------------------------------------------------

def full_equivalence(ff: FactoredForm, table: DlogTable, run_oracle: bool = True,
                     limit: int | None = None) -> VerdictReport:
    """Evaluate every applicable criterion and cross-check them."""
    F = ff.field
    decomp, r, l = ff.decomp, ff.r, ff.decomp.l
    mc = mapping_coeffs(ff)
    rep = nec_conditions(ff, mc, table)
    limit = max_q() if limit is None else limit
    in_budget = F.q <= limit

    if run_oracle and in_budget:
        ok, pair = oracle_is_permutation(ff.expanded, limit)
        rep.oracle = ok
        rep.conditions.insert(0, Condition(PERMUTATION, REFS[PERMUTATION], ok, pair))
    if in_budget:
        ok, pair = _bijective(cyclotomic_map_all(mc, r, table, decomp), F.q)
        rep.conditions.append(Condition(MAPPING, REFS[MAPPING], ok, pair))

    if rep.holds(GCD_R_S) and rep.holds(NONZERO):
        ok, w = cond_coset_distinct(mc, r, table, decomp)
        rep.conditions.append(Condition(COSET_DISTINCT, REFS[COSET_DISTINCT], ok, w))
        ok, w = cond_index_pairwise(mc, r, table, decomp)
        rep.conditions.append(Condition(INDEX_PAIRWISE, REFS[INDEX_PAIRWISE], ok, w))
        if rep.holds(NNC):
            ok, w = cond_suff_index(mc, r, table, decomp)
            if l % 2 == 0:
                w = {"pair": w, "note": "never satisfiable for even l"}
            rep.conditions.append(Condition(SUFF_INDEX, REFS[SUFF_INDEX], ok, w))
        else:
            rep.conditions.append(Condition(SUFF_INDEX, REFS[SUFF_INDEX], False,
                                            {"skipped": "PreconditionUnmet"}))
        rep.conditions.append(Condition(DISTINCT_REPS, REFS[DISTINCT_REPS],
                                        cond_distinct_reps(mc, r, table, decomp)))
        rep.conditions.append(Condition(ROOTS_OF_UNITY, REFS[ROOTS_OF_UNITY],
                                        cond_roots_unity(mc, r, decomp)))
        ok, c = cond_power_sums(mc, r, decomp)
        rep.conditions.append(Condition(POWER_SUMS, REFS[POWER_SUMS], ok, c))

    _settle(rep)
    return rep


def _settle(rep: VerdictReport) -> None:
    """Fill in ``consistent``, ``disagreements`` and ``disputed``."""
    computed = {c.name: c for c in rep.conditions}
    truth = rep.oracle
    if truth is None and MAPPING in computed:
        truth = computed[MAPPING].holds
    equivalent = [n for n in EQUIVALENT if n in computed]
    suff = computed.get(SUFF_INDEX)
    suff_evaluated = suff is not None and not (isinstance(suff.witness, dict) and "skipped" in suff.witness)
    if suff_evaluated and rep.l % 2 == 1:
        equivalent.append(SUFF_INDEX)
    if truth is None and equivalent:
        truth = computed[equivalent[0]].holds

    bad = []
    if truth is not None:
        bad += [n for n in equivalent if computed[n].holds != truth]
        if truth:
            bad += [n for n in NECESSARY if n in computed and not computed[n].holds]
    rep.disagreements = bad
    rep.consistent = not bad
    if suff_evaluated and rep.l % 2 == 0 and truth is not None and suff.holds != truth:
        rep.disputed.append(SUFF_INDEX)


def add_certificate(rep: VerdictReport, name: str, ref: str, holds: bool,
                    witness: Any = None, role: str = "equivalent") -> None:
    """Attach a theorem-specific verdict and cross-check it with the oracle.

    ``role`` is "necessary" (must hold for every PP), "equivalent" (must
    match the PP status) or "disputed" (a printed statement known to fail
    in some cases; contradictions go to ``disputed`` instead of breaking
    consistency).
    """
    rep.conditions.append(Condition(name, ref, holds, witness))
    truth = rep.oracle if rep.oracle is not None else rep.holds(MAPPING)
    if truth is None:
        return
    if role == "necessary":
        wrong = truth and not holds
    else:
        wrong = holds != truth
    if not wrong:
        return
    if role == "disputed":
        rep.disputed.append(name)
    else:
        rep.disagreements.append(name)
        rep.consistent = False


# -- the l = 3 quadratic-form theorem and the F_13 trinomials ----------------

def reduce_mod_cyclic(f: Poly, l: int) -> list[int]:
    """Coefficients (codes) of f mod x^l - 1, constant term first."""
    F = f.field
    out = [0] * l
    for e, c in f.terms():
        out[e % l] = F.add(out[e % l], c)
    return out


def thm_lab_check(ff: FactoredForm, table: DlogTable) -> tuple[bool, VerdictReport]:
    """PP test for l = 3 when f = a x^2 + b x + c (mod x^3 - 1) has
    a^2 + b^2 + c^2 - ab - bc - ca = 1."""
    if ff.decomp.l != 3:
        raise PreconditionUnmet(f"needs l = 3, got l = {ff.decomp.l}")
    F = ff.field
    c, b, a = reduce_mod_cyclic(ff.f, 3)
    m, ad = F.mul, F.add
    form = ad(ad(m(a, a), m(b, b)), m(c, c))
    form = F.sub(form, ad(ad(m(a, b), m(b, c)), m(c, a)))
    if form != 1:
        raise PreconditionUnmet("a^2+b^2+c^2-ab-bc-ca != 1")
    mc = mapping_coeffs(ff)
    _require_nonzero(mc)
    A0, _, A2 = mc.values
    s, r = ff.decomp.s, ff.r
    rep = _report(ff)
    ind_a0 = table.index(A0)
    ind_a2sq = table.index(F.mul(A2, A2))
    rep.conditions += [
        Condition("lab_gcd_r_s", "lab", gcd(r, s) == 1, gcd(r, s)),
        Condition("a0_pow_s_is_one", "lab", F.pow(A0, s) == 1),
        Condition("three_divides_ind_a0", "lab", ind_a0 % 3 == 0, ind_a0),
        Condition("three_not_divides_r_plus_ind_a2sq", "lab", (r + ind_a2sq) % 3 != 0, ind_a2sq),
    ]
    return all(c.holds for c in rep.conditions), rep


TRINOMIAL_FIELD = 13


def trinomial_factored(r: int) -> tuple[FactoredForm, DlogTable]:
    """x^r (2x^8 + x^4 + 2) over F_13 with l = 3, s = 4."""
    F = make_field(TRINOMIAL_FIELD)
    table = default_table(F)
    f = Poly(F, (2, 1, 2))
    return FactoredForm(r, f, decompose(F, table, 3)), table


def trinomial_family_f13(r: int) -> bool:
    """Whether 2x^(r+8) + x^(r+4) + 2x^r permutes F_13, via :func:`thm_lab_check`."""
    if not 0 < r < 12:
        raise PreconditionUnmet("needs 0 < r < 12")
    ff, table = trinomial_factored(r)
    verdict, _ = thm_lab_check(ff, table)
    return verdict


# -- binomials x^r (x^(es) + 1) ----------------------------------------------

@dataclass(frozen=True)
class BinomialParams:
    r: int
    e: int
    decomp: Decomposition
    spec: FieldSpec

    def f(self) -> Poly:
        return Poly.from_terms(self.spec, [(0, 1), (self.e, 1)])

    def factored(self) -> FactoredForm:
        return FactoredForm(self.r, self.f(), self.decomp)

    def poly(self) -> Poly:
        return self.factored().expand()


def make_binomial(spec: FieldSpec, l: int, r: int, e: int,
                  table: DlogTable | None = None) -> BinomialParams:
    table = default_table(spec) if table is None else table
    return BinomialParams(r, e, decompose(spec, table, l), spec)


def _binomial_pre(bp: BinomialParams) -> None:
    l = bp.decomp.l
    if bp.spec.p == 2:
        raise PreconditionUnmet("needs odd characteristic")
    if l < 3 or l % 2 == 0:
        raise PreconditionUnmet(f"needs odd l >= 3, got {l}")
    if gcd(l, bp.e) != 1:
        raise PreconditionUnmet(f"needs gcd(l, e) = 1, got gcd({l}, {bp.e})")


def _two_pow_s_is_one(bp: BinomialParams) -> bool:
    F = bp.spec
    return F.pow(F.add(1, 1), bp.decomp.s) == 1


def binomial_necessary(bp: BinomialParams, table: DlogTable) -> VerdictReport:
    """(r,s) = 1, (1+1)^s = 1 and l does not divide 2r + es."""
    _binomial_pre(bp)
    l, s, r, e = bp.decomp.l, bp.decomp.s, bp.r, bp.e
    rep = VerdictReport(format_poly(bp.poly()), format_field(bp.spec), l, r)
    rep.conditions += [
        Condition("pbn_gcd_r_s", "pbn", gcd(r, s) == 1, gcd(r, s)),
        Condition("two_pow_s_is_one", "pbn", _two_pow_s_is_one(bp)),
        Condition("l_not_divides_2r_plus_es", "pbn", (2 * r + e * s) % l != 0, 2 * r + e * s),
    ]
    return rep


def binomial_l3_clauses(bp: BinomialParams) -> list[Condition]:
    """The five clauses of the l = 3 characterisation, plus the literal
    integer reading "3 | 2^s - 1" (informational, not part of the verdict)."""
    _binomial_pre(bp)
    if bp.decomp.l != 3:
        raise PreconditionUnmet(f"needs l = 3, got l = {bp.decomp.l}")
    s, r, e = bp.decomp.s, bp.r, bp.e
    return [
        Condition("pb_gcd_r_s", "PB", gcd(r, s) == 1, gcd(r, s)),
        Condition("two_pow_s_is_one", "PB", _two_pow_s_is_one(bp)),
        Condition("three_not_divides_2r_plus_es", "PB", (2 * r + e * s) % 3 != 0, 2 * r + e * s),
        Condition("three_not_divides_r_plus_es", "PB", (r + e * s) % 3 != 0, r + e * s),
        Condition("three_not_divides_r_plus_2es", "PB", (r + 2 * e * s) % 3 != 0, r + 2 * e * s),
        Condition("literal_three_divides_2s_minus_1", "PB (integer reading)",
                  (2**s - 1) % 3 == 0),
    ]


def binomial_l3_iff(bp: BinomialParams, table: DlogTable) -> bool:
    return all(c.holds for c in binomial_l3_clauses(bp)[:5])


def binomial_residue_clauses(bp: BinomialParams, table: DlogTable) -> list[Condition]:
    """Clauses of the characterisation for l | r + es (s even)."""
    _binomial_pre(bp)
    l, s, r, e = bp.decomp.l, bp.decomp.s, bp.r, bp.e
    if s % 2:
        raise PreconditionUnmet(f"needs s even, got {s}")
    if (r + e * s) % l:
        raise PreconditionUnmet(f"needs l | r + es, got {r + e * s} mod {l}")
    F = bp.spec
    A = mapping_coeffs(bp.factored()).values
    powers = [F.pow(A[k], s) for k in range(1, l)]
    lam_ok = all(F.pow(v, l) == 1 for v in powers) and len(set(powers)) == l - 1
    ind2 = table.index(F.add(1, 1))
    bad_k = next((k for k in range(1, l) if (table.index(A[k]) + k * r - ind2) % l == 0), None)
    return [
        Condition("residue_gcd_r_s", "residue", gcd(r, s) == 1, gcd(r, s)),
        Condition("two_pow_s_is_one", "residue", _two_pow_s_is_one(bp)),
        Condition("l_not_divides_r", "residue", r % l != 0, r),
        Condition("lambda_distinct_roots", "residue", lam_ok),
        Condition("index_shift_avoids_ind2", "residue", bad_k is None, bad_k),
    ]


def binomial_residue_case(bp: BinomialParams, table: DlogTable) -> bool:
    return all(c.holds for c in binomial_residue_clauses(bp, table))


@lru_cache(maxsize=256)
def binomial_branches(bp: BinomialParams) -> tuple[int, ...]:
    """A_i = xi^(ei) + 1 as codes (cached; independent of r)."""
    return mapping_coeffs(bp.factored()).values


def lemma_lem_check(bp: BinomialParams, i: int, j: int) -> bool:
    """xi^(e(j-i)) A_i / A_j == A_(l-i) / A_(l-j) for 1 <= i != j <= l-1."""
    l = bp.decomp.l
    if not (1 <= i <= l - 1 and 1 <= j <= l - 1 and i != j):
        raise PreconditionUnmet(f"needs 1 <= i != j <= {l - 1}")
    F = bp.spec
    A = binomial_branches(bp)
    if A[j] == 0 or A[l - j] == 0:
        raise ZeroDenominator(f"A_{j} or A_{l - j} is zero")
    lhs = F.mul(F.mul(F.pow(bp.decomp.xi, bp.e * (j - i)), A[i]), F.inv(A[j]))
    rhs = F.mul(A[l - i], F.inv(A[l - j]))
    return lhs == rhs


def prop_nonexistence_scan(p: int) -> bool:
    """Confirm by the oracle that no x^r (x^(e(p-1)/3) + 1), gcd(e,3) = 1,
    gcd(r,(p-1)/3) = 1, permutes F_p when p does not divide 2^((p-1)/3) - 1.

    Raises HypothesisFails when that divisibility holds (existence is then
    left open).
    """
    if p % 2 == 0 or (p - 1) % 3:
        raise PreconditionUnmet(f"needs an odd prime p with 3 | p-1, got {p}")
    s = (p - 1) // 3
    if pow(2, s, p) == 1:
        raise HypothesisFails(f"{p} divides 2^{s} - 1; binomials may exist")
    F = make_field(p)
    table = default_table(F)
    for r in range(1, p - 1):
        if gcd(r, s) != 1:
            continue
        for e in (1, 2):
            ok, _ = oracle_is_permutation(make_binomial(F, 3, r, e, table).poly())
            if ok:
                return False
    return True
