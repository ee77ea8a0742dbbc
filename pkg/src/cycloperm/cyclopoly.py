"""Polynomials over F_q, the factored form x^r f(x^s), and cyclotomic mappings."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    FieldMismatch,
    MalformedInput,
    NotADivisor,
    NotFactorable,
    ZeroConstantViolation,
    ZeroElement,
)
from .ffield import (
    DlogTable,
    FieldElement,
    FieldSpec,
    default_table,
    divisors,
    format_element,
    multiplicative_order,
    parse_element,
)


@dataclass(frozen=True)
class Poly:
    """Dense univariate polynomial; ``coeffs[e]`` is the code of the x^e
    coefficient.  Trailing zeros are trimmed, so the zero polynomial has
    ``coeffs == ()``.
    """

    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        if any(not 0 <= x < self.field.q for x in c):
            raise MalformedInput("coefficient code out of range")
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_terms(cls, field: FieldSpec, terms: Mapping[int, int] | Iterable[tuple[int, int]]) -> Poly:
        """Build from (exponent, code) pairs; repeated exponents are summed."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        dense: dict[int, int] = {}
        for e, c in items:
            if e < 0:
                raise MalformedInput(f"negative exponent {e}")
            dense[e] = field.add(dense.get(e, 0), int(c))
        size = max(dense, default=-1) + 1
        return cls(field, tuple(dense.get(e, 0) for e in range(size)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> Iterator[tuple[int, int]]:
        """Nonzero (exponent, code) pairs in increasing exponent order."""
        return ((e, c) for e, c in enumerate(self.coeffs) if c)

    def coefficient(self, e: int) -> FieldElement:
        return FieldElement(self.field, self.coeffs[e] if e < len(self.coeffs) else 0)

    def __call__(self, x: FieldElement) -> FieldElement:
        return evaluate(self, x)

    def __str__(self):
        return format_poly(self)


_TERM = re.compile(r"^(?P<coef>\([^)]*\)|[0-9,]*)\*?(?P<x>x(\^(?P<exp>[0-9]+))?)?$")


def parse_poly(field: FieldSpec, text: str) -> Poly:
    """Parse ``"2x^9+x^5+2x"``-style text.

    Terms are separated by ``+`` (a leading ``-`` negates a term).  The
    coefficient is a field-element literal; extension-field coordinate lists
    may be parenthesised, e.g. ``"(1,1)x^2+x"``.
    """
    src = text.replace(" ", "")
    if not src:
        raise MalformedInput("empty polynomial")
    tokens = re.findall(r"[+-]?[^+-]+", src)
    if "".join(tokens) != src:
        raise MalformedInput(f"cannot parse polynomial {text!r}")
    terms = []
    for tok in tokens:
        sign = -1 if tok.startswith("-") else 1
        body = tok.lstrip("+-")
        m = _TERM.match(body)
        if not m or (not m.group("coef") and not m.group("x")):
            raise MalformedInput(f"cannot parse term {tok!r} in {text!r}")
        coef_text = m.group("coef")
        coef = parse_element(field, coef_text).value if coef_text else 1
        if sign < 0:
            coef = field.neg(coef)
        if m.group("x"):
            exp = int(m.group("exp")) if m.group("exp") else 1
        else:
            exp = 0
        terms.append((exp, coef))
    return Poly.from_terms(field, terms)


def format_poly(poly: Poly) -> str:
    if poly.is_zero():
        return "0"
    parts = []
    for e, c in sorted(poly.terms(), reverse=True):
        lit = format_element(poly.field, c)
        if poly.field.m > 1:
            lit = f"({lit})"
        if e == 0:
            parts.append(lit)
            continue
        mono = "x" if e == 1 else f"x^{e}"
        parts.append(mono if c == 1 else f"{lit}{mono}")
    return "+".join(parts)


def require_reduced(poly: Poly) -> None:
    """Reject exponents >= q - 1 (inputs are taken as degree < q-1 representatives)."""
    if poly.degree >= poly.field.q - 1:
        raise MalformedInput(
            f"exponent {poly.degree} >= q-1 = {poly.field.q - 1}; reduce the input first")


def evaluate(poly: Poly, x: FieldElement) -> FieldElement:
    """Horner evaluation."""
    if x.field != poly.field:
        raise FieldMismatch(f"point in {x.field}, polynomial over {poly.field}")
    F = poly.field
    acc = 0
    for c in reversed(poly.coeffs):
        acc = F.add(F.mul(acc, x.value), c)
    return FieldElement(F, acc)


VANDERMONDE_MAX_Q = 2048


@lru_cache(maxsize=2)
def _vandermonde(spec: FieldSpec) -> np.ndarray:
    """Float64 matrix of x^e for a prime field, rows x, columns e < q."""
    q = spec.q
    table = default_table(spec)
    logs = table.index_of[1:]
    V = np.empty((q, q), dtype=np.float64)
    V[0] = 0.0
    V[0, 0] = 1.0
    V[1:] = table.power_of[np.outer(logs, np.arange(q, dtype=np.int64)) % (q - 1)]
    V.setflags(write=False)
    return V


def _reduced_dense(poly: Poly) -> np.ndarray:
    """Coefficients with every exponent e >= q folded to 1 + (e-1) mod (q-1).

    The folded polynomial induces the same function on F_q.
    """
    F = poly.field
    n = F.q - 1
    c = np.zeros(min(len(poly.coeffs), F.q), dtype=np.int64)
    for e, a in poly.terms():
        k = e if e < F.q else 1 + (e - 1) % n
        c[k] = F.add(int(c[k]), a)
    return c


def _eval_at_logs(poly: Poly, table: DlogTable, logs: np.ndarray) -> np.ndarray:
    """Values of ``poly`` at the nonzero points gamma^logs.

    Each term c x^e becomes gamma^(e*log x + Ind c), one table gather per
    term, so the cost is (number of terms) * (number of points).
    """
    F = poly.field
    n = F.q - 1
    terms = list(poly.terms())
    if not terms:
        return np.zeros(len(logs), dtype=np.int64)
    exps = np.array([e % n for e, _ in terms], dtype=np.int64)
    ind = table.index_of[np.array([c for _, c in terms], dtype=np.int64)]
    out = np.zeros(len(logs), dtype=np.int64)
    step = max(1, (1 << 18) // max(1, len(logs)))
    for k in range(0, len(terms), step):
        rows = table.power_of[(np.outer(exps[k:k + step], logs) + ind[k:k + step, None]) % n]
        out = F.vadd(out, F.vsum_rows(rows))
    return out


def evaluate_at(poly: Poly, points) -> np.ndarray:
    """Values of ``poly`` at an array of codes.

    Prime fields up to ``VANDERMONDE_MAX_Q`` with many terms use one exact
    float64 matrix-vector product (all partial sums stay below 2^53); other
    cases gather from the discrete-log tables term by term.
    """
    F = poly.field
    pts = np.asarray(points, dtype=np.int64)
    n_terms = sum(1 for _ in poly.terms())
    if F.m == 1 and F.q <= VANDERMONDE_MAX_Q and n_terms > 16:
        c = _reduced_dense(poly)
        V = _vandermonde(F)[:, :len(c)]
        vals = np.rint(V @ c.astype(np.float64)).astype(np.int64) % F.p
        return vals[pts]
    table = default_table(F)
    out = np.empty(pts.shape, dtype=np.int64)
    nz = pts != 0
    out[~nz] = poly.coeffs[0] if poly.coeffs else 0
    out[nz] = _eval_at_logs(poly, table, table.index_of[pts[nz]])
    return out


def evaluate_all(poly: Poly) -> np.ndarray:
    """Values of ``poly`` at every field element, indexed by code."""
    return evaluate_at(poly, np.arange(poly.field.q, dtype=np.int64))


# -- decomposition q - 1 = l * s ---------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """``q - 1 = l * s`` with ``xi = gamma^s`` of order exactly l."""

    l: int
    s: int
    xi: int

    def xi_element(self, field: FieldSpec) -> FieldElement:
        return FieldElement(field, self.xi)


def decompose(spec: FieldSpec, table: DlogTable, l: int) -> Decomposition:
    n = spec.q - 1
    if l < 1 or n % l:
        raise NotADivisor(f"{l} does not divide q-1 = {n}")
    s = n // l
    xi = int(table.power_of[s % n])
    if multiplicative_order(spec, xi) != l:
        raise AssertionError(f"xi = gamma^{s} does not have order {l}")
    return Decomposition(l, s, xi)


@dataclass(frozen=True)
class FactoredForm:
    """The polynomial x^r f(x^s) together with its decomposition."""

    r: int
    f: Poly
    decomp: Decomposition

    def __post_init__(self):
        n = self.f.field.q - 1
        if not 0 < self.r < n:
            raise MalformedInput(f"r must satisfy 0 < r < q-1 = {n}, got {self.r}")
        if self.decomp.l * self.decomp.s != n:
            raise NotADivisor("decomposition does not match the field")

    @property
    def field(self) -> FieldSpec:
        return self.f.field

    @cached_property
    def expanded(self) -> Poly:
        return self.expand()

    def expand(self) -> Poly:
        s = self.decomp.s
        return Poly.from_terms(self.field, ((self.r + e * s, c) for e, c in self.f.terms()))


def extract_factored(P: Poly, decomp: Decomposition) -> FactoredForm:
    """Recover r and f with P = x^r f(x^s)."""
    if P.is_zero():
        raise ZeroConstantViolation("the zero polynomial has no factored form")
    if P.coeffs[0] != 0:
        raise ZeroConstantViolation("P(0) != 0")
    terms = list(P.terms())
    r = terms[0][0]
    s = decomp.s
    bad = [e for e, _ in terms if (e - r) % s]
    if bad:
        raise NotFactorable(
            f"exponents {r} and {bad[0]} differ mod s = {s}")
    f = Poly.from_terms(P.field, (((e - r) // s, c) for e, c in terms))
    return FactoredForm(r, f, decomp)


def detect_decompositions(P: Poly, table: DlogTable) -> list[FactoredForm]:
    """Every factored form of P, one per divisor l of q-1, in increasing l."""
    out = []
    for l in divisors(P.field.q - 1):
        try:
            ff = extract_factored(P, decompose(P.field, table, l))
        except (NotFactorable, ZeroConstantViolation, MalformedInput):
            continue
        out.append(ff)
    return out


# -- cyclotomic mapping ------------------------------------------------------

@dataclass(frozen=True)
class MappingCoeffs:
    """Branch constants ``values[i] = f(xi^i)`` as codes."""

    field: FieldSpec
    values: tuple[int, ...]

    @property
    def l(self) -> int:
        return len(self.values)

    @property
    def elements(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.field, a) for a in self.values)

    def all_nonzero(self) -> bool:
        return all(self.values)


def mapping_coeffs(ff: FactoredForm) -> MappingCoeffs:
    d = ff.decomp
    table = default_table(ff.field)
    points = table.power_of[np.arange(d.l, dtype=np.int64) * d.s]
    return MappingCoeffs(ff.field, tuple(evaluate_at(ff.f, points).tolist()))


def coset_of(table: DlogTable, decomp: Decomposition, x: FieldElement | int) -> int:
    code = x.value if isinstance(x, FieldElement) else int(x)
    if code == 0:
        raise ZeroElement("zero lies in no cyclotomic coset")
    return table.index(code) % decomp.l


def cyclotomic_map_eval(mc: MappingCoeffs, r: int, table: DlogTable,
                        decomp: Decomposition, x: FieldElement) -> FieldElement:
    """0 at 0, otherwise A_i x^r for x in the coset C_i."""
    if x.value == 0:
        return FieldElement(mc.field, 0)
    i = coset_of(table, decomp, x)
    return FieldElement(mc.field, mc.field.mul(mc.values[i], mc.field.pow(x.value, r)))


def cyclotomic_map_all(mc: MappingCoeffs, r: int, table: DlogTable,
                       decomp: Decomposition) -> np.ndarray:
    """Vectorised :func:`cyclotomic_map_eval` over every field element."""
    F = mc.field
    xs = np.arange(F.q, dtype=np.int64)
    labels = table.index_of[xs] % decomp.l
    branch = np.asarray(mc.values, dtype=np.int64)[labels]
    out = F.vmul(branch, F.vpow(xs, r))
    out[0] = 0
    return out


def lemma_rela_check(ff: FactoredForm, table: DlogTable) -> bool:
    """x^r f(x^s) and the cyclotomic mapping agree at every point of F_q."""
    mc = mapping_coeffs(ff)
    direct = evaluate_all(ff.expanded)
    mapped = cyclotomic_map_all(mc, ff.r, table, ff.decomp)
    return bool(np.array_equal(direct, mapped))


@lru_cache(maxsize=256)
def lth_powers(spec: FieldSpec, l: int) -> np.ndarray:
    """The subgroup C_0 of nonzero l-th powers, as sorted codes.

    Computed by raising every nonzero element to the l-th power, so it does
    not depend on any choice of primitive element.
    """
    xs = np.arange(1, spec.q, dtype=np.int64)
    return np.unique(spec.vpow(xs, l))
