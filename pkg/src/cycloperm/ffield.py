"""Finite fields F_{p^m}, element arithmetic and discrete-log (index) tables.

Elements are carried internally as integer *codes*: the coordinate vector
``(c_0, ..., c_{m-1})`` in the power basis of the modulus maps to
``c_0 + c_1 p + ... + c_{m-1} p^(m-1)``.  In a prime field the code of an
element is the element itself.  :class:`FieldElement` wraps a code together
with its field for scalar work; the hot paths (oracle, criteria) work on
codes and on numpy arrays of codes through the ``v*`` methods of
:class:`FieldSpec`.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    DegreeMismatch,
    FieldMismatch,
    FieldTooLarge,
    MalformedInput,
    NotPrime,
    NotPrimitive,
    ReducibleModulus,
    ZeroElement,
    ZeroInverse,
)

DEFAULT_MAX_Q = 1 << 22


def max_q() -> int:
    """Table budget: largest q for which dense tables are built."""
    value = os.environ.get("CYCLOPERM_MAX_Q")
    return int(value) if value else DEFAULT_MAX_Q


def check_budget(q: int, limit: int | None = None) -> None:
    limit = max_q() if limit is None else limit
    if q > limit:
        raise FieldTooLarge(f"q = {q} exceeds the table budget {limit}")


# -- integer number theory ---------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@lru_cache(maxsize=None)
def factorize(n: int) -> dict[int, int]:
    """Prime factorization of ``n >= 1`` by trial division."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple[int, ...]:
    divs = [1]
    for prime, exp in factorize(n).items():
        divs = [d * prime**k for d in divs for k in range(exp + 1)]
    return tuple(sorted(divs))


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, m)`` with ``q = p^m`` or None if q is not a prime power."""
    if q < 2:
        return None
    f = factorize(q)
    if len(f) != 1:
        return None
    (p, m), = f.items()
    return p, m


# -- polynomials over F_p (coefficient lists, constant term first) ----------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    a = _trim(list(a))
    dg = len(g) - 1
    inv_lead = pow(g[-1], -1, p)
    while len(a) - 1 >= dg:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dg
        for i, gi in enumerate(g):
            a[shift + i] = (a[shift + i] - c * gi) % p
        _trim(a)
    return a


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


def _psub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _ppowmod(a: Sequence[int], k: int, g: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, g, p)
    while k:
        if k & 1:
            result = _pmod(_pmul(result, base, p), g, p)
        base = _pmod(_pmul(base, base, p), g, p)
        k >>= 1
    return result


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Irreducibility of a monic polynomial over F_p.

    ``g`` of degree m is irreducible iff gcd(x^(p^k) - x, g) = 1 for all
    1 <= k <= m/2.
    """
    g = _trim([c % p for c in coeffs])
    m = len(g) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if g[0] == 0:
        return False
    x = [0, 1]
    xpk = x
    for _ in range(m // 2):
        xpk = _ppowmod(xpk, p, g, p)
        if len(_pgcd(g, _psub(xpk, x, p), p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m over F_p.

    Candidates are scanned with the constant term as the most significant
    position, so for p = 3, m = 2 the result is x^2 + 1.
    """
    if m == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=m):
        cand = (*low, 1)
        if is_irreducible(cand, p):
            return cand
    raise AssertionError("an irreducible polynomial of every degree exists")


# -- fields ------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^m} = F_p[t] / (modulus)."""

    p: int
    m: int
    modulus: tuple[int, ...]
    q: int = dc_field(init=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"{self.p} is not prime")
        if self.m < 1:
            raise DegreeMismatch(f"extension degree must be >= 1, got {self.m}")
        modulus = tuple(int(c) for c in self.modulus)
        if len(modulus) != self.m + 1 or modulus[-1] != 1:
            raise DegreeMismatch(
                f"modulus must be monic of degree {self.m}, got {list(modulus)}")
        if any(not 0 <= c < self.p for c in modulus):
            raise MalformedInput(f"modulus coefficients must lie in [0, {self.p})")
        if self.m > 1 and not is_irreducible(modulus, self.p):
            raise ReducibleModulus(f"{list(modulus)} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "q", self.p**self.m)

    def __str__(self):
        return format_field(self)

    # element construction
    def __call__(self, x: int | Sequence[int]) -> FieldElement:
        """Element from a code (int) or a coordinate sequence."""
        if isinstance(x, (int, np.integer)):
            x = int(x)
            if not 0 <= x < self.q:
                raise MalformedInput(f"code {x} out of range for F_{self.q}")
            return FieldElement(self, x)
        return FieldElement(self, self.from_coords(x))

    def elements(self) -> list[FieldElement]:
        return [FieldElement(self, c) for c in range(self.q)]

    def coords(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.m):
            code, d = divmod(code, self.p)
            out.append(d)
        return tuple(out)

    def from_coords(self, coords: Sequence[int]) -> int:
        if len(coords) != self.m:
            raise DegreeMismatch(f"expected {self.m} coordinates, got {len(coords)}")
        code = 0
        for c in reversed(coords):
            code = code * self.p + int(c) % self.p
        return code

    # scalar arithmetic on codes
    def add(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        p = self.p
        return self.from_coords([(x + y) % p for x, y in zip(self.coords(a), self.coords(b))])

    def neg(self, a: int) -> int:
        if self.m == 1:
            return -a % self.p
        if self.p == 2:
            return a
        return self.from_coords([-x % self.p for x in self.coords(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.m == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        tables = self._arith
        if tables is None:
            return self._mul_poly(a, b)
        exp, log = tables
        return int(exp[(int(log[a]) + int(log[b])) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative inverse")
        if self.m == 1:
            return pow(a, -1, self.p)
        return self.pow(a, -1)

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroInverse("negative power of zero")
            return 0
        k %= self.q - 1
        if self.m == 1:
            return pow(a, k, self.p)
        tables = self._arith
        if tables is None:
            return self._pow_poly(a, k)
        exp, log = tables
        return int(exp[int(log[a]) * k % (self.q - 1)])

    def _mul_poly(self, a: int, b: int) -> int:
        prod = _pmod(_pmul(self.coords(a), self.coords(b), self.p), self.modulus, self.p)
        return self.from_coords(prod + [0] * (self.m - len(prod)))

    def _pow_poly(self, a: int, k: int) -> int:
        result, base = 1, a
        while k:
            if k & 1:
                result = self._mul_poly(result, base)
            base = self._mul_poly(base, base)
            k >>= 1
        return result

    @cached_property
    def _arith(self):
        """Exp/log tables backing fast multiplication in extension fields
        (and vectorised powers in prime fields).

        Built from the canonical primitive element using schoolbook
        multiplication; None when q exceeds the budget (slow path is used).
        """
        if self.q > max_q():
            return None
        if self.m == 1:
            p = self.p
            gamma = _smallest_primitive(self, lambda a, k: pow(a, k, p))
            mul = lambda a, b: a * b % p  # noqa: E731
        else:
            gamma = _smallest_primitive(self, self._pow_poly)
            mul = self._mul_poly
        n = self.q - 1
        exp = np.empty(n, dtype=np.int64)
        cur = 1
        for k in range(n):
            exp[k] = cur
            cur = mul(cur, gamma)
        log = np.zeros(self.q, dtype=np.int64)
        log[exp] = np.arange(n, dtype=np.int64)
        return exp, log

    def _require_tables(self):
        if self.m == 1:
            return None
        tables = self._arith
        if tables is None:
            raise FieldTooLarge(f"q = {self.q} exceeds the table budget {max_q()}")
        return tables

    @cached_property
    def _digit_tables(self):
        check_budget(self.q)
        codes = np.arange(self.q, dtype=np.int64)
        digits = np.empty((self.q, self.m), dtype=np.int64)
        for i in range(self.m):
            codes, digits[:, i] = np.divmod(codes, self.p)
        place = self.p ** np.arange(self.m, dtype=np.int64)
        return digits, place

    # vectorised arithmetic on int64 arrays of codes
    def vadd(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        digits, place = self._digit_tables
        return ((digits[a] + digits[b]) % self.p) @ place

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.m == 1:
            return -a % self.p
        if self.p == 2:
            return a
        digits, place = self._digit_tables
        return (-digits[a] % self.p) @ place

    def vmul(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.m == 1:
            return a * b % self.p
        exp, log = self._require_tables()
        out = exp[(log[a] + log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def vpow(self, a, k: int):
        """Elementwise ``a**k`` for a non-negative integer k (0**0 = 1)."""
        a = np.asarray(a, dtype=np.int64)
        if k < 0:
            if np.any(a == 0):
                raise ZeroInverse("negative power of zero")
            k %= self.q - 1
        if k == 0:
            return np.ones_like(a)
        zero = a == 0
        kr = k % (self.q - 1) or (self.q - 1)
        if self.m == 1 and self._arith is None:
            result = np.ones_like(a)
            base = a.copy()
            while kr:
                if kr & 1:
                    result = result * base % self.p
                base = base * base % self.p
                kr >>= 1
        else:
            exp, log = self._arith if self.m == 1 else self._require_tables()
            result = exp[log[a] * kr % (self.q - 1)]
        return np.where(zero, 0, result)

    def vsum(self, a) -> int:
        """Field sum of a 1-D array of codes."""
        a = np.asarray(a, dtype=np.int64)
        if a.size == 0:
            return 0
        if self.m == 1:
            return int(a.sum() % self.p)
        if self.p == 2:
            return int(np.bitwise_xor.reduce(a))
        digits, place = self._digit_tables
        return int((digits[a].sum(axis=0) % self.p) @ place)

    def vsum_rows(self, a):
        """Field sum along the first axis of a 2-D array of codes."""
        a = np.asarray(a, dtype=np.int64)
        if a.shape[0] == 0:
            return np.zeros(a.shape[1:], dtype=np.int64)
        if self.m == 1:
            return a.sum(axis=0) % self.p
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=0)
        digits, place = self._digit_tables
        acc = np.zeros(a.shape[1:] + (self.m,), dtype=np.int64)
        for row in a:
            acc += digits[row]
        return (acc % self.p) @ place


@dataclass(frozen=True, eq=True)
class FieldElement:
    """An element of a concrete field; supports the usual operators."""

    field: FieldSpec
    value: int

    @property
    def coords(self) -> tuple[int, ...]:
        return self.field.coords(self.value)

    def is_zero(self) -> bool:
        return self.value == 0

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{other.field} vs {self.field}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented

    def _wrap(self, code: int) -> FieldElement:
        return FieldElement(self.field, code)

    def __add__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.field.sub(b, self.value))

    def __mul__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self._wrap(self.field.mul(self.value, self.field.inv(b)))

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self._wrap(self.field.mul(b, self.field.inv(self.value)))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, k: int):
        return self._wrap(self.field.pow(self.value, int(k)))

    def __lt__(self, other: FieldElement):
        return self.value < self._coerce(other)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __str__(self):
        return format_element(self.field, self.value)

    def __repr__(self):
        return f"FieldElement({self}, F_{self.field.q})"


def _check_same(a: FieldElement, b: FieldElement) -> None:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.inv(a.value))


@lru_cache(maxsize=None)
def _make_field(p: int, m: int, modulus: tuple[int, ...] | None) -> FieldSpec:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if m < 1:
        raise DegreeMismatch(f"extension degree must be >= 1, got {m}")
    if modulus is None:
        modulus = smallest_irreducible(p, m)
    return FieldSpec(p, m, modulus)


def make_field(p: int, m: int = 1, modulus: Sequence[int] | None = None) -> FieldSpec:
    """Validated F_{p^m}; picks the smallest irreducible modulus when omitted."""
    return _make_field(int(p), int(m), None if modulus is None else tuple(int(c) for c in modulus))


def element_from_integer(spec: FieldSpec, n: int) -> FieldElement:
    """Image of ``n * 1`` in the field."""
    return FieldElement(spec, n % spec.p)


# -- text formats ------------------------------------------------------------

def parse_field(text: str) -> FieldSpec:
    """Parse ``"13"``, ``"3^2"`` or ``"3^2/1,0,1"``."""
    text = text.strip().replace(" ", "")
    try:
        if "/" in text:
            head, mod = text.split("/", 1)
            modulus = [int(c) for c in mod.split(",")]
        else:
            head, modulus = text, None
        if "^" in head:
            p_s, m_s = head.split("^", 1)
            p, m = int(p_s), int(m_s)
        else:
            p, m = int(head), 1
    except ValueError as exc:
        raise MalformedInput(f"cannot parse field description {text!r}") from exc
    if m == 1 and modulus is None:
        pp = None if is_prime(p) else prime_power(p)
        if pp is not None:
            raise NotPrime(f"{p} is not prime; write it as p^m (e.g. {pp[0]}^{pp[1]})")
    return make_field(p, m, modulus)


def format_field(spec: FieldSpec) -> str:
    if spec.m == 1:
        return str(spec.p)
    return f"{spec.p}^{spec.m}/" + ",".join(str(c) for c in spec.modulus)


def parse_element(spec: FieldSpec, text: str) -> FieldElement:
    """A bare integer is ``n * 1``; a comma list gives coordinates."""
    text = text.strip().strip("()")
    try:
        if "," in text:
            coords = [int(c) for c in text.split(",")]
            return FieldElement(spec, spec.from_coords([c % spec.p for c in coords]))
        return element_from_integer(spec, int(text))
    except ValueError as exc:
        raise MalformedInput(f"cannot parse field element {text!r}") from exc


def format_element(spec: FieldSpec, code: int) -> str:
    if spec.m == 1:
        return str(code)
    return ",".join(str(c) for c in spec.coords(code))


# -- primitive elements and index tables -------------------------------------

def _smallest_primitive(spec: FieldSpec, powfn) -> int:
    n = spec.q - 1
    if n == 1:
        return 1
    primes = list(factorize(n))
    for code in range(1, spec.q):
        if all(powfn(code, n // ell) != 1 for ell in primes):
            return code
    raise AssertionError("every finite field has a primitive element")


def multiplicative_order(spec: FieldSpec, a: int) -> int:
    if a == 0:
        raise ZeroElement("zero has no multiplicative order")
    order = spec.q - 1
    for ell, exp in factorize(spec.q - 1).items():
        for _ in range(exp):
            if spec.pow(a, order // ell) == 1:
                order //= ell
            else:
                break
    return order


def find_primitive(spec: FieldSpec) -> FieldElement:
    """Smallest element (by code) whose multiplicative order is q - 1."""
    return FieldElement(spec, _smallest_primitive(spec, spec.pow))


@dataclass(frozen=True, eq=False)
class DlogTable:
    """Dense index map for a primitive element ``gamma``.

    ``power_of[k]`` is the code of gamma^k and ``index_of[code]`` its
    exponent in ``[0, q-1)``; ``index_of[0]`` is -1.
    """

    field: FieldSpec
    gamma: FieldElement
    power_of: np.ndarray
    index_of: np.ndarray

    @property
    def order(self) -> int:
        return self.field.q - 1

    def index(self, a: FieldElement | int) -> int:
        code = a.value if isinstance(a, FieldElement) else int(a)
        if code == 0:
            raise ZeroElement("the index of zero is undefined")
        return int(self.index_of[code])

    def power(self, k: int) -> FieldElement:
        return FieldElement(self.field, int(self.power_of[k % self.order]))


def build_dlog_table(spec: FieldSpec, gamma: FieldElement | int | None = None,
                     limit: int | None = None) -> DlogTable:
    """One pass gamma^0, gamma^1, ..., gamma^(q-2)."""
    check_budget(spec.q, limit)
    if gamma is None:
        gamma = find_primitive(spec)
    elif isinstance(gamma, (int, np.integer)):
        gamma = spec(int(gamma))
    elif gamma.field != spec:
        raise FieldMismatch("gamma belongs to another field")
    g = gamma.value
    n = spec.q - 1
    if g == 0:
        raise NotPrimitive("zero is not primitive")
    power_of = np.empty(n, dtype=np.int64)
    if spec.m == 1:
        cur = 1
        for k in range(n):
            if k and cur == 1:
                raise NotPrimitive(f"{gamma} has order {k} < {n}")
            power_of[k] = cur
            cur = cur * g % spec.p
    else:
        exp, log = spec._require_tables()
        power_of[:] = exp[log[g] * np.arange(n, dtype=np.int64) % n]
        if math.gcd(int(log[g]), n) != 1:
            raise NotPrimitive(f"{gamma} is not primitive")
    index_of = np.full(spec.q, -1, dtype=np.int64)
    index_of[power_of] = np.arange(n, dtype=np.int64)
    return DlogTable(spec, gamma, power_of, index_of)


@lru_cache(maxsize=64)
def default_table(spec: FieldSpec) -> DlogTable:
    """Cached table for the canonical primitive element."""
    return build_dlog_table(spec)


def index_arith_check(table: DlogTable, a: FieldElement, b: FieldElement, k: int) -> bool:
    """Check the five index congruences (product, quotient, inverse,
    k-fold product, k-th power) for nonzero ``a``, ``b``.

    The k-fold product uses the factors a*b^i for i = 1..|k|.
    """
    n = table.order
    ind = table.index
    ia, ib = ind(a), ind(b)
    ok = ind(a * b) == (ia + ib) % n
    ok &= ind(a / b) == (ia - ib) % n
    ok &= ind(inv(a)) == -ia % n
    factors = [a * b**i for i in range(1, abs(k) + 1)]
    prod = FieldElement(a.field, 1)
    for x in factors:
        prod = prod * x
    ok &= ind(prod) == sum(ind(x) for x in factors) % n
    ok &= ind(a**k) == k * ia % n
    return bool(ok)
