"""Parameter sweeps, oracle cross-validation and JSON Lines persistence.

Every sweep builds its full task list up front, splits it across workers by
a stable hash of the task key, and sorts the merged results, so the output
depends only on the :class:`SweepSpec` and never on scheduling.
"""

from __future__ import annotations

import io
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import IO, Any, Callable, Iterable, Sequence

import numpy as np

from .criteria import (
    GCD_R_S,
    BinomialParams,
    NNC,
    NONZERO,
    VerdictReport,
    add_certificate,
    binomial_l3_clauses,
    binomial_necessary,
    binomial_residue_clauses,
    full_equivalence,
    thm_lab_check,
    trinomial_factored,
)
from .cyclopoly import FactoredForm, Poly, decompose, format_poly
from .errors import CyclopermError, MalformedInput, PreconditionUnmet
from .ffield import (
    FieldSpec,
    default_table,
    divisors,
    format_field,
    make_field,
    max_q,
    parse_field,
    prime_power,
)

MODES = ("binomial", "trinomial_f13", "general_crossval")

# (q - 2) * q**l above this is sampled rather than enumerated
EXHAUSTIVE_CAP = 120_000


@dataclass
class SweepSpec:
    """What to sweep.  Ranges are inclusive ``(lo, hi)`` pairs; ``None``
    means the natural full range."""

    fields: list[str] = field(default_factory=list)
    mode: str = "binomial"
    l_values: list[int] | None = None
    r_range: tuple[int, int] | None = None
    e_range: tuple[int, int] | None = None
    sample_count: int = 0
    seed: int = 0
    worker_count: int = 1
    max_field: int = 2048

    def __post_init__(self):
        if self.mode not in MODES:
            raise MalformedInput(f"unknown sweep mode {self.mode!r}")
        if self.worker_count < 1:
            raise MalformedInput("worker_count must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> SweepSpec:
        data = dict(data)
        for key in ("r_range", "e_range"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise MalformedInput(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> SweepSpec:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"bad SweepSpec JSON: {exc}") from None

    def field_specs(self) -> list[FieldSpec]:
        return [parse_field(f) for f in self.fields]


@dataclass
class FindingRecord:
    """One swept instance.  There is no timestamp, so reruns are byte-identical."""

    field: str
    l: int | None
    s: int | None
    r: int | None
    e: int | None
    polynomial: str | None
    is_pp: bool | None
    verdict: VerdictReport | None = None
    note: str | None = None
    order: tuple = ()

    def to_json(self) -> dict:
        v = self.verdict
        return {
            "field": self.field,
            "l": self.l,
            "s": self.s,
            "r": self.r,
            "e": self.e,
            "polynomial": self.polynomial,
            "is_pp": self.is_pp,
            "conditions": [c.to_json() for c in v.conditions] if v else [],
            "oracle": v.oracle if v else None,
            "consistent": v.consistent if v else True,
            "disputed": list(v.disputed) if v else [],
            "note": self.note,
        }

    @property
    def consistent(self) -> bool:
        return self.verdict is None or self.verdict.consistent

    def sort_key(self):
        def k(x):
            return -1 if x is None else x
        return (self.order, k(self.l), k(self.r), k(self.e))


def _field_key(spec: FieldSpec) -> tuple:
    return (spec.q, spec.p, spec.m, spec.modulus)


def _field_args(spec: FieldSpec) -> tuple:
    return (spec.p, spec.m, spec.modulus)


# -- partitioned execution ---------------------------------------------------

def partition(tasks: Sequence[tuple], workers: int) -> list[list[tuple]]:
    """Static split by crc32 of each task's repr."""
    buckets: list[list[tuple]] = [[] for _ in range(workers)]
    for t in tasks:
        buckets[zlib.crc32(repr(t).encode()) % workers].append(t)
    return buckets


def run_partitioned(fn: Callable[[list], list], tasks: Sequence[tuple],
                    workers: int = 1) -> list:
    """Apply a batch function to every partition and merge the results.

    With one worker everything runs in-process.  Callers sort the merged
    list, so completion order never leaks into the output.
    """
    if workers <= 1 or len(tasks) < 2:
        return fn(list(tasks))
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(fn, partition(tasks, workers)):
            out.extend(part)
    return out


# -- binomials ---------------------------------------------------------------

def _unit_residues(l: int, e_range: tuple[int, int] | None) -> list[tuple[int, str | None]]:
    """Representatives of e mod l with gcd(e, l) = 1, with a note when the
    range held several e for the same residue."""
    lo, hi = e_range if e_range is not None else (1, l)
    seen: dict[int, list[int]] = {}
    for e in range(max(lo, 1), hi + 1):
        if gcd(e, l) == 1:
            seen.setdefault(e % l, []).append(e)
    out = []
    for group in sorted(seen.values(), key=lambda g: g[0]):
        note = None
        if len(group) > 1:
            note = f"e deduplicated mod {l}: also covers e in {group[1:]}"
        out.append((group[0], note))
    return out


def _binomial_tasks(spec: SweepSpec) -> tuple[list[tuple], list[FindingRecord]]:
    tasks, skipped = [], []
    for F in spec.field_specs():
        order = _field_key(F)
        if F.q > max_q():
            skipped.append(FindingRecord(format_field(F), None, None, None, None, None, None,
                                         note="SkippedBudget", order=order))
            continue
        n = F.q - 1
        ls = [l for l in (spec.l_values or divisors(n)) if l >= 1 and n % l == 0]
        lo, hi = spec.r_range if spec.r_range is not None else (1, n - 1)
        rs = range(max(lo, 1), min(hi, n - 1) + 1)
        for l in sorted(set(ls)):
            for r in rs:
                for e, note in _unit_residues(l, spec.e_range):
                    tasks.append((_field_args(F), l, r, e, note))
    return tasks, skipped


def evaluate_binomial(F: FieldSpec, l: int, r: int, e: int, note: str | None = None) -> FindingRecord:
    """Full equivalence plus every applicable binomial theorem, one record."""
    table = default_table(F)
    decomp = decompose(F, table, l)
    f = Poly.from_terms(F, [(0, 1), (e, 1)])
    ff = FactoredForm(r, f, decomp)
    rep = full_equivalence(ff, table)
    notes = [note] if note else []
    bp = BinomialParams(r, e, decomp, F)
    try:
        nec = binomial_necessary(bp, table)
    except PreconditionUnmet as exc:
        notes.append(f"binomial theorems not applicable: {exc}")
    else:
        failed = [c.name for c in nec.conditions if not c.holds]
        add_certificate(rep, "thm_pbn", "pbn", not failed, failed or None, role="necessary")
        if l == 3:
            clauses = binomial_l3_clauses(bp)
            failed = [c.name for c in clauses[:5] if not c.holds]
            add_certificate(rep, "thm_pb", "PB", not failed, failed or None, role="disputed")
        if decomp.s % 2 == 0 and (r + e * decomp.s) % l == 0:
            clauses = binomial_residue_clauses(bp, table)
            failed = [c.name for c in clauses if not c.holds]
            add_certificate(rep, "thm_residue", "residue", not failed, failed or None)
    return FindingRecord(format_field(F), l, decomp.s, r, e, format_poly(ff.expanded), rep.is_pp,
                         rep, "; ".join(notes) or None, _field_key(F))


def _binomial_batch(tasks: list[tuple]) -> list[FindingRecord]:
    out = []
    for fargs, l, r, e, note in tasks:
        F = make_field(*fargs)
        try:
            out.append(evaluate_binomial(F, l, r, e, note))
        except CyclopermError as exc:
            out.append(FindingRecord(format_field(F), l, (F.q - 1) // l, r, e, None, None,
                                     note=f"{type(exc).__name__}: {exc}", order=_field_key(F)))
    return out


def sweep_binomials(spec: SweepSpec) -> list[FindingRecord]:
    """Every x^r (x^(es) + 1) in the spec's product space, sorted by (field, l, r, e)."""
    if spec.mode != "binomial":
        raise MalformedInput("sweep_binomials needs mode = binomial")
    tasks, records = _binomial_tasks(spec)
    records += run_partitioned(_binomial_batch, tasks, spec.worker_count)
    return sorted(records, key=FindingRecord.sort_key)


# -- the F_13 trinomials -----------------------------------------------------

def sweep_trinomials_f13() -> list[FindingRecord]:
    """2x^(r+8) + x^(r+4) + 2x^r over F_13 for r = 1..11."""
    out = []
    for r in range(1, 12):
        ff, table = trinomial_factored(r)
        rep = full_equivalence(ff, table)
        lab, lab_rep = thm_lab_check(ff, table)
        failed = [c.name for c in lab_rep.conditions if not c.holds]
        add_certificate(rep, "thm_lab", "lab", lab, failed or None)
        crit = gcd(r, 4) == 1 and (r + 4) % 3 != 0
        add_certificate(rep, "trinomial_criterion", "lab", crit)
        F = ff.field
        out.append(FindingRecord(format_field(F), 3, 4, r, None, format_poly(ff.expanded),
                                 rep.is_pp, rep, None, _field_key(F)))
    return out


# -- random cross-validation -------------------------------------------------

def fields_up_to(bound: int) -> list[FieldSpec]:
    """Every field F_q with 3 <= q <= bound (default moduli)."""
    out = []
    for q in range(3, bound + 1):
        pm = prime_power(q)
        if pm:
            out.append(make_field(*pm))
    return out


def interpolate_branches(F: FieldSpec, l: int, s: int, A: np.ndarray) -> tuple[int, ...]:
    """The f with deg f < l and f(xi^i) = A_i, by the inverse DFT over mu_l.

    Needs p not dividing l, which always holds since l | q - 1.
    """
    table = default_table(F)
    n = F.q - 1
    k = np.arange(l, dtype=np.int64)
    M = table.power_of[(-np.outer(k, k) * s) % n]
    terms = F.vmul(M, A[None, :])
    f = F.vsum_rows(terms.T)
    # the integer l as a field element has code l mod p
    return tuple(int(x) for x in F.vmul(f, F.inv(l % F.p)))


def _random_instance(rng: np.random.Generator, F: FieldSpec, kind: str,
                     l: int | None = None) -> tuple[int, int, tuple[int, ...]]:
    """Draw (l, r, coeffs).

    kind "uniform": f uniform with deg f < l.  "planted": A_i chosen so the
    coset labels form a permutation (a PP by construction).  "collision":
    a planted instance with one label overwritten, so the hypotheses may
    hold while P is not a PP.
    """
    n = F.q - 1
    if l is None:
        l = int(rng.choice(divisors(n)))
    s = n // l
    if kind == "uniform":
        r = int(rng.integers(1, n)) if n > 1 else 1
        return l, r, tuple(int(x) for x in rng.integers(0, F.q, size=l))
    units = [r for r in range(1, n) if gcd(r, s) == 1]
    r = int(rng.choice(units))
    labels = rng.permutation(l)
    if kind == "collision" and l > 1:
        i, j = rng.choice(l, size=2, replace=False)
        labels[i] = labels[j]
    i = np.arange(l, dtype=np.int64)
    ind = ((labels - i * r) % l + l * rng.integers(0, s, size=l)) % n
    A = default_table(F).power_of[ind]
    return l, r, interpolate_branches(F, l, s, A)


def _crossval_batch(tasks: list[tuple]) -> list[tuple[int, VerdictReport]]:
    out = []
    # grouped by field so per-field caches stay warm
    for idx, fargs, l, r, coeffs in sorted(tasks, key=lambda t: (t[1], repr(t[0]))):
        F = make_field(*fargs)
        table = default_table(F)
        ff = FactoredForm(r, Poly(F, coeffs), decompose(F, table, l))
        out.append((idx, full_equivalence(ff, table)))
    return out


def hypotheses_hold(rep: VerdictReport) -> bool:
    return all(rep.holds(n) for n in (GCD_R_S, NONZERO, NNC))


def _summarize(results: list[tuple[Any, VerdictReport]], extra: dict | None = None,
               keep_disputed: int = 20) -> dict:
    """Counts plus every inconsistent report and the first few disputed ones."""
    results = sorted(results, key=lambda t: t[0])
    disputed_by: dict[str, int] = {}
    for _, rep in results:
        for name in rep.disputed:
            key = f"{name} (l {'even' if rep.l % 2 == 0 else 'odd'})"
            disputed_by[key] = disputed_by.get(key, 0) + 1
    summary = {
        "instances": len(results),
        "with_hypotheses": sum(hypotheses_hold(rep) for _, rep in results),
        "permutations": sum(bool(rep.is_pp) for _, rep in results),
        "disagreements": sum(not rep.consistent for _, rep in results),
        "disputed": sum(bool(rep.disputed) for _, rep in results),
        "disputed_by": dict(sorted(disputed_by.items())),
    }
    if extra:
        summary.update(extra)
    summary["records"] = [rep.to_json() for _, rep in results if not rep.consistent]
    summary["disputed_examples"] = [rep.to_json() for _, rep in results if rep.disputed][:keep_disputed]
    return summary


def random_tasks(spec: SweepSpec) -> list[tuple]:
    """The seeded instance stream; a third each of uniform, planted and collision draws."""
    rng = np.random.default_rng(spec.seed)
    pool = spec.field_specs() or fields_up_to(spec.max_field)
    kinds = ("uniform", "planted", "collision")
    tasks = []
    for idx in range(spec.sample_count):
        F = pool[int(rng.integers(len(pool)))]
        l, r, coeffs = _random_instance(rng, F, kinds[idx % 3])
        tasks.append((idx, _field_args(F), l, r, coeffs))
    return tasks


def crossval_random(spec: SweepSpec) -> dict:
    """Seeded random instances through :func:`full_equivalence`.

    ``disagreements`` counts inconsistent reports; ``disputed`` counts
    reports where a printed statement outside its valid range contradicted
    the oracle.  Only those reports are kept under ``records``.
    """
    if spec.mode != "general_crossval":
        raise MalformedInput("crossval_random needs mode = general_crossval")
    tasks = random_tasks(spec)
    results = run_partitioned(_crossval_batch, tasks, spec.worker_count)
    return _summarize(results, {"seed": spec.seed})


# -- exhaustive cross-validation ---------------------------------------------

def _all_branch_values(F: FieldSpec, l: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Every f with deg f < l (rows, codes) and its branch values A."""
    table = default_table(F)
    grids = np.indices((F.q,) * l, dtype=np.int64).reshape(l, -1).T
    n = F.q - 1
    A = np.zeros_like(grids)
    for i in range(l):
        for k in range(l):
            pt = int(table.power_of[(i * k * s) % n])
            A[:, i] = F.vadd(A[:, i], F.vmul(grids[:, k], pt))
    return grids, A


def exhaustive_tasks(F: FieldSpec, l: int) -> tuple[list[tuple], int]:
    """(r, f) pairs meeting the hypotheses, and the size of the full domain.

    The hypotheses (gcd(r, s) = 1, all A_i nonzero, l | 2 Ind(prod A_i))
    are screened in bulk; only survivors go through full_equivalence.
    """
    n = F.q - 1
    s = n // l
    table = default_table(F)
    coeffs, A = _all_branch_values(F, l, s)
    nonzero = (A != 0).all(axis=1)
    ind_sum = np.where(A != 0, table.index_of[A], 0).sum(axis=1)
    keep = nonzero & ((2 * ind_sum) % l == 0)
    rs = [r for r in range(1, n) if gcd(r, s) == 1]
    fargs = _field_args(F)
    tasks = []
    for row in coeffs[keep]:
        c = tuple(int(x) for x in row)
        for r in rs:
            tasks.append(((_field_key(F), l, r, c), fargs, l, r, c))
    return tasks, (n - 1) * F.q ** l


def crossval_exhaustive(max_field: int = 49, cap: int = EXHAUSTIVE_CAP,
                        sample_per_pair: int = 300, seed: int = 0,
                        workers: int = 1) -> dict:
    """Every FactoredForm over every F_q, q <= max_field, where feasible.

    A (q, l) pair whose domain of (r, f) has at most ``cap`` members is
    enumerated in full.  Larger pairs get ``sample_per_pair`` seeded draws
    split between planted and collision instances.
    """
    rng = np.random.default_rng(seed)
    tasks, coverage = [], []
    for F in fields_up_to(max_field):
        for l in divisors(F.q - 1):
            size = (F.q - 2) * F.q ** l
            if size <= cap:
                part, domain = exhaustive_tasks(F, l)
                coverage.append({"field": format_field(F), "l": l, "mode": "exhaustive",
                                 "domain": domain, "evaluated": len(part)})
            else:
                part = []
                for j in range(sample_per_pair):
                    kind = ("planted", "collision")[j % 2]
                    _, r, c = _random_instance(rng, F, kind, l)
                    part.append(((_field_key(F), l, r, c, j), _field_args(F), l, r, c))
                coverage.append({"field": format_field(F), "l": l, "mode": "sampled",
                                 "domain": size, "evaluated": len(part)})
            tasks += part
    results = run_partitioned(_crossval_batch, tasks, workers)
    return _summarize(results, {"coverage": coverage})


# -- persistence -------------------------------------------------------------

def summarize_records(records: Iterable[FindingRecord]) -> dict:
    records = list(records)
    return {
        "summary": True,
        "records": len(records),
        "permutations": sum(bool(r.is_pp) for r in records),
        "inconsistent": sum(not r.consistent for r in records),
        "disputed": sum(bool(r.verdict and r.verdict.disputed) for r in records),
        "skipped": sum(r.verdict is None for r in records),
    }


def write_jsonl(records: Iterable[FindingRecord], fp: IO[str], summary: dict | None = None) -> None:
    """One record per line in fixed key order, then one summary line."""
    records = list(records)
    for rec in records:
        fp.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")
    fp.write(json.dumps(summary if summary is not None else summarize_records(records),
                        ensure_ascii=False) + "\n")


def dumps_jsonl(records: Iterable[FindingRecord], summary: dict | None = None) -> str:
    buf = io.StringIO()
    write_jsonl(records, buf, summary)
    return buf.getvalue()
