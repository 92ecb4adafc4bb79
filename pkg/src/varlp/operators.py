"""Lamperti-form and injection-induced operators, finite matrix truncations, and checkers."""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import EmptyColumn, OutOfDomain, RegimeViolation, SupportOverlap, TruncationBreach
from .sampling import random_disk, random_sparse, trial_rng
from .setiso import RegularSetIso, extend_to_sequence
from .space import (
    DEFAULT_TOL,
    ExponentSequence,
    SparseSequence,
    basis_vector,
    classify_regime,
    luxemburg_norm,
    modular,
)

H_SLACK = 1e-12
MODULAR_THRESHOLD = 1e-9
WITNESS_GAP = 1e-6


# -- Lamperti form ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LampertiOperator:
    """(Sx)_n = h_n (Tx)_n with |h_n| <= 1 and h supported inside T's range."""

    multiplier: SparseSequence
    set_iso: RegularSetIso

    def __post_init__(self):
        for n, v in self.multiplier.items():
            if abs(v) > 1.0 + H_SLACK:
                raise ValueError(f"|h_{n}| = {abs(v)!r} exceeds 1")
        stray = self.multiplier.support - self.set_iso.range()
        if stray:
            raise ValueError(f"multiplier is nonzero off the range of T at {sorted(stray)}")


def apply_lamperti(L: LampertiOperator, x: SparseSequence) -> SparseSequence:
    return L.multiplier * extend_to_sequence(L.set_iso, x)


# -- injections ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Shift:
    offset: int

    def __post_init__(self):
        if self.offset < 1:
            raise ValueError("shift offset must be a positive integer")

    def __call__(self, n: int) -> int:
        return n + self.offset

    def defined_at(self, n: int) -> bool:
        return n >= 1


def _table(pairs) -> dict[int, int]:
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    return {int(k): int(v) for k, v in sorted(items)}


@dataclass(frozen=True)
class Permutation:
    """A bijection of the table's key set onto itself, extended by the identity."""

    table: tuple[tuple[int, int], ...]

    def __init__(self, table: Mapping[int, int] | Iterable[tuple[int, int]]):
        t = _table(table)
        if any(k < 1 for k in t) or set(t) != set(t.values()):
            raise ValueError("permutation table must be a bijection of its keys")
        object.__setattr__(self, "table", tuple(t.items()))

    @functools.cached_property
    def _map(self) -> dict[int, int]:
        return dict(self.table)

    def __call__(self, n: int) -> int:
        return self._map.get(n, n)

    def defined_at(self, n: int) -> bool:
        return n >= 1


@dataclass(frozen=True)
class Table:
    """An injective map given explicitly on a finite domain."""

    table: tuple[tuple[int, int], ...]

    def __init__(self, table: Mapping[int, int] | Iterable[tuple[int, int]]):
        t = _table(table)
        if any(k < 1 or v < 1 for k, v in t.items()):
            raise ValueError("table entries must be positive integers")
        if len(set(t.values())) != len(t):
            raise ValueError("table is not injective")
        object.__setattr__(self, "table", tuple(t.items()))

    @functools.cached_property
    def _map(self) -> dict[int, int]:
        return dict(self.table)

    def __call__(self, n: int) -> int:
        try:
            return self._map[n]
        except KeyError:
            raise OutOfDomain(f"table has no image for {n}") from None

    def defined_at(self, n: int) -> bool:
        return n in self._map


InjectionMap = Union[Shift, Permutation, Table]


def adjacent_transpositions(m: int) -> Permutation:
    """n -> n - (-1)**n on 1..2m, i.e. swaps (1 2)(3 4)...(2m-1 2m)."""
    return Permutation({n: n - (-1) ** n for n in range(1, 2 * m + 1)})


def apply_injection(theta: InjectionMap, x: SparseSequence) -> SparseSequence:
    """S_theta e_n = e_theta(n), extended linearly."""
    return SparseSequence({theta(n): v for n, v in x.items()})


# -- finite truncations ----------------------------------------------------------------------


class MatrixOperator:
    """A linear map given by its columns S e_k for k in the (finite) domain.

    Row indices are bounded by ``dimension``; inputs must be supported on the
    column keys.
    """

    __slots__ = ("dimension", "_columns")

    def __init__(self, dimension: int, columns: Mapping[int, SparseSequence]):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        cols = {}
        for k, col in sorted(columns.items()):
            if not 1 <= k <= dimension:
                raise TruncationBreach(f"column {k} outside 1..{dimension}")
            if col.max_index() > dimension:
                raise TruncationBreach(f"column {k} reaches row {col.max_index()} > {dimension}")
            cols[int(k)] = col
        self.dimension = dimension
        self._columns = cols

    @property
    def columns(self) -> Mapping[int, SparseSequence]:
        return self._columns

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(self._columns)

    def column(self, k: int) -> SparseSequence:
        try:
            return self._columns[k]
        except KeyError:
            raise OutOfDomain(f"no column {k}") from None

    def apply(self, x: SparseSequence) -> SparseSequence:
        out: dict[int, complex] = {}
        for k, xk in x.items():
            for n, s in self.column(k).items():
                out[n] = out[n] + xk * s if n in out else xk * s
        return SparseSequence(out)

    __call__ = apply

    def __matmul__(self, other: "MatrixOperator") -> "MatrixOperator":
        dim = max(self.dimension, other.dimension)
        return MatrixOperator(dim, {k: self.apply(col) for k, col in other.columns.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixOperator):
            return NotImplemented
        return self.dimension == other.dimension and self._columns == other._columns

    def __repr__(self) -> str:
        return f"MatrixOperator({self.dimension}, {dict(self._columns)!r})"


def _checked_columns(columns: dict[int, SparseSequence], N: int) -> MatrixOperator:
    for k, col in columns.items():
        if col.max_index() > N:
            raise TruncationBreach(f"image of e_{k} reaches index {col.max_index()} > {N}")
    return MatrixOperator(N, columns)


def lamperti_to_matrix(L: LampertiOperator, N: int, n_columns: int | None = None) -> MatrixOperator:
    n_columns = min(L.set_iso.domain_bound, N) if n_columns is None else n_columns
    return _checked_columns({k: apply_lamperti(L, basis_vector(k)) for k in range(1, n_columns + 1)}, N)


def injection_to_matrix(theta: InjectionMap, N: int, n_columns: int | None = None) -> MatrixOperator:
    n_columns = N if n_columns is None else n_columns
    cols = {}
    for k in range(1, n_columns + 1):
        if not theta.defined_at(k):
            raise OutOfDomain(f"injection undefined at {k}")
        cols[k] = basis_vector(theta(k))
    return _checked_columns(cols, N)


# -- isomodularity ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    ISOMODULAR = "isomodular"
    NOT_ISOMODULAR = "not_isomodular"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ColumnReport:
    k: int
    support: tuple[int, ...]
    exponent_match: bool
    column_modular: float
    overlaps: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return bool(self.support) and self.exponent_match and not self.overlaps


@dataclass(frozen=True)
class IsomodularCertificate:
    verdict: Verdict
    witness: SparseSequence | None
    detail: tuple[ColumnReport, ...]
    witness_modulars: tuple[float, float] | None = None


def modular_mismatch(M: MatrixOperator, p: ExponentSequence, x: SparseSequence) -> float:
    """|rho(Mx) - rho(x)| relative to max(1, rho(x))."""
    rx = modular(x, p)
    return abs(modular(M.apply(x), p) - rx) / max(1.0, rx)


def column_reports(M: MatrixOperator, p: ExponentSequence, column_tol: float = 1e-12) -> tuple[ColumnReport, ...]:
    owner: dict[int, list[int]] = {}
    for k, col in M.columns.items():
        for n in col:
            owner.setdefault(n, []).append(k)
    reports = []
    for k, col in M.columns.items():
        pk = p(k)
        overlaps = sorted({j for n in col for j in owner[n] if j != k})
        reports.append(
            ColumnReport(
                k=k,
                support=tuple(col),
                exponent_match=all(p(n) == pk for n in col),
                column_modular=math.fsum(abs(v) ** pk for _, v in col.items()),
                overlaps=tuple(overlaps),
            )
        )
    return tuple(reports)


def _structural_ok(reports: tuple[ColumnReport, ...], column_tol: float) -> bool:
    return all(r.ok and abs(r.column_modular - 1.0) <= column_tol for r in reports)


def _directed_candidates(M: MatrixOperator, reports, column_tol: float):
    for r in reports:
        if r.ok and abs(r.column_modular - 1.0) <= column_tol:
            continue
        e = basis_vector(r.k)
        for t in (2.0, 0.5, 3.0, 1.0):
            yield t * e
        for j in r.overlaps:
            f = basis_vector(j)
            for c in (1, -1, 1j, -1j):
                yield e + c * f
                yield 2 * (e + c * f)


def random_probes(M: MatrixOperator, count: int, seed: int, label: str = "probe"):
    """Scaled basis vectors, random two-term combinations, then random sparse vectors."""
    dom = M.domain
    if not dom:
        return
    for k in dom:
        yield 2.0 * basis_vector(k)
    for t in range(count):
        rng = trial_rng(seed, label, t)
        if t % 2 == 0 and len(dom) >= 2:
            j, k = rng.sample(dom, 2)
            yield SparseSequence({j: random_disk(rng), k: random_disk(rng)})
        else:
            yield random_sparse(rng, dom)


def check_isomodular_structural(
    M: MatrixOperator,
    p: ExponentSequence,
    *,
    probes: int = 200,
    seed: int = 0,
    column_tol: float = 1e-12,
    threshold: float = MODULAR_THRESHOLD,
) -> IsomodularCertificate:
    """Certify rho(Mx) = rho(x) from column structure, or look for a witness against it.

    Isomodular when column supports are pairwise disjoint, p is constant on
    each support and equal to p_k there, and every column has unit modular.
    """
    reports = column_reports(M, p, column_tol)
    if _structural_ok(reports, column_tol):
        return IsomodularCertificate(Verdict.ISOMODULAR, None, reports)
    candidates = itertools.chain(_directed_candidates(M, reports, column_tol), random_probes(M, probes, seed))
    for w in candidates:
        if modular_mismatch(M, p, w) > threshold:
            return IsomodularCertificate(
                Verdict.NOT_ISOMODULAR, w, reports, (modular(w, p), modular(M.apply(w), p))
            )
    return IsomodularCertificate(Verdict.INCONCLUSIVE, None, reports)


# -- isometry --------------------------------------------------------------------------------


@functools.lru_cache(maxsize=1 << 16)
def _norm_cached(x: SparseSequence, p: ExponentSequence, tol: float) -> float:
    return luxemburg_norm(x, p, tol).value


@dataclass(frozen=True)
class IsometryCheck:
    passed: bool
    probes: int
    witness: SparseSequence | None = None
    norm_x: float | None = None
    norm_image: float | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def balanced_pair(p: ExponentSequence, j: int, k: int, w: float = 0.5) -> SparseSequence:
    """w**(1/p_j) e_j + (1-w)**(1/p_k) e_k, a vector of modular and norm exactly one."""
    return SparseSequence({j: w ** (1.0 / p(j)), k: (1.0 - w) ** (1.0 / p(k))})


def isometry_probes(M: MatrixOperator, p: ExponentSequence, trials: int, seed: int, max_pairs: int = 256):
    dom = M.domain
    for k in dom:
        yield basis_vector(k)
    pairs = list(itertools.combinations(dom, 2))
    if len(pairs) > max_pairs:
        pairs = trial_rng(seed, "pairs", 0).sample(pairs, max_pairs)
    for j, k in pairs:
        yield balanced_pair(p, j, k)
    if dom:
        for t in range(trials):
            yield random_sparse(trial_rng(seed, "isometry", t), dom)


def check_isometry_randomized(
    M: MatrixOperator,
    p: ExponentSequence,
    trials: int = 32,
    tol: float = 1e-9,
    *,
    seed: int = 0,
    max_pairs: int = 256,
    norm_tol: float = DEFAULT_TOL,
) -> IsometryCheck:
    """Compare ||Mx|| with ||x|| on basis vectors, balanced pairs and random vectors.

    A pass is evidence, not proof.
    """
    if trials < 1 or tol <= 0:
        raise ValueError("need trials >= 1 and tol > 0")
    count = 0
    for x in isometry_probes(M, p, trials, seed, max_pairs):
        count += 1
        nx = _norm_cached(x, p, norm_tol)
        nm = _norm_cached(M.apply(x), p, norm_tol)
        if abs(nm - nx) > tol:
            return IsometryCheck(False, count, x, nx, nm)
    return IsometryCheck(True, count)


# -- structure recovery ----------------------------------------------------------------------


def recover_structure(M: MatrixOperator, p: ExponentSequence) -> tuple[RegularSetIso, SparseSequence]:
    """Read off T{k} = support(S e_k) and h = sum of the columns."""
    if not classify_regime(p).restricted:
        raise RegimeViolation("structure recovery needs all exponents in [1,2) or all in (2,inf)")
    images = []
    h: dict[int, complex] = {}
    owner: dict[int, int] = {}
    for k in range(1, max(M.domain, default=0) + 1):
        col = M.columns.get(k)
        if not col:
            raise EmptyColumn(f"column {k} is zero or missing")
        for n, v in col.items():
            if n in owner:
                raise SupportOverlap(f"columns {owner[n]} and {k} share row {n}")
            owner[n] = k
            h[n] = v
        images.append(col.support)
    return RegularSetIso(images), SparseSequence(h)


# -- injection isometry decision --------------------------------------------------------------


@dataclass(frozen=True)
class ThetaDecision:
    isometric: bool
    index: int | None = None
    witness: SparseSequence | None = None
    witness_norm: float | None = None
    image_norm: float | None = None

    @property
    def verdict(self) -> str:
        return "isometric" if self.isometric else "not_isometric"

    @property
    def gap(self) -> float | None:
        if self.image_norm is None:
            return None
        return abs(self.image_norm - self.witness_norm)


_WEIGHTS = (0.5, 0.25, 0.75, 0.1, 0.9, 0.4, 0.6)


def _witness_candidates(theta: InjectionMap, p: ExponentSequence, j: int, N: int):
    partners = []
    if theta.defined_at(theta(j)):
        partners.append(theta(j))
    partners += [i for i in range(1, N + 1) if i != j and i not in partners]
    for i in partners:
        for w in _WEIGHTS:
            yield balanced_pair(p, j, i, w)


def confirm_witness(
    theta: InjectionMap, p: ExponentSequence, j: int, N: int, tol: float = DEFAULT_TOL
) -> tuple[SparseSequence, float, float] | None:
    """First two-term unit vector through e_j whose image norm differs from 1 by more than WITNESS_GAP.

    The first candidate is 2^(-1/p_j) e_j + 2^(-1/p_theta(j)) e_theta(j); the
    weighted variants cover exponent triples where that vector's image still
    has norm one.
    """
    for b in _witness_candidates(theta, p, j, N):
        nb = luxemburg_norm(b, p, tol).value
        nsb = luxemburg_norm(apply_injection(theta, b), p, tol).value
        if abs(nsb - nb) > WITNESS_GAP:
            return b, nb, nsb
    return None


def theta_isometry_decision(
    theta: InjectionMap, p: ExponentSequence, N: int, *, confirm: bool = True
) -> ThetaDecision:
    """S_theta is isometric iff p_n == p_theta(n) exactly; checked for n <= N."""
    for n in range(1, N + 1):
        if not theta.defined_at(n):
            raise OutOfDomain(f"injection undefined at {n}")
    for j in range(1, N + 1):
        if p(j) != p(theta(j)):
            if not confirm:
                return ThetaDecision(False, j)
            found = confirm_witness(theta, p, j, N)
            if found is None:
                return ThetaDecision(False, j)
            b, nb, nsb = found
            return ThetaDecision(False, j, b, nb, nsb)
    return ThetaDecision(True)


def shift_is_isometric(k: int, p: ExponentSequence) -> bool:
    """Exact answer over all of N: p_n == p_{n+k} for every n, i.e. the minimal period divides k."""
    period = p.minimal_period()
    return period is not None and k % period == 0
