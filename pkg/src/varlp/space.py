"""Exponent sequences, sparse complex sequences, the modular and the Luxemburg norm."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from .errors import InvalidExponent, ModularOverflow, NonConvergence

P_MAX = 700.0
DEFAULT_TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class Constant:
    value: float

    def values(self) -> tuple[float, ...]:
        return (self.value,)


@dataclass(frozen=True)
class Periodic:
    pattern: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(float(v) for v in self.pattern))
        if not self.pattern:
            raise InvalidExponent("periodic tail needs a nonempty pattern")

    def values(self) -> tuple[float, ...]:
        return self.pattern


Tail = Union[Constant, Periodic]


class Regime(enum.Enum):
    ALL_BELOW_TWO = "all_below_two"
    ALL_ABOVE_TWO = "all_above_two"
    MIXED = "mixed"

    @property
    def restricted(self) -> bool:
        return self is not Regime.MIXED


def _check_exponent(v: float) -> float:
    v = float(v)
    if not math.isfinite(v) or v < 1.0:
        raise InvalidExponent(f"exponent values must be finite and >= 1, got {v!r}")
    return v


@dataclass(frozen=True)
class ExponentSequence:
    """The sequence (p_n), n >= 1, given as an explicit prefix followed by a tail rule.

    >>> p = ExponentSequence((1, 2), Periodic((1, 2)))
    >>> p(5)
    1.0
    """

    prefix: tuple[float, ...]
    tail: Tail

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(_check_exponent(v) for v in self.prefix))
        if isinstance(self.tail, Constant):
            object.__setattr__(self, "tail", Constant(_check_exponent(self.tail.value)))
        elif isinstance(self.tail, Periodic):
            for v in self.tail.pattern:
                _check_exponent(v)
        else:
            raise TypeError(f"unsupported tail {self.tail!r}")

    @classmethod
    def constant(cls, value: float) -> "ExponentSequence":
        return cls((), Constant(value))

    @classmethod
    def periodic(cls, pattern: Iterable[float], prefix: Iterable[float] = ()) -> "ExponentSequence":
        return cls(tuple(prefix), Periodic(tuple(pattern)))

    def __call__(self, n: int) -> float:
        return exponent_at(self, n)

    def values(self) -> frozenset[float]:
        """Every value the sequence attains."""
        return frozenset(self.prefix) | frozenset(self.tail.values())

    @property
    def period_length(self) -> int:
        return 1 if isinstance(self.tail, Constant) else len(self.tail.pattern)

    def decisive_length(self) -> int:
        """Indices 1..decisive_length() cover the prefix and one full tail period."""
        return len(self.prefix) + self.period_length

    def is_constant(self) -> bool:
        return len(self.values()) == 1

    def minimal_period(self) -> int | None:
        """Least d with p_n = p_{n+d} for every n >= 1, or None if the sequence is not periodic."""
        horizon = self.decisive_length()
        for d in range(1, horizon + 1):
            if all(self(n) == self(n + d) for n in range(1, horizon + 1)):
                return d
        return None

    def regime(self) -> Regime:
        return classify_regime(self)


def exponent_at(p: ExponentSequence, n: int) -> float:
    if n < 1:
        raise IndexError(f"sequence indices start at 1, got {n}")
    if n <= len(p.prefix):
        return p.prefix[n - 1]
    if isinstance(p.tail, Constant):
        return p.tail.value
    pattern = p.tail.pattern
    return pattern[(n - len(p.prefix) - 1) % len(pattern)]


def classify_regime(p: ExponentSequence) -> Regime:
    vals = p.values()
    if all(v < 2.0 for v in vals):
        return Regime.ALL_BELOW_TWO
    if all(v > 2.0 for v in vals):
        return Regime.ALL_ABOVE_TWO
    return Regime.MIXED


def _to_complex(value) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"sequence entries must be finite, got {value!r}")
    return z


class SparseSequence:
    """A finitely supported complex sequence indexed from 1.

    Zero entries are never stored, so two sequences are equal exactly when
    their stored entries are equal. Instances are immutable.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, complex] | Iterable[tuple[int, complex]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        store: dict[int, complex] = {}
        for n, v in items:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise IndexError(f"sequence indices must be positive integers, got {n!r}")
            z = _to_complex(v)
            if z != 0:
                store[int(n)] = z
        self._entries = MappingProxyType(dict(sorted(store.items())))
        self._hash = None

    @classmethod
    def zero(cls) -> "SparseSequence":
        return cls()

    @property
    def entries(self) -> Mapping[int, complex]:
        return self._entries

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._entries)

    def items(self):
        """(index, value) pairs in ascending index order."""
        return self._entries.items()

    def __getitem__(self, n: int) -> complex:
        return self._entries.get(n, 0j)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseSequence):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"SparseSequence({dict(self._entries)!r})"

    def __add__(self, other: "SparseSequence") -> "SparseSequence":
        if not isinstance(other, SparseSequence):
            return NotImplemented
        out = dict(self._entries)
        for n, v in other.items():
            out[n] = out[n] + v if n in out else v
        return SparseSequence(out)

    def __neg__(self) -> "SparseSequence":
        return SparseSequence({n: -v for n, v in self.items()})

    def __sub__(self, other: "SparseSequence") -> "SparseSequence":
        if not isinstance(other, SparseSequence):
            return NotImplemented
        out = dict(self._entries)
        for n, v in other.items():
            out[n] = out[n] - v if n in out else -v
        return SparseSequence(out)

    def __mul__(self, c) -> "SparseSequence":
        if isinstance(c, SparseSequence):
            # pointwise product
            return SparseSequence({n: v * c[n] for n, v in self.items() if n in c._entries})
        c = complex(c)
        return SparseSequence({n: c * v for n, v in self.items()})

    __rmul__ = __mul__

    def __truediv__(self, c) -> "SparseSequence":
        c = complex(c)
        return SparseSequence({n: v / c for n, v in self.items()})

    def sup_norm(self) -> float:
        return max((abs(v) for v in self._entries.values()), default=0.0)

    def max_index(self) -> int:
        return max(self._entries, default=0)


def basis_vector(k: int) -> SparseSequence:
    if k < 1:
        raise IndexError(f"basis index must be >= 1, got {k}")
    return SparseSequence({k: 1})


def _exponents_for(a: SparseSequence, p: ExponentSequence, p_max: float) -> list[tuple[float, float]]:
    pairs = []
    for n, v in a.items():
        pn = p(n)
        if pn > p_max:
            raise ModularOverflow(f"exponent p_{n} = {pn} exceeds cap {p_max}")
        pairs.append((abs(v), pn))
    return pairs


def _power(x: float, e: float) -> float:
    try:
        r = x**e
    except OverflowError:
        raise ModularOverflow(f"{x!r}**{e!r} overflows") from None
    if math.isinf(r):
        raise ModularOverflow(f"{x!r}**{e!r} overflows")
    return r


def modular(a: SparseSequence, p: ExponentSequence, *, p_max: float = P_MAX) -> float:
    """Sum of |a_n|**p_n over the support, accumulated in ascending index order."""
    return math.fsum(_power(m, e) for m, e in _exponents_for(a, p, p_max))


@dataclass(frozen=True)
class NormResult:
    value: float
    residual: float
    iterations: int

    def __float__(self) -> float:
        return self.value


def _log_modular(terms: list[tuple[float, float]], s: float) -> tuple[float, float]:
    """log rho(a / e**s) and minus its derivative in s (a weighted mean of the exponents)."""
    z = [e * (lm - s) for lm, e in terms]
    zmax = max(z)
    w = [math.exp(zi - zmax) for zi in z]
    total = math.fsum(w)
    slope = math.fsum(wi * e for wi, (_, e) in zip(w, terms)) / total
    return zmax + math.log(total), slope


def _residual(pairs: list[tuple[float, float]], lam: float) -> float:
    return math.fsum(_power(m / lam, e) for m, e in pairs) - 1.0


def luxemburg_norm(
    a: SparseSequence,
    p: ExponentSequence,
    tol: float = DEFAULT_TOL,
    *,
    max_iter: int = MAX_ITER,
    p_max: float = P_MAX,
) -> NormResult:
    """Solve rho(a / lam) = 1 for lam > 0.

    The root is bracketed by [max|a_n|, K * max|a_n|] (K = support size), then
    located with Newton steps on log rho(a / e**s), which is convex and
    decreasing in s, so steps taken from the left never overshoot. Any step
    leaving the bracket is replaced by bisection.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not a:
        return NormResult(0.0, 0.0, 0)
    pairs = _exponents_for(a, p, p_max)
    biggest = max(m for m, _ in pairs)
    if len(pairs) == 1:
        return NormResult(biggest, _residual(pairs, biggest), 0)

    terms = [(math.log(m), e) for m, e in pairs]
    s_lo = math.log(biggest)
    g_lo, slope = _log_modular(terms, s_lo)
    s_hi = s_lo + math.log(len(pairs))
    g_hi, _ = _log_modular(terms, s_hi)
    while g_hi > 0:
        # rounding only; widen until the sign is right
        s_hi += math.log(2.0)
        g_hi, _ = _log_modular(terms, s_hi)

    s, g = s_lo, g_lo
    iterations = 0
    while g != 0.0 and iterations < max_iter:
        iterations += 1
        assert g_lo >= 0.0 >= g_hi, "root bracket lost its sign change"
        step = g / slope
        if abs(step) <= 2 * math.ulp(max(abs(s), 1.0)):
            break
        s_new = s + step
        if not (s_lo < s_new < s_hi):
            s_new = 0.5 * (s_lo + s_hi)
        if s_new == s or s_hi - s_lo <= 4 * math.ulp(max(abs(s_lo), abs(s_hi), 1.0)):
            break
        s = s_new
        g, slope = _log_modular(terms, s)
        if g >= 0.0:
            s_lo, g_lo = s, g
        else:
            s_hi, g_hi = s, g

    lam = math.exp(s)
    residual = _residual(pairs, lam)
    if abs(residual) > tol:
        raise NonConvergence(
            f"norm solver stopped after {iterations} iterations with residual {residual:.3e} > {tol:.1e}"
        )
    return NormResult(lam, residual, iterations)


def norm(a: SparseSequence, p: ExponentSequence, tol: float = DEFAULT_TOL) -> float:
    return luxemburg_norm(a, p, tol).value


def norm_constant_p_oracle(a: SparseSequence, p_value: float) -> float:
    """Closed form ||a|| = rho(a)**(1/p) valid for a constant exponent."""
    p_value = _check_exponent(p_value)
    return math.fsum(_power(abs(v), p_value) for _, v in a.items()) ** (1.0 / p_value)
