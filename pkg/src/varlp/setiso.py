"""Regular set isomorphisms of the positive integers, stored as disjoint image families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DisjointnessViolation, EmptyImage, OutOfDomain
from .space import SparseSequence


@dataclass(frozen=True)
class BoundedImageCertificate:
    max_image_size: int


class RegularSetIso:
    """T given by its values on singletons: T{k} = images[k - 1] for k <= domain_bound.

    Images are finite, nonempty and pairwise disjoint; T need not be onto.
    """

    __slots__ = ("_images", "_owner")

    def __init__(self, images: Sequence[Iterable[int]]):
        frozen = []
        owner: dict[int, int] = {}
        for k, image in enumerate(images, start=1):
            s = frozenset(int(n) for n in image)
            if not s:
                raise EmptyImage(f"T{{{k}}} is empty")
            bad = [n for n in s if n < 1]
            if bad:
                raise ValueError(f"T{{{k}}} contains non-positive indices {sorted(bad)}")
            for n in s:
                if n in owner:
                    raise DisjointnessViolation(f"T{{{owner[n]}}} and T{{{k}}} share index {n}")
                owner[n] = k
            frozen.append(s)
        self._images = tuple(frozen)
        self._owner = owner

    @classmethod
    def identity(cls, n: int) -> "RegularSetIso":
        return cls([{k} for k in range(1, n + 1)])

    @property
    def images(self) -> tuple[frozenset[int], ...]:
        return self._images

    @property
    def domain_bound(self) -> int:
        return len(self._images)

    def image(self, k: int) -> frozenset[int]:
        if not 1 <= k <= self.domain_bound:
            raise OutOfDomain(f"{k} is outside 1..{self.domain_bound}")
        return self._images[k - 1]

    def preimage(self, n: int) -> int | None:
        """The k with n in T{k}, if any."""
        return self._owner.get(n)

    def range(self) -> frozenset[int]:
        return frozenset(self._owner)

    def certificate(self) -> BoundedImageCertificate:
        return BoundedImageCertificate(max((len(s) for s in self._images), default=0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RegularSetIso):
            return NotImplemented
        return self._images == other._images

    def __hash__(self) -> int:
        return hash(self._images)

    def __repr__(self) -> str:
        return f"RegularSetIso({[sorted(s) for s in self._images]!r})"


def from_family(sets: Sequence[Iterable[int]]) -> RegularSetIso:
    return RegularSetIso(sets)


def apply_to_set(T: RegularSetIso, A: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for k in A:
        out |= T.image(k)
    return frozenset(out)


def extend_to_sequence(T: RegularSetIso, a: SparseSequence) -> SparseSequence:
    """(Ta)_n = a_k for n in T{k}, zero elsewhere."""
    out: dict[int, complex] = {}
    for k, v in a.items():
        for n in T.image(k):
            out[n] = v
    return SparseSequence(out)


def sup_norm_contraction_check(T: RegularSetIso, a: SparseSequence, b: SparseSequence) -> bool:
    d = a - b
    return extend_to_sequence(T, d).sup_norm() <= d.sup_norm()
