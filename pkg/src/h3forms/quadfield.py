"""Exact arithmetic in the ring of integers of the nine class-number-one
imaginary quadratic fields Q(sqrt(D)).

Elements are stored in the integral basis (1, w) where

    w = sqrt(D)        if d_K = 4D   (D = -1, -2)
    w = (1+sqrt(D))/2  if d_K = D    (D = -3, -7, -11, -19, -43, -67, -163)

All norms, products, conjugates and divisibility tests are exact integer
arithmetic; the complex embedding (with Im sqrt(D) > 0) is the only float
surface.  Lattice enumeration orders elements by (norm, a, b) so that every
downstream sweep is byte-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidArgumentError, UnsupportedFieldError

CLASS_NUMBER_ONE_D = (-1, -2, -3, -7, -11, -19, -43, -67, -163)


@dataclass(frozen=True)
class Field:
    """An imaginary quadratic field of class number one."""

    D: int
    d_K: int
    unit_count: int
    half_basis: bool  # True when w = (1+sqrt(D))/2

    @property
    def sqrt_abs_disc(self) -> float:
        return math.sqrt(abs(self.d_K))

    def omega_complex(self) -> complex:
        root = 1j * math.sqrt(abs(self.D))
        return (1 + root) / 2 if self.half_basis else root

    def element(self, a: int, b: int) -> "RingElement":
        return RingElement(int(a), int(b), self)

    def one(self) -> "RingElement":
        return RingElement(1, 0, self)

    def units(self) -> tuple["RingElement", ...]:
        return _units(self)

    def __repr__(self) -> str:
        return f"Field(Q(sqrt({self.D})))"


def make_field(D: int) -> Field:
    """Build the field record for D, rejecting anything outside the nine."""
    if D not in CLASS_NUMBER_ONE_D:
        raise UnsupportedFieldError(
            f"D={D} is not one of the nine class-number-one imaginary "
            f"quadratic discriminants {CLASS_NUMBER_ONE_D}"
        )
    half = D % 4 == 1  # e.g. -3 % 4 == 1 in Python
    d_K = D if half else 4 * D
    if D == -1:
        w = 4
    elif D == -3:
        w = 6
    else:
        w = 2
    return Field(D=D, d_K=d_K, unit_count=w, half_basis=half)


@dataclass(frozen=True)
class RingElement:
    """a + b*w in the integral basis of its field."""

    a: int
    b: int
    field: Field

    def norm(self) -> int:
        a, b, D = self.a, self.b, self.field.D
        if self.field.half_basis:
            # N(a + b(1+sqrt(D))/2) = a^2 + a b + b^2 (1-D)/4
            return a * a + a * b + b * b * ((1 - D) // 4)
        return a * a - D * b * b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __mul__(self, other: "RingElement") -> "RingElement":
        if self.field != other.field:
            raise InvalidArgumentError("elements from different fields")
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        D = self.field.D
        if self.field.half_basis:
            # w^2 = w + (D-1)/4
            m = (D - 1) // 4
            a = a1 * a2 + b1 * b2 * m
            b = a1 * b2 + a2 * b1 + b1 * b2
        else:
            a = a1 * a2 + D * b1 * b2
            b = a1 * b2 + a2 * b1
        return RingElement(a, b, self.field)

    def __neg__(self) -> "RingElement":
        return RingElement(-self.a, -self.b, self.field)

    def conj(self) -> "RingElement":
        # conj(w) = -w for w = sqrt(D); conj(w) = 1 - w for the half basis
        if self.field.half_basis:
            return RingElement(self.a + self.b, -self.b, self.field)
        return RingElement(self.a, -self.b, self.field)

    def divides(self, other: "RingElement") -> bool:
        return self.exact_divide(other) is not None

    def exact_divide(self, numerator: "RingElement"):
        """Return numerator / self when it lies in the ring, else None."""
        if self.is_zero():
            raise InvalidArgumentError("division by zero element")
        n = self.norm()
        q = numerator * self.conj()  # = numerator * n / self
        if q.a % n or q.b % n:
            return None
        return RingElement(q.a // n, q.b // n, self.field)

    def embed(self) -> complex:
        return self.a + self.b * self.field.omega_complex()

    def abs_value(self) -> float:
        return math.sqrt(self.norm())

    def _embedding_key(self):
        # exact lexicographic order by (Re, Im) of the embedding:
        # Re is proportional to 2a+b (half basis) or a, Im to b
        if self.field.half_basis:
            return (2 * self.a + self.b, self.b)
        return (self.a, self.b)

    def __repr__(self) -> str:
        return f"({self.a}{self.b:+d}w | D={self.field.D})"


@lru_cache(maxsize=None)
def _units(field: Field) -> tuple[RingElement, ...]:
    units = []
    for a in range(-1, 2):
        for b in range(-1, 2):
            e = RingElement(a, b, field)
            if not e.is_zero() and e.norm() == 1:
                units.append(e)
    units.sort(key=lambda e: (e.a, e.b))
    assert len(units) == field.unit_count
    return tuple(units)


def unit_class_representative(x: RingElement) -> RingElement:
    """Canonical associate: the one maximal under the embedding order."""
    return max((u * x for u in _units(x.field)), key=RingElement._embedding_key)


@dataclass(frozen=True)
class LatticePointSet:
    """All nonzero ring elements of norm <= norm_bound, sorted."""

    elements: tuple[RingElement, ...]
    norm_bound: int

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def to_csv_rows(self):
        yield "a,b,norm"
        for e in self.elements:
            yield f"{e.a},{e.b},{e.norm()}"


def enumerate_by_norm(field: Field, X: int) -> LatticePointSet:
    """Every nonzero w with N(w) <= X, each once, ordered by (norm, a, b)."""
    if X < 0:
        raise InvalidArgumentError("norm bound must be >= 0")
    elems = []
    absD = abs(field.D)
    if X > 0:
        if field.half_basis:
            bmax = int(math.isqrt((4 * X) // absD)) + 1
            for b in range(-bmax, bmax + 1):
                # (a + b/2)^2 <= X  =>  |2a + b| <= 2 sqrt(X)
                lim = int(2 * math.isqrt(X)) + 2
                amin = (-lim - b) // 2 - 1
                amax = (lim - b) // 2 + 1
                for a in range(amin, amax + 1):
                    e = RingElement(a, b, field)
                    if not e.is_zero() and e.norm() <= X:
                        elems.append(e)
        else:
            amax = int(math.isqrt(X))
            bmax = int(math.isqrt(X // absD)) + 1
            for b in range(-bmax, bmax + 1):
                for a in range(-amax, amax + 1):
                    e = RingElement(a, b, field)
                    if not e.is_zero() and e.norm() <= X:
                        elems.append(e)
    elems.sort(key=lambda e: (e.norm(), e.a, e.b))
    return LatticePointSet(elements=tuple(elems), norm_bound=X)


def elements_of_norm(field: Field, n: int) -> tuple[RingElement, ...]:
    """All ring elements of exact norm n (empty when n is not represented)."""
    if n < 0:
        return ()
    if n == 0:
        return (RingElement(0, 0, field),)
    return tuple(e for e in enumerate_by_norm(field, n) if e.norm() == n)


def divisors_up_to_units(w: RingElement) -> list[RingElement]:
    """One canonical representative per unit class of divisors of w.

    Trial division: candidate divisors are the lattice points whose norm
    divides N(w); each candidate is checked by exact division in the ring.
    """
    if w.is_zero():
        raise InvalidArgumentError("divisors of zero are not defined")
    n = w.norm()
    seen = set()
    out = []
    for m in range(1, n + 1):
        if n % m:
            continue
        for d in elements_of_norm(w.field, m):
            if not d.divides(w):
                continue
            rep = unit_class_representative(d)
            key = (rep.a, rep.b)
            if key not in seen:
                seen.add(key)
                out.append(rep)
    out.sort(key=lambda e: (e.norm(), e.a, e.b))
    return out


def sigma_s(w: RingElement, s: complex) -> complex:
    """Generalized divisor function: sum of N(d)^s over divisor classes of w.

    Equals (1/|O_K^*|) * sum over all divisors d of |d|^{2s}, since each unit
    class contributes |O_K^*| associates of equal norm.
    """
    if w.is_zero():
        raise InvalidArgumentError("sigma_s of zero is not defined")
    total = 0j
    for d in divisors_up_to_units(w):
        total += complex(d.norm()) ** complex(s)
    return total


def sigma0_by_norm(field: Field, X: int):
    """Array S with S[n] = sum over elements of norm exactly n of sigma_0.

    Computed with the hyperbola method: the number of (divisor, cofactor)
    pairs with N(d q) = n equals |O_K^*| * sum_{N(w)=n} sigma_0(w).
    """
    import numpy as np

    if X < 1:
        raise InvalidArgumentError("X must be >= 1")
    r = np.zeros(X + 1, dtype=np.int64)
    for e in enumerate_by_norm(field, X):
        r[e.norm()] += 1
    shell = np.zeros(X + 1, dtype=np.int64)
    # sum_{nm = k} r[n] r[m] accumulated over n <= sqrt(k), doubled off-diagonal
    for n in range(1, int(math.isqrt(X)) + 1):
        if r[n] == 0:
            continue
        for m in range(n, X // n + 1):
            if r[m] == 0:
                continue
            k = n * m
            shell[k] += r[n] * r[m] if m == n else 2 * r[n] * r[m]
    w = field.unit_count
    assert (shell % w == 0).all()
    return shell // w


def divisor_sum_scan(field: Field, X_max: int, checkpoints=None):
    """Partial sums of sigma_0 over 0 < N(w) <= X for each checkpoint X.

    Returns a list of (X, cumulative_sum) pairs, monotone nondecreasing.
    """
    if X_max < 1:
        raise InvalidArgumentError("X_max must be >= 1")
    shell = sigma0_by_norm(field, X_max)
    cum = shell.cumsum()
    if checkpoints is None:
        checkpoints = range(1, X_max + 1)
    out = []
    for X in checkpoints:
        if not 1 <= X <= X_max:
            raise InvalidArgumentError("checkpoint outside [1, X_max]")
        out.append((int(X), int(cum[X])))
    return out
