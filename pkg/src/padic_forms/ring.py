"""Exact arithmetic in O / 2^K O, where O = Z2[w] and w^2 = w + 1.

O is the ring of integers of the unramified quadratic extension of the
2-adic field; 2 stays prime and the residue field has four elements
{0, 1, w, 1+w}.  An element is a pair (a, b) meaning a + b*w with both
components reduced modulo 2^K.  The only precision that ever matters is
the power of 2, so valuations, digit expansions and Hensel lifting are
all plain bit manipulation on the two components.

Everything in this module is immutable and safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import (
    DegreeShapeError,
    HenselError,
    NotADthPower,
    NotAUnit,
    PrecisionMismatch,
)

INFINITE = math.inf  # valuation sentinel: means ">= K", a lower bound only


def v2(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    assert n != 0
    return (n & -n).bit_length() - 1


# ---------------------------------------------------------------------------
# residue field


class F4:
    """Residue-field element, coded in two bits: bit 0 is the coefficient
    of 1, bit 1 the coefficient of w.  Addition is xor; the three nonzero
    elements form a cyclic group of order three under multiplication."""

    __slots__ = ("code",)

    _MUL = ((0, 0, 0, 0), (0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2))
    _NAMES = ("0", "1", "w", "1+w")

    def __init__(self, code: int):
        assert 0 <= code < 4
        object.__setattr__(self, "code", code)

    def __setattr__(self, *_):
        raise AttributeError("F4 is immutable")

    def __add__(self, other: "F4") -> "F4":
        return F4(self.code ^ other.code)

    __sub__ = __add__  # characteristic 2

    def __mul__(self, other: "F4") -> "F4":
        return F4(self._MUL[self.code][other.code])

    def __eq__(self, other):
        return isinstance(other, F4) and self.code == other.code

    def __hash__(self):
        return hash(("F4", self.code))

    def __bool__(self):
        return self.code != 0

    def __repr__(self):
        return f"F4({self._NAMES[self.code]})"


F4.ZERO = F4(0)
F4.ONE = F4(1)
F4.A = F4(2)
F4.A1 = F4(3)


# ---------------------------------------------------------------------------
# raw pair helpers (used by hot loops that skip RingElem allocation)


def mul_pair(a: int, b: int, c: int, d: int, mod: int | None = None):
    """(a + b*w)(c + d*w) = (ac + bd) + (ad + bc + bd) w, from w^2 = w + 1."""
    x = a * c + b * d
    y = a * d + b * c + b * d
    if mod is None:
        return x, y
    return x % mod, y % mod


def pow_pair(a: int, b: int, e: int, mod: int | None = None):
    assert e >= 0
    ra, rb = 1, 0
    while e:
        if e & 1:
            ra, rb = mul_pair(ra, rb, a, b, mod)
        a, b = mul_pair(a, b, a, b, mod)
        e >>= 1
    return ra, rb


def inv_unit_pair(a: int, b: int, mod: int) -> tuple[int, int]:
    """Inverse of a unit a + b*w modulo mod = 2^K.

    (a + b*w)((a+b) - b*w) = a^2 + ab - b^2, an odd integer for units,
    so the inverse is ((a+b)*t, -b*t) with t the integer inverse of that."""
    det = a * a + a * b - b * b
    assert det % 2 != 0, "not a unit"
    t = pow(det, -1, mod)
    return ((a + b) * t) % mod, (-b * t) % mod


def val_pair(a: int, b: int) -> int | float:
    if a == 0 and b == 0:
        return INFINITE
    if a == 0:
        return v2(b)
    if b == 0:
        return v2(a)
    return min(v2(a), v2(b))


# ---------------------------------------------------------------------------
# ring elements


class RingElem:
    """Residue a + b*w modulo 2^K.  Arithmetic requires equal K on both
    operands; use reduce_to / widen_to for explicit precision changes."""

    __slots__ = ("a", "b", "K")

    def __init__(self, a: int, b: int, K: int):
        assert K >= 1
        mask = (1 << K) - 1
        object.__setattr__(self, "a", a & mask)
        object.__setattr__(self, "b", b & mask)
        object.__setattr__(self, "K", K)

    def __setattr__(self, *_):
        raise AttributeError("RingElem is immutable")

    # constructors
    @classmethod
    def zero(cls, K: int) -> "RingElem":
        return cls(0, 0, K)

    @classmethod
    def one(cls, K: int) -> "RingElem":
        return cls(1, 0, K)

    @classmethod
    def alpha(cls, K: int) -> "RingElem":
        return cls(0, 1, K)

    def _chk(self, other: "RingElem"):
        if not isinstance(other, RingElem):
            raise TypeError(f"expected RingElem, got {type(other).__name__}")
        if other.K != self.K:
            raise PrecisionMismatch(f"precision mismatch: 2^{self.K} vs 2^{other.K}")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._chk(other)
        return RingElem(self.a + other.a, self.b + other.b, self.K)

    def __sub__(self, other: "RingElem") -> "RingElem":
        self._chk(other)
        return RingElem(self.a - other.a, self.b - other.b, self.K)

    def __neg__(self) -> "RingElem":
        return RingElem(-self.a, -self.b, self.K)

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._chk(other)
        x, y = mul_pair(self.a, self.b, other.a, other.b, 1 << self.K)
        return RingElem(x, y, self.K)

    def __pow__(self, e: int) -> "RingElem":
        x, y = pow_pair(self.a, self.b, e, 1 << self.K)
        return RingElem(x, y, self.K)

    def __eq__(self, other):
        return (
            isinstance(other, RingElem)
            and self.K == other.K
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return hash((self.a, self.b, self.K))

    def __repr__(self):
        return f"RingElem({format_elem(self.a, self.b)} mod 2^{self.K})"

    def __str__(self):
        return format_elem(self.a, self.b)

    # predicates / queries
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return (self.a | self.b) & 1 == 1

    def valuation(self) -> int | float:
        """min of the component 2-adic valuations; INFINITE means >= K."""
        return val_pair(self.a, self.b)

    def residue(self) -> F4:
        return F4((self.a & 1) | ((self.b & 1) << 1))

    def unit_part(self) -> "RingElem":
        """x = 2^v * u with u a unit; returns u at precision K - v."""
        v = self.valuation()
        if v is INFINITE:
            raise NotAUnit("zero residue has no unit part")
        return RingElem(self.a >> v, self.b >> v, self.K - v)

    def inverse(self) -> "RingElem":
        if not self.is_unit():
            raise NotAUnit(f"{self} is not a unit")
        x, y = inv_unit_pair(self.a, self.b, 1 << self.K)
        return RingElem(x, y, self.K)

    # precision moves
    def reduce_to(self, K2: int) -> "RingElem":
        assert 1 <= K2 <= self.K
        return RingElem(self.a, self.b, K2)

    def widen_to(self, K2: int) -> "RingElem":
        """Treats the stored residue as an exact integer pair.  Only sound
        when the element really is exact (form coefficients, stored roots)."""
        assert K2 >= self.K
        return RingElem(self.a, self.b, K2)

    def digits(self, depth: int) -> "DigitExpansion":
        return digit_expand(self, depth)


# ---------------------------------------------------------------------------
# element text syntax: "a+b*w"


def format_elem(a: int, b: int) -> str:
    if b == 0:
        return str(a)
    wpart = f"{b}*w"
    if a == 0:
        return wpart
    return f"{a}+{wpart}" if b >= 0 else f"{a}{wpart}"


_TERM = re.compile(r"[+-]?(?:(?:\d+\*)?w|\d+)")


def parse_elem(text: str) -> tuple[int, int]:
    """Parse "a", "b*w", "w", or "a+b*w" (whitespace tolerated, b may be negative)."""
    s = "".join(text.split())
    if not s:
        raise ValueError("empty element")
    a = b = 0
    pos = 0
    while pos < len(s):
        if pos > 0 and s[pos] not in "+-":
            raise ValueError(f"bad element syntax: {text!r}")
        m = _TERM.match(s, pos)
        if m is None:
            raise ValueError(f"bad element syntax: {text!r}")
        term = m.group()
        pos = m.end()
        if term.endswith("w"):
            coeff = term[:-1].rstrip("*")
            if coeff in ("", "+"):
                b += 1
            elif coeff == "-":
                b -= 1
            else:
                b += int(coeff)
        else:
            a += int(term)
    return a, b


# ---------------------------------------------------------------------------
# digit expansions


@dataclass(frozen=True)
class DigitExpansion:
    """x = 2^level * (d0 + 2 d1 + 4 d2 + ...) with digits in F4, d0 != 0."""

    level: int
    digits: tuple[F4, ...]

    def reconstruct(self, K: int) -> RingElem:
        a = b = 0
        for i, d in enumerate(self.digits):
            a |= (d.code & 1) << i
            b |= (d.code >> 1) << i
        return RingElem(a << self.level, b << self.level, K)


def digit_expand(x: RingElem, depth: int) -> DigitExpansion:
    """First `depth` residue digits of x above its level.

    Requires x nonzero mod 2^K and level + depth <= K, since deeper digits
    would be untrusted."""
    v = x.valuation()
    if v is INFINITE:
        raise NotAUnit("cannot expand the zero residue")
    if v + depth > x.K:
        raise PrecisionMismatch(
            f"depth {depth} at level {v} exceeds precision 2^{x.K}"
        )
    a = x.a >> v
    b = x.b >> v
    digs = tuple(F4(((a >> i) & 1) | (((b >> i) & 1) << 1)) for i in range(depth))
    assert digs[0].code != 0
    return DigitExpansion(level=v, digits=digs)


# ---------------------------------------------------------------------------
# d-th powers of units


def teichmuller_alpha(K: int) -> RingElem:
    """The cube root of unity congruent to w mod 2, via the stable limit of
    x -> x^4 starting from w (gains two trusted digits per step)."""
    mod = 1 << K
    a, b = 0, 1
    for _ in range(K + 2):
        na, nb = pow_pair(a, b, 4, mod)
        if (na, nb) == (a, b):
            break
        a, b = na, nb
    w = RingElem(a, b, K)
    assert w ** 3 == RingElem.one(K) and w.residue() == F4.A
    return w


@dataclass(frozen=True)
class MultiplierRep:
    """One unit d-th power usable as a contraction multiplier: value with a
    stored root (root ** d == value), its residue class, and the epsilon
    telling whether it carries the extra 1+4 factor mod 8."""

    value: RingElem
    root: RingElem
    klass: F4
    epsilon: int


@dataclass(frozen=True)
class MultiplierSet:
    """Canonical unit d-th powers: one rep per residue class the d-th power
    map hits, times epsilon in {0, 1}.  Two reps when 3 | d, six otherwise
    (then the map is transitive on nonzero classes)."""

    d: int
    K: int
    reps: tuple[MultiplierRep, ...]
    class_transitive: bool

    def values(self) -> set[RingElem]:
        return {r.value for r in self.reps}

    def by_class(self, klass: F4, epsilon: int) -> MultiplierRep:
        for r in self.reps:
            if r.klass == klass and r.epsilon == epsilon:
                return r
        raise KeyError((klass, epsilon))


def check_degree_shape(d: int):
    if d < 2 or d % 2 != 0 or (d // 2) % 2 != 1:
        raise DegreeShapeError(
            f"degree must be 2m with m odd (got {d}); other degrees are "
            "out of scope for the contraction machinery"
        )


_MULTIPLIER_CACHE: dict[tuple[int, int], MultiplierSet] = {}


def multiplier_set(d: int, K: int) -> MultiplierSet:
    check_degree_shape(d)
    assert K >= 1
    key = (d, K)
    cached = _MULTIPLIER_CACHE.get(key)
    if cached is not None:
        return cached

    KK = max(K, 4)  # construction wants a mod-16 window; reduce afterwards
    m = d // 2
    one = RingElem.one(KK)
    five_m = RingElem(5, 0, KK) ** m  # (2w - 1)^d, congruent to 5 mod 8
    root5 = RingElem(-1, 2, KK)
    reps = [
        MultiplierRep(one, one, F4.ONE, 0),
        MultiplierRep(five_m, root5, F4.ONE, 1),
    ]
    transitive = d % 3 != 0
    if transitive:
        w = teichmuller_alpha(KK)
        j = 1 if d % 3 == 1 else 2  # omega = (omega^j)^d
        rw = w ** j
        w2 = w * w
        rw2 = rw * rw
        reps += [
            MultiplierRep(w, rw, F4.A, 0),
            MultiplierRep(w * five_m, rw * root5, F4.A, 1),
            MultiplierRep(w2, rw2, F4.A1, 0),
            MultiplierRep(w2 * five_m, rw2 * root5, F4.A1, 1),
        ]
    for r in reps:
        assert r.root.is_unit() and r.root ** d == r.value
        assert r.value.residue() == r.klass
        # independent root extraction must also succeed
        x = dth_root(r.value, d)
        assert x ** d == r.value
    if KK != K:
        reps = [
            MultiplierRep(r.value.reduce_to(K), r.root.reduce_to(K), r.klass, r.epsilon)
            for r in reps
        ]
    ms = MultiplierSet(d=d, K=K, reps=tuple(reps), class_transitive=transitive)
    _MULTIPLIER_CACHE[key] = ms
    return ms


# ---------------------------------------------------------------------------
# root extraction (Hensel / Newton)

_SEED_CACHE: dict[int, dict[tuple[int, int], tuple[int, int]]] = {}


def _seed_table(d: int) -> dict[tuple[int, int], tuple[int, int]]:
    """x^d mod 16 for every unit x mod 16, first root wins (deterministic)."""
    table = _SEED_CACHE.get(d)
    if table is None:
        table = {}
        for a in range(16):
            for b in range(16):
                if (a | b) & 1:
                    t = pow_pair(a, b, d, 16)
                    table.setdefault(t, (a, b))
        _SEED_CACHE[d] = table
    return table


def _newton_root(seed: tuple[int, int], d: int, t: tuple[int, int], KK: int):
    """Lift seed to a root of x^d - t working modulo 2^KK.

    Valid when the seed residual has valuation >= 3 > 2*v(d): each step
    x -> x - f(x) / f'(x) at least doubles the excess, and the division by
    f'(x) = 2 * (d/2) * x^(d-1) splits into one exact halving plus a unit
    inverse."""
    mod = 1 << KK
    m = d // 2
    xa, xb = seed
    for _ in range(2 * KK.bit_length() + 8):
        pa, pb = pow_pair(xa, xb, d - 1, mod)
        fa, fb = mul_pair(xa, xb, pa, pb, mod)  # f(x) = x * x^(d-1) - t
        fa = (fa - t[0]) % mod
        fb = (fb - t[1]) % mod
        if fa == 0 and fb == 0:
            break
        assert fa % 2 == 0 and fb % 2 == 0, "residual too shallow for Newton"
        ga, gb = fa >> 1, fb >> 1
        da, db = mul_pair(m % mod, 0, pa, pb, mod)  # f'(x)/2, a unit
        ia, ib = inv_unit_pair(da, db, mod)
        sa, sb = mul_pair(ga, gb, ia, ib, mod)
        xa = (xa - sa) % mod
        xb = (xb - sb) % mod
    return xa, xb


def dth_root(t: RingElem, d: int, *, _search_limit: int = 4) -> RingElem:
    """A unit x with x^d = t mod 2^K, or NotADthPower.

    For K > 4 the candidates are exactly the solutions mod 16: any of them
    lifts by Newton since the residual valuation is >= 4 > 2 = 2*v(d), and
    conversely a root mod 2^K reduces to one mod 16."""
    if not t.is_unit():
        raise NotAUnit(f"{t} is not a unit; only unit roots are extracted")
    K = t.K
    if K <= _search_limit:
        mod = 1 << K
        for a in range(mod):
            for b in range(mod):
                if (a | b) & 1 and pow_pair(a, b, d, mod) == (t.a, t.b):
                    return RingElem(a, b, K)
        raise NotADthPower(f"{t} is not a d-th power mod 2^{K} (d={d})")
    seed = _seed_table(d).get((t.a % 16, t.b % 16))
    if seed is None:
        raise NotADthPower(f"{t} is not a d-th power mod 16 (d={d})")
    KK = K + 6
    xa, xb = _newton_root(seed, d, (t.a, t.b), KK)
    x = RingElem(xa, xb, K)
    assert x ** d == t, "Newton failed to converge (internal error)"
    return x


def newton_anchor_solve(a_i: RingElem, d: int, C: RingElem) -> RingElem:
    """Unit x with a_i * x^d + C = 0 mod 2^K, given that the seed x = 1
    already satisfies valuation(a_i + C) >= k + 3 where k = valuation(a_i)
    = valuation(C).  Callers fold any nontrivial seed into a_i first."""
    a_i._chk(C)
    K = a_i.K
    k = a_i.valuation()
    if k is INFINITE or C.valuation() is INFINITE:
        raise HenselError("anchor coefficient or target vanishes at this precision")
    if C.valuation() != k:
        raise HenselError(
            f"valuation mismatch: coefficient level {k}, target level {C.valuation()}"
        )
    res = a_i + C
    if not (res.is_zero() or res.valuation() >= k + 3):
        raise HenselError(
            f"residual valuation {res.valuation()} < {k + 3}: certificate invalid"
        )
    KK = K + 6
    mod = 1 << KK
    ua, ub = a_i.a >> k, a_i.b >> k
    ca, cb = C.a >> k, C.b >> k
    ia, ib = inv_unit_pair(ua, ub, mod)
    ta, tb = mul_pair((-ca) % mod, (-cb) % mod, ia, ib, mod)
    xa, xb = _newton_root((1, 0), d, (ta, tb), KK)
    x = RingElem(xa, xb, K)
    total = a_i * (x ** d) + C
    assert total.is_zero(), "anchor solve failed to cancel (internal error)"
    return x
