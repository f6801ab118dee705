"""Additive forms a_1 x_1^d + ... + a_s x_s^d and their level bookkeeping.

A form is a coefficient vector over the base ring at a common storage
precision K.  Coefficients are residues mod 2^K; every verdict downstream
is valid for all ways of completing the unknown higher digits, so each
coefficient also carries a trusted-window exponent that shrinks when a
transformation divides digits away.

Transformations (level reduction, cyclic shifts, normalization) keep a
frame: per-variable substitution exponents e_j and a net scale t with

    coeff_cur[j] = coeff_orig[j] * 2^t / 2^(d * e_j)

so a zero of the transformed form maps back to a zero of the original via
x_j = 2^(N - e_j) * y_j with N = max e_j over the variables used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations

from .errors import NoValidShift, PrecisionMismatch
from .ring import F4, RingElem, check_degree_shape, parse_elem


def default_precision(d: int) -> int:
    return d + 4


class AdditiveForm:
    __slots__ = ("d", "coeffs", "windows", "scale_log", "subst_log", "origin")

    def __init__(
        self,
        d: int,
        coeffs: tuple[RingElem, ...],
        *,
        windows: tuple[int, ...] | None = None,
        scale_log: int = 0,
        subst_log: tuple[int, ...] | None = None,
        origin: "AdditiveForm | None" = None,
    ):
        check_degree_shape(d)
        coeffs = tuple(coeffs)
        assert len(coeffs) >= 1
        K = coeffs[0].K
        if windows is None:
            windows = (K,) * len(coeffs)
        if subst_log is None:
            subst_log = (0,) * len(coeffs)
        assert len(windows) == len(coeffs) == len(subst_log)
        for c, w in zip(coeffs, windows):
            if c.K != K:
                raise PrecisionMismatch("coefficients at mixed precisions")
            assert 1 <= w <= K
            if c.a % (1 << w) == 0 and c.b % (1 << w) == 0:
                raise PrecisionMismatch(
                    f"coefficient {c} indistinguishable from 0 in its trusted window"
                )
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "scale_log", scale_log)
        object.__setattr__(self, "subst_log", subst_log)
        object.__setattr__(self, "origin", origin)

    def __setattr__(self, *_):
        raise AttributeError("AdditiveForm is immutable")

    # constructors
    @classmethod
    def from_pairs(cls, d: int, pairs, K: int | None = None) -> "AdditiveForm":
        if K is None:
            K = default_precision(d)
        return cls(d, tuple(RingElem(a, b, K) for a, b in pairs))

    @classmethod
    def from_json(cls, doc: dict | str) -> "AdditiveForm":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls.from_pairs(doc["degree"], doc["coeffs"], doc["precision"])

    @classmethod
    def from_text(cls, text: str) -> "AdditiveForm":
        """`d=6; 1, 1, 1*w, 4` with an optional `K=12;` segment."""
        head, _, tail = text.partition(";")
        if "=" not in head:
            raise ValueError("form text must start with d=<degree>;")
        key, val = head.split("=", 1)
        if key.strip() != "d":
            raise ValueError("form text must start with d=<degree>;")
        d = int(val)
        K = None
        if "=" in tail.split(";")[0]:
            kseg, _, tail = tail.partition(";")
            kkey, kval = kseg.split("=", 1)
            if kkey.strip().lower() not in ("k", "precision"):
                raise ValueError(f"unknown form option {kkey.strip()!r}")
            K = int(kval)
        pairs = [parse_elem(tok) for tok in tail.split(",") if tok.strip()]
        if not pairs:
            raise ValueError("form has no coefficients")
        return cls.from_pairs(d, pairs, K)

    def to_json(self) -> dict:
        return {
            "degree": self.d,
            "precision": self.K,
            "coeffs": [[c.a, c.b] for c in self.coeffs],
        }

    # queries
    @property
    def K(self) -> int:
        return self.coeffs[0].K

    @property
    def s(self) -> int:
        return len(self.coeffs)

    def levels(self) -> tuple[int, ...]:
        return tuple(c.valuation() for c in self.coeffs)

    def max_level(self) -> int:
        return max(self.levels())

    def classes(self) -> tuple[F4, ...]:
        """Residue class of each coefficient's unit part."""
        return tuple(c.unit_part().residue() for c in self.coeffs)

    def is_reduced(self) -> bool:
        return self.max_level() < self.d

    def root(self) -> "AdditiveForm":
        return self.origin if self.origin is not None else self

    def evaluate(self, values, at_K: int | None = None) -> RingElem:
        """Sum of coeff * value^d.  Representatives are widened as exact
        integers when at_K exceeds the storage precision; callers must cap
        any completion-independent claim at the trusted windows."""
        K = self.K if at_K is None else at_K
        total = RingElem.zero(K)
        assert len(values) == self.s
        for c, x in zip(self.coeffs, values):
            cx = RingElem(c.a, c.b, K)
            xx = RingElem(x.a, x.b, K)
            total = total + cx * (xx ** self.d)
        return total

    def __repr__(self):
        inner = ", ".join(str(c) for c in self.coeffs)
        return f"AdditiveForm(d={self.d}, K={self.K}, [{inner}])"


# ---------------------------------------------------------------------------
# transformations


def reduce_levels(f: AdditiveForm) -> AdditiveForm:
    """Bring every level into [0, d) by folding 2^(id) factors into the
    variable substitutions.  A coefficient that needs reduction but whose
    level reaches K - d is rejected: after division fewer than d digits
    would remain trusted."""
    d = f.d
    coeffs = []
    windows = []
    subst = []
    changed = False
    for c, w, e in zip(f.coeffs, f.windows, f.subst_log):
        lvl = c.valuation()
        if lvl < d:
            coeffs.append(c)
            windows.append(w)
            subst.append(e)
            continue
        if lvl >= w - d:
            raise PrecisionMismatch(
                f"coefficient {c} at level {lvl} is too close to the trusted "
                f"window 2^{w} to reduce"
            )
        i = lvl // d
        coeffs.append(RingElem(c.a >> (i * d), c.b >> (i * d), c.K))
        windows.append(w - i * d)
        subst.append(e + i)
        changed = True
    if not changed:
        return f
    return AdditiveForm(
        d,
        tuple(coeffs),
        windows=tuple(windows),
        scale_log=f.scale_log,
        subst_log=tuple(subst),
        origin=f.root(),
    )


def cyclic_shift(f: AdditiveForm, t: int) -> AdditiveForm:
    """Multiply the form by 2^t and re-reduce, sending every level to
    (level + t) mod d.  Isotropy-equivalent; frame records the scale."""
    assert f.is_reduced()
    d = f.d
    t %= d
    if t == 0:
        return f
    K = f.K
    coeffs = []
    windows = []
    subst = []
    for c, w, e in zip(f.coeffs, f.windows, f.subst_log):
        lvl = c.valuation()
        i = 1 if lvl + t >= d else 0
        shift = t - i * d  # may be negative; rep stays exactly divisible
        if shift >= 0:
            a, b = c.a << shift, c.b << shift
        else:
            a, b = c.a >> -shift, c.b >> -shift
        coeffs.append(RingElem(a, b, K))
        windows.append(min(K, w + shift))
        subst.append(e + i)
    return AdditiveForm(
        d,
        tuple(coeffs),
        windows=tuple(windows),
        scale_log=f.scale_log + t,
        subst_log=tuple(subst),
        origin=f.root(),
    )


def normalize(f: AdditiveForm) -> tuple[AdditiveForm, int]:
    """Rotate levels so every prefix of the level distribution holds its
    proportional share: d * (s_0 + ... + s_j) >= (j+1) * s for all j.
    Some rotation always works (rotating the distribution through a full
    cycle averages out); failure to find one is a bug, not an input error."""
    f = reduce_levels(f)
    d, s = f.d, f.s
    counts = [0] * d
    for lvl in f.levels():
        counts[lvl] += 1
    for t in range(d):
        pref = 0
        for j in range(d):
            pref += counts[(j - t) % d]
            if d * pref < (j + 1) * s:
                break
        else:
            return cyclic_shift(f, t), t
    raise NoValidShift(f"no rotation normalizes level counts {counts}")


# ---------------------------------------------------------------------------
# level distributions and type descriptors


@dataclass(frozen=True)
class LevelDistribution:
    counts: tuple[int, ...]
    tallies: tuple[tuple[int, int, int], ...]  # per level: classes 1, w, 1+w


def level_distribution(f: AdditiveForm) -> LevelDistribution:
    assert f.is_reduced()
    counts = [0] * f.d
    tallies = [[0, 0, 0] for _ in range(f.d)]
    for lvl, cls in zip(f.levels(), f.classes()):
        counts[lvl] += 1
        tallies[lvl][cls.code - 1] += 1
    return LevelDistribution(tuple(counts), tuple(tuple(t) for t in tallies))


@dataclass(frozen=True)
class TypeDescriptor:
    """Per-level requirements on consecutive levels starting at some shift.
    An int entry is a plain minimum count; a 3-tuple entry is a stack of
    per-class minimums with abstract class labels, matched to the actual
    nonzero classes up to one global permutation."""

    levels: tuple

    def __post_init__(self):
        for req in self.levels:
            assert isinstance(req, int) or (
                isinstance(req, tuple) and len(req) == 3
            ), f"bad level requirement {req!r}"


@dataclass(frozen=True)
class MatchSlot:
    level_offset: int  # level index within the descriptor
    klass: F4 | None  # required class after mapping, None for plain slots
    var: int  # matched variable index


@dataclass(frozen=True)
class MatchWitness:
    shift: int
    class_map: tuple[int, int, int]  # descriptor class 0,1,2 -> F4 code
    slots: tuple[MatchSlot, ...]


def match_type(f: AdditiveForm, td: TypeDescriptor) -> MatchWitness | None:
    """First witness (by shift, then class permutation) assigning distinct
    variables to every descriptor slot, or None."""
    assert f.is_reduced()
    d = f.d
    if len(td.levels) > d:
        return None
    levels = f.levels()
    classes = f.classes()
    for shift in range(d):
        shifted = [(lvl + shift) % d for lvl in levels]
        # variables by (effective level, class code)
        pools: dict[tuple[int, int], list[int]] = {}
        for idx, (lvl, cls) in enumerate(zip(shifted, classes)):
            pools.setdefault((lvl, cls.code), []).append(idx)
        for perm in permutations((1, 2, 3)):
            slots = []
            ok = True
            for li, req in enumerate(td.levels):
                if isinstance(req, int):
                    avail = [
                        idx
                        for code in (1, 2, 3)
                        for idx in pools.get((li, code), [])
                    ]
                    avail.sort()
                    if len(avail) < req:
                        ok = False
                        break
                    for idx in avail[:req]:
                        slots.append(MatchSlot(li, None, idx))
                else:
                    for ci, need in enumerate(req):
                        code = perm[ci]
                        avail = pools.get((li, code), [])
                        if len(avail) < need:
                            ok = False
                            break
                        for idx in avail[:need]:
                            slots.append(MatchSlot(li, F4(code), idx))
                    if not ok:
                        break
            if ok:
                return MatchWitness(shift, perm, tuple(slots))
    return None
