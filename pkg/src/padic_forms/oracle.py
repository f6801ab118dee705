"""Exhaustive ground truth modulo 2^M.

Every d-th power in O/2^M O is 2^(jd) times a unit d-th power, so the
achievable values per variable form a small explicit set.  A dynamic
program over partial sums (the full additive group O/2^M, a 2^M x 2^M
torus) decides whether some assignment with a liftable unit variable sums
to zero.  At M = max coefficient level + 3 this is a complete isotropy
criterion: a hit lifts by Newton, a miss is an anisotropy proof.

Transitions are boolean convolutions on the torus, done by FFT on counts
and thresholding; counts stay far below 2^53 so float64 is exact enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OracleBudgetError, PrecisionMismatch
from .forms import AdditiveForm, reduce_levels
from .ring import RingElem, dth_root, mul_pair, teichmuller_alpha
from .witness import Witness, exact_coeffs, map_to_origin, solve_anchor, verify_witness

MAX_ORACLE_M = 10  # 2 * 4^M boolean cells per DP layer


def _pow_vec(xa, xb, d: int, mask: int):
    """Componentwise (xa + xb*w)^d on int64 arrays, masked each step."""
    ra = np.ones_like(xa)
    rb = np.zeros_like(xb)
    e = d
    while e:
        if e & 1:
            ra, rb = (ra * xa + rb * xb) & mask, (ra * xb + rb * xa + rb * xb) & mask
        e >>= 1
        if e:
            xa, xb = (xa * xa + xb * xb) & mask, (2 * xa * xb + xb * xb) & mask
    return ra, rb


_UNIT_POWERS: dict = {}


def _unit_power_codes(d: int, L: int) -> np.ndarray:
    """Sorted codes a + (b << L) of {u^d : u unit mod 2^L}.  Enumerates
    squares of 1 + 2t (d = 2m with m odd acts on those like squaring) and
    multiplies in the cube roots of unity when 3 does not divide d."""
    key = (d, L)
    got = _UNIT_POWERS.get(key)
    if got is not None:
        return got
    mask = (1 << L) - 1
    half = 1 << (L - 1)
    t = np.arange(half * half, dtype=np.int64)
    xa = (1 + 2 * (t // half)) & mask
    xb = (2 * (t % half)) & mask
    sa = (xa * xa + xb * xb) & mask
    sb = (2 * xa * xb + xb * xb) & mask
    codes = [sa + (sb << L)]
    if d % 3 != 0:
        w = teichmuller_alpha(max(L, 3)).reduce_to(L)
        for wa, wb in ((w.a, w.b), ((w * w).a, (w * w).b)):
            ta = (sa * wa + sb * wb) & mask
            tb = (sa * wb + sb * wa + sb * wb) & mask
            codes.append(ta + (tb << L))
    out = np.unique(np.concatenate(codes))
    _UNIT_POWERS[key] = out
    return out


@dataclass(frozen=True)
class PVEntry:
    value: tuple[int, int]
    shift: int  # the value is 2^(shift*d) times a unit d-th power
    unit: bool


@dataclass(frozen=True)
class PowerValueSet:
    d: int
    M: int
    entries: tuple[PVEntry, ...]  # nonzero values, sorted by (shift, a, b)

    def value_set(self) -> set:
        return {(0, 0)} | {e.value for e in self.entries}

    def root_of(self, value: tuple[int, int]) -> RingElem:
        """A residue x mod 2^M with x^d = value mod 2^M."""
        a, b = value
        if a == 0 and b == 0:
            return RingElem.zero(self.M)
        jd = RingElem(a, b, self.M).valuation()
        assert jd % self.d == 0
        j = jd // self.d
        L = self.M - jd
        u = dth_root(RingElem(a >> jd, b >> jd, L), self.d)
        return RingElem(u.a << j, u.b << j, self.M)


_PVS_CACHE: dict = {}


def power_value_set(d: int, M: int) -> PowerValueSet:
    assert 1 <= M <= MAX_ORACLE_M
    key = (d, M)
    got = _PVS_CACHE.get(key)
    if got is not None:
        return got
    entries = []
    j = 0
    while j * d < M:
        L = M - j * d
        for code in _unit_power_codes(d, L).tolist():
            a, b = code & ((1 << L) - 1), code >> L
            entries.append(PVEntry((a << (j * d), b << (j * d)), j, j == 0))
        j += 1
    entries.sort(key=lambda e: (e.shift, e.value))
    pvs = PowerValueSet(d, M, tuple(entries))
    if 4 ** M <= 10 ** 6:
        assert pvs.value_set() == _brute_power_values(d, M), (
            "power value set disagrees with brute force"
        )
    _PVS_CACHE[key] = pvs
    return pvs


def _brute_power_values(d: int, M: int) -> set:
    mask = (1 << M) - 1
    n = 1 << M
    t = np.arange(n * n, dtype=np.int64)
    ra, rb = _pow_vec(t // n, t % n, d, mask)
    return set(zip(ra.tolist(), rb.tolist()))


# ---------------------------------------------------------------------------
# primitive zeros mod 2^M


@dataclass
class ZeroSearch:
    found: bool
    assignment: tuple | None  # variable roots mod 2^M
    anchor: int | None  # index of the liftable unit variable
    states_visited: int
    M: int


def _conv_hit(S: np.ndarray, FV) -> np.ndarray:
    if FV is None or not S.any():
        return np.zeros_like(S)
    out = np.fft.irfft2(np.fft.rfft2(S.astype(np.float64)) * FV, s=S.shape)
    return out > 0.5


def _grid_of(codes: np.ndarray, M: int) -> np.ndarray:
    n = 1 << M
    g = np.zeros((n, n), dtype=bool)
    if codes.size:
        g[codes & (n - 1), codes >> M] = True
    return g


def primitive_zero_mod(
    f: AdditiveForm, M: int, max_unit_level: int | None = None
) -> ZeroSearch:
    """Search O/2^M for a zero using at least one unit variable whose
    coefficient level allows lifting (level <= max_unit_level, default
    M - 3).  Complete within the modulus: NONE means no such zero exists
    for any completion of the coefficients."""
    assert f.is_reduced()
    if M > MAX_ORACLE_M:
        raise OracleBudgetError(f"modulus 2^{M} exceeds the oracle policy")
    if min(f.windows) < M:
        raise PrecisionMismatch(
            f"coefficients trusted below 2^{M}; oracle verdict would not "
            "cover all completions"
        )
    if max_unit_level is None:
        max_unit_level = M - 3
    pvs = power_value_set(f.d, M)
    mask = (1 << M) - 1
    n = 1 << M

    unit_vals = [e.value for e in pvs.entries if e.unit]
    rest_vals = [(0, 0)] + [e.value for e in pvs.entries if not e.unit]

    per_var = []
    for i, c in enumerate(f.coeffs):
        lvl = c.valuation()
        liftable = lvl <= max_unit_level

        def translate(vals):
            codes = []
            rev = {}
            for va, vb in vals:
                ta, tb = mul_pair(c.a, c.b, va, vb, 1 << M)
                code = ta + (tb << M)
                if code not in rev:
                    rev[code] = (va, vb)
                    codes.append(code)
            return np.array(sorted(codes), dtype=np.int64), rev

        flag_codes, flag_rev = (
            translate(unit_vals) if liftable else (np.array([], dtype=np.int64), {})
        )
        plain_source = rest_vals if liftable else rest_vals + unit_vals
        plain_codes, plain_rev = translate(plain_source)
        all_codes = np.unique(np.concatenate([flag_codes, plain_codes]))
        per_var.append((flag_codes, flag_rev, plain_codes, plain_rev, all_codes))

    def fft_of(codes):
        if codes.size == 0:
            return None
        return np.fft.rfft2(_grid_of(codes, M).astype(np.float64))

    S0 = np.zeros((n, n), dtype=bool)
    S0[0, 0] = True
    S1 = np.zeros((n, n), dtype=bool)
    layers = [(S0, S1)]
    visited = 1
    for flag_codes, _, plain_codes, _, all_codes in per_var:
        F_flag = fft_of(flag_codes)
        F_plain = fft_of(plain_codes)
        F_all = fft_of(all_codes)
        S1 = _conv_hit(S1, F_all) | _conv_hit(S0, F_flag)
        S0 = _conv_hit(S0, F_plain)
        layers.append((S0, S1))
        visited += int(S0.sum()) + int(S1.sum())
    if not S1[0, 0]:
        return ZeroSearch(False, None, None, visited, M)

    # walk the layers backward, peeling one variable's value at a time
    assignment_vals = [None] * f.s
    anchor = None
    ta, tb, flag = 0, 0, True
    for i in range(f.s - 1, -1, -1):
        S0_prev, S1_prev = layers[i]
        flag_codes, flag_rev, plain_codes, plain_rev, _ = per_var[i]
        chosen = None
        if flag:
            for code in flag_codes.tolist():
                if S0_prev[(ta - (code & mask)) & mask, (tb - (code >> M)) & mask]:
                    chosen = (code, flag_rev[code], False)
                    anchor = i
                    break
            if chosen is None:
                for code in plain_codes.tolist():
                    if S1_prev[(ta - (code & mask)) & mask, (tb - (code >> M)) & mask]:
                        chosen = (code, plain_rev[code], True)
                        break
                if chosen is None:
                    for code in flag_codes.tolist():
                        if S1_prev[(ta - (code & mask)) & mask, (tb - (code >> M)) & mask]:
                            chosen = (code, flag_rev[code], True)
                            break
        else:
            for code in plain_codes.tolist():
                if S0_prev[(ta - (code & mask)) & mask, (tb - (code >> M)) & mask]:
                    chosen = (code, plain_rev[code], False)
                    break
        assert chosen is not None, "backtracking lost the DP trail"
        code, pv, flag = chosen[0], chosen[1], chosen[2]
        assignment_vals[i] = pv
        ta = (ta - (code & mask)) & mask
        tb = (tb - (code >> M)) & mask
    assert (ta, tb) == (0, 0) and flag is False
    roots = tuple(pvs.root_of(pv) for pv in assignment_vals)
    return ZeroSearch(True, roots, anchor, visited, M)


# ---------------------------------------------------------------------------
# full exhaustive decision


@dataclass(frozen=True)
class ExhaustionCertificate:
    M: int
    states_visited: int

    def to_json(self) -> dict:
        return {"kind": "exhaustion", "M": self.M, "statesVisited": self.states_visited}


@dataclass
class OracleDecision:
    verdict: str  # "ISOTROPIC" | "ANISOTROPIC"
    witness: Witness | None
    certificate: ExhaustionCertificate | None
    states_visited: int


def decide_isotropy_exhaustive(f: AdditiveForm) -> OracleDecision:
    """Complete decision at M = max level + 3: every unit variable is then
    liftable, so a missing primitive zero mod 2^M rules out zeros outright
    and a found one Newton-lifts to a verified witness."""
    g = reduce_levels(f)
    M = g.max_level() + 3
    zs = primitive_zero_mod(g, M)
    if not zs.found:
        return OracleDecision(
            "ANISOTROPIC", None, ExhaustionCertificate(M, zs.states_visited), zs.states_visited
        )
    K = g.K
    coeffs = exact_coeffs(g, K)
    vals = solve_anchor(coeffs, g.d, list(zs.assignment), zs.anchor)
    w = map_to_origin(g, Witness(tuple(vals), zs.anchor, K))
    assert verify_witness(f.root(), w)
    return OracleDecision("ISOTROPIC", w, None, zs.states_visited)


# ---------------------------------------------------------------------------
# naive cross-check (test harness)


def naive_zero_exists(
    f: AdditiveForm, M: int, max_unit_level: int | None = None
) -> bool:
    """Literal enumeration over all of (O/2^M)^s.  Exponential; guarded so
    tests cannot accidentally run it at scale."""
    assert f.is_reduced()
    if max_unit_level is None:
        max_unit_level = M - 3
    n = 1 << M
    assert (n * n) ** f.s <= 2 ** 22, "naive enumeration too large"
    mask = n - 1
    t = np.arange(n * n, dtype=np.int64)
    xs_a, xs_b = t // n, t % n
    pa, pb = _pow_vec(xs_a, xs_b, f.d, mask)
    unit = ((xs_a | xs_b) & 1).astype(bool)
    A = np.zeros(1, dtype=np.int64)
    B = np.zeros(1, dtype=np.int64)
    FL = np.zeros(1, dtype=bool)
    for c in f.coeffs:
        ta = (c.a * pa + c.b * pb) & mask
        tb = (c.a * pb + c.b * pa + c.b * pb) & mask
        liftable = unit & (c.valuation() <= max_unit_level)
        A = (A[:, None] + ta[None, :]).ravel() & mask
        B = (B[:, None] + tb[None, :]).ravel() & mask
        FL = (FL[:, None] | liftable[None, :]).ravel()
    return bool(((A == 0) & (B == 0) & FL).any())
