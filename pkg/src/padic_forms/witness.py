"""Nontrivial-zero witnesses and their verification.

A witness for a form is an assignment with at least one unit entry whose
evaluated sum vanishes to a declared valuation V.  When V is at least
three above the level of the unit entry's coefficient, solving for that
variable meets the Hensel criterion, so the residue statement certifies
an exact zero for every completion of the coefficients beyond their
working precision.  V never exceeds the working precision: a deeper claim
would silently depend on unknown digits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CertificateError
from .forms import AdditiveForm
from .ring import RingElem, newton_anchor_solve


@dataclass(frozen=True)
class Witness:
    values: tuple[RingElem, ...]
    primitive: int  # index of a unit entry justifying the lift
    V: int  # target valuation of the evaluated sum

    def to_json(self) -> dict:
        return {
            "values": [[x.a, x.b] for x in self.values],
            "primitive": self.primitive,
            "target_valuation": self.V,
            "precision": self.values[0].K,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Witness":
        K = doc["precision"]
        return cls(
            values=tuple(RingElem(a, b, K) for a, b in doc["values"]),
            primitive=doc["primitive"],
            V=doc["target_valuation"],
        )


def verify_witness(f: AdditiveForm, w: Witness) -> bool:
    """Evaluate the form at the witness and check all three clauses: the
    sum vanishes mod 2^V, the declared variable is a unit, and V clears
    its coefficient level by 3.  V must fit the working precision."""
    if len(w.values) != f.s or not 0 <= w.primitive < f.s:
        return False
    if not (1 <= w.V <= f.K):
        return False
    x = w.values[w.primitive]
    if not x.is_unit():
        return False
    lvl = f.coeffs[w.primitive].valuation()
    if w.V < lvl + 3:
        return False
    total = f.evaluate(w.values, at_K=f.K)
    mask = (1 << w.V) - 1
    return (total.a & mask) == 0 and (total.b & mask) == 0


def exact_coeffs(g: AdditiveForm, K: int) -> list[RingElem]:
    """Current-frame coefficients recomputed from the origin's exact
    representatives at precision K, undoing any truncation the frame's
    scale may have caused in storage."""
    base = g.root()
    out = []
    for j in range(g.s):
        rep = base.coeffs[j]
        num_a = rep.a << g.scale_log
        num_b = rep.b << g.scale_log
        down = g.d * g.subst_log[j]
        out.append(RingElem(num_a >> down, num_b >> down, K))
    return out


def solve_anchor(
    coeffs: list[RingElem], d: int, values: list[RingElem], anchor: int
) -> list[RingElem]:
    """Replace values[anchor] (a unit) so the full sum vanishes at the
    coefficients' precision.  Requires the usual valuation agreement; a
    failure here means the incoming certificate was not sound."""
    K = coeffs[0].K
    vals = [RingElem(x.a, x.b, K) for x in values]
    folded = coeffs[anchor] * vals[anchor] ** d
    rest = RingElem.zero(K)
    for j, (c, x) in enumerate(zip(coeffs, vals)):
        if j != anchor:
            rest = rest + c * x ** d
    z = newton_anchor_solve(folded, d, rest)
    vals[anchor] = vals[anchor] * z
    return vals


def map_to_origin(g: AdditiveForm, w: Witness) -> Witness:
    """Push a witness for a framed (reduced or shifted) form back to the
    original variables: x_j = 2^(N - e_j) y_j with N the largest
    substitution exponent among used variables, which keeps some unit
    entry since all used values are units."""
    orig = g.origin
    if orig is None:
        return w
    d = g.d
    used = [j for j, x in enumerate(w.values) if not x.is_zero()]
    if not used:
        raise CertificateError("witness uses no variables")
    N = max(g.subst_log[j] for j in used)
    V_avail = w.V + d * N - g.scale_log
    K = orig.K
    V = min(K, V_avail)
    if V < 1:
        raise CertificateError("scale bookkeeping left no certified digits")
    values = []
    for j in range(g.s):
        x = w.values[j]
        if x.is_zero():
            values.append(RingElem.zero(K))
        else:
            up = N - g.subst_log[j]
            values.append(RingElem(x.a << up, x.b << up, K))
    candidates = [
        j for j in used if g.subst_log[j] == N and values[j].is_unit()
    ]
    if not candidates:
        raise CertificateError("no unit variable survives the back-mapping")
    primitive = min(candidates, key=lambda j: (orig.coeffs[j].valuation(), j))
    return Witness(values=tuple(values), primitive=primitive, V=V)
