"""Top-level isotropy decision pipeline.

Reduce and normalize, then try the contraction search; a certificate is
Newton-lifted into a full-precision witness in the caller's variable
frame.  When the search comes up empty the exhaustive oracle settles the
question for instances within its size policy, and anything beyond that
is reported INCONCLUSIVE rather than guessed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .engine import (
    ContractionCertificate,
    certificate_to_json,
    search_certificate,
    validate_certificate,
)
from .errors import CertificateError, PrecisionMismatch
from .forms import AdditiveForm, normalize, reduce_levels
from .oracle import MAX_ORACLE_M, decide_isotropy_exhaustive
from .ring import RingElem
from .witness import Witness, exact_coeffs, map_to_origin, solve_anchor, verify_witness


def isotropy_threshold(d: int) -> int:
    """Variable count at which every form of degree d is isotropic."""
    return 4 * d + 1 if d % 3 == 0 else (3 * d) // 2 + 1


@dataclass
class SolverConfig:
    budget: int = 200_000
    generous_budget: int = 2_000_000
    leaf_depth: int = 3
    oracle_max_m: int = MAX_ORACLE_M


@dataclass
class IsotropyResult:
    verdict: str  # "ISOTROPIC" | "ANISOTROPIC" | "INCONCLUSIVE"
    stage: str  # pipeline stage that decided
    witness: Witness | None = None
    certificate: object | None = None  # anisotropy evidence, has to_json()
    contraction: ContractionCertificate | None = None
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self, include_timings: bool = True) -> dict:
        doc: dict = {"verdict": self.verdict, "stage": self.stage}
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_json()
        if self.contraction is not None:
            doc["contraction"] = certificate_to_json(self.contraction)
        if self.diagnostics:
            doc["diagnostics"] = self.diagnostics
        if include_timings:
            doc["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return doc


def lift_witness(g: AdditiveForm, cert: ContractionCertificate) -> Witness:
    """Turn a validated contraction into a witness for g's root form.

    Each certificate leaf gets the product of multiplier roots along its
    path (a unit); the anchor variable is then corrected by Newton so the
    exact sum vanishes at a precision high enough that, after the frame
    back-mapping, the witness still certifies the root's full precision.
    """
    if not validate_certificate(g, cert):
        raise CertificateError("certificate does not validate against the form")
    node_map = cert.node_map()
    roots: dict[int, RingElem] = {}

    def walk(nid: int, acc: RingElem):
        n = node_map[nid]
        if n.kind == "leaf":
            roots[n.var] = acc
            return
        for cid, rep in zip(n.children, n.choices):
            r = rep.root
            walk(cid, acc * RingElem(r.a, r.b, acc.K))

    root_form = g.root()
    K_orig = root_form.K
    used = sorted(
        n.var for n in cert.nodes if n.kind == "leaf"
    )
    N = max(g.subst_log[j] for j in used)
    K_star = max(g.K, K_orig + g.scale_log - g.d * N)
    walk(cert.root, RingElem.one(K_star))

    coeffs = exact_coeffs(g, K_star)
    values = [RingElem.zero(K_star)] * g.s
    for j, lam in roots.items():
        values[j] = lam
    values = solve_anchor(coeffs, g.d, values, cert.anchor_leaf)
    w = map_to_origin(g, Witness(tuple(values), cert.anchor_leaf, K_star))
    if not verify_witness(root_form, w):
        raise CertificateError("lifted witness failed verification")
    return w


def decide_isotropy(f: AdditiveForm, config: SolverConfig | None = None) -> IsotropyResult:
    """Decide isotropy of f (witnesses refer to f's own variables).

    Stages: reduce and normalize; contraction search (with a generous
    budget when the variable count clears the always-isotropic threshold);
    exhaustive oracle when the modulus fits the policy; else INCONCLUSIVE.
    """
    cfg = config or SolverConfig()
    timings: dict = {}
    t0 = time.perf_counter()
    reduced = reduce_levels(f)
    g, _shift = normalize(reduced)
    timings["normalize"] = time.perf_counter() - t0

    threshold = isotropy_threshold(g.d)
    above = g.s >= threshold
    budget = cfg.generous_budget if above else cfg.budget
    stage = "search-threshold" if above else "search"

    t0 = time.perf_counter()
    out = search_certificate(g, leaf_depth=cfg.leaf_depth, budget=budget)
    timings["search"] = time.perf_counter() - t0
    if out.status == "FOUND":
        t0 = time.perf_counter()
        w = lift_witness(g, out.certificate)
        timings["lift"] = time.perf_counter() - t0
        return IsotropyResult(
            "ISOTROPIC",
            stage,
            witness=w,
            contraction=out.certificate,
            diagnostics={"nodesExpanded": out.nodes_expanded},
            timings=timings,
        )

    M = reduced.max_level() + 3
    if M <= cfg.oracle_max_m:
        if min(reduced.windows) < M:
            raise PrecisionMismatch(
                f"oracle needs trusted digits mod 2^{M}; increase the working "
                "precision"
            )
        t0 = time.perf_counter()
        dec = decide_isotropy_exhaustive(reduced)
        timings["oracle"] = time.perf_counter() - t0
        if dec.verdict == "ISOTROPIC":
            assert verify_witness(f.root(), dec.witness)
            return IsotropyResult(
                "ISOTROPIC",
                "oracle",
                witness=dec.witness,
                diagnostics={"searchStatus": out.status},
                timings=timings,
            )
        return IsotropyResult(
            "ANISOTROPIC",
            "oracle",
            certificate=dec.certificate,
            diagnostics={"searchStatus": out.status},
            timings=timings,
        )
    return IsotropyResult(
        "INCONCLUSIVE",
        "exhausted",
        diagnostics={
            "searchStatus": out.status,
            "nodesExpanded": out.nodes_expanded,
            "oracleModulus": M,
            "oraclePolicy": cfg.oracle_max_m,
        },
        timings=timings,
    )
