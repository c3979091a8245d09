"""Dispatch a scenario to its pipeline and collect the certificates."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from . import fock, opspace, qmap, wick
from .certificate import Certificate, _plain, residual
from .coxeter import CoxeterError, CoxeterSystem, build_system, symmetric_poincare
from .scenario import DEFAULT_SCALAR, ScenarioError, ScenarioSpec, to_mapping

ERROR_CODES = {
    ScenarioError: "input_error",
    MemoryError: "budget_exceeded",
    CoxeterError: "coxeter_error",
    qmap.FamilyError: "family_error",
    fock.FockError: "fock_error",
    ValueError: "value_error",
}
BLOCKSET_MAX_ORDER = 5040
THRESHOLD_MAX_ORDER = 120


@dataclass
class Report:
    scenario: dict[str, Any]
    certificates: list[Certificate] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    duration: float = 0.0
    version: str = __version__
    error: dict[str, str] | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.certificates)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": _plain(self.scenario),
            "verdict": self.verdict,
            "certificates": [c.to_dict() for c in self.certificates],
            "notes": _plain(self.notes),
            "duration_s": self.duration,
            "version": self.version,
            "error": self.error,
        }

    def to_text(self) -> str:
        rows = [(c.verdict.upper(), c.label, f"{c.value:.6g}", c.direction, f"{c.tolerance:.6g}")
                for c in self.certificates]
        head = ("", "check", "value", "", "tolerance")
        widths = [max(len(r[k]) for r in [head, *rows]) for k in range(5)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [f"scenario: {self.scenario.get('kind')} (seed {self.scenario.get('seed')})",
               fmt.format(*head).rstrip()]
        out += [fmt.format(*r).rstrip() for r in rows]
        for k, v in self.notes.items():
            out.append(f"{k}: {_plain(v)}")
        if self.error:
            out.append(f"error [{self.error['code']}]: {self.error['message']}")
        out.append(f"verdict: {self.verdict.upper()}  ({len(self.certificates)} checks, "
                   f"{self.duration:.2f} s, version {self.version})")
        return "\n".join(out)


def _expected_order(spec: ScenarioSpec, sys: CoxeterSystem) -> int | None:
    if spec.group is None:
        return None
    name = spec.group.replace("_", "").upper()
    n = sys.rank
    if name.startswith("A"):
        return math.factorial(n + 1)
    if name.startswith("B"):
        return 2 ** n * math.factorial(n)
    if name.startswith("D"):
        return 2 ** (n - 1) * math.factorial(n)
    if name.startswith("I2"):
        return 2 * int(sys.matrix[0, 1])
    return None


def run_coxeter(spec: ScenarioSpec, rep: Report):
    sys = build_system(spec.coxeter())
    certs = rep.certificates
    rep.notes.update(order=sys.order, longest_length=sys.longest.length, model=sys.model)
    expected = _expected_order(spec, sys)
    if expected is not None:
        certs.append(residual("group order", abs(sys.order - expected), 0, order=sys.order,
                              expected=expected))
    poly = sys.poincare_coefficients()
    certs.append(residual("Poincare polynomial palindromic", int(poly != poly[::-1]), 0))
    if spec.group and spec.group.replace("_", "").upper().startswith("A"):
        ref = symmetric_poincare(sys.rank + 1)
        certs.append(residual("Poincare polynomial = prod [k]_q", int(poly != ref), 0,
                              coefficients=poly))
    n_long = int(np.sum(sys.lengths == sys.lengths.max()))
    certs.append(residual("unique longest element", abs(n_long - 1), 0,
                          longest_length=sys.longest.length))
    es = [sys.euler_solomon(g) for g in range(sys.order)]
    bad = sum(es[g] != (1 if g == sys.sigma0 else 0) for g in range(sys.order))
    certs.append(residual("Euler-Solomon indicator", bad, 0))
    worst = 0
    for k in range(sys.rank + 1):
        for J in itertools.combinations(sorted(sys.generators), k):
            sub, _, _ = sys.parabolic(J)
            worst = max(worst, abs(len(sys.coset_minima(J)) * sub.order - sys.order))
    certs.append(residual("|D_J| |W_J| = |W| for all J", worst, 0))
    if sys.order <= BLOCKSET_MAX_ORDER:
        ambiguous = sum(len(s) != 1 for s in sys.all_block_sets())
        certs.append(residual("block set independent of reduced word", ambiguous, 0))


def _positivity_family(spec: ScenarioSpec, sys: CoxeterSystem) -> qmap.OperatorFamily:
    if spec.q is not None or spec.tensor is not None:
        return fock.family(_tensor(spec), sys.rank + 1)
    value = DEFAULT_SCALAR if spec.scalar is None else spec.scalar
    return qmap.OperatorFamily.scalar(sys.matrix, value)


def run_positivity(spec: ScenarioSpec, rep: Report):
    sys = build_system(spec.coxeter())
    fam = _positivity_family(spec, sys)
    certs = rep.certificates
    valid = qmap.validate_family(fam)
    certs.extend(valid)
    if not all(c.passed for c in valid):
        rep.notes["skipped"] = "family is not a braided Hermitian contraction family"
        return
    strict = all(c.context.get("strict", True) for c in valid if c.label.startswith("contraction"))
    table = qmap.phi_table(sys, fam)
    tol = spec.tol("residual")
    full = qmap.p_of(sys, fam, table=table)
    scale = max(1.0, qmap.opnorm(full))
    certs.append(qmap.alternating_sum_check(sys, fam, tol * scale, table))
    for k in range(sys.rank + 1):
        for J in itertools.combinations(sorted(sys.generators), k):
            certs.append(qmap.factorization_check(sys, fam, J, tol * scale, table))
    certs.append(qmap.positivity_certificate(full, spec.tol("psd"), strict, "P(W) >= 0"))
    rep.notes["family_dim"] = fam.dim
    if sys.order * fam.dim <= qmap.CP_MAX_ROWS:
        certs.append(qmap.cp_gram_certificate(sys, table, spec.tol("psd")))
    else:
        rep.notes["cp_gram"] = "skipped: block Gram exceeds the row limit"


def run_blocklength(spec: ScenarioSpec, rep: Report):
    sys = build_system(spec.coxeter())
    q = DEFAULT_SCALAR if spec.scalar is None else spec.scalar
    fam = qmap.OperatorFamily.scalar(sys.matrix, q)
    valid = qmap.validate_blocklength_family(fam)
    rep.certificates.extend(valid)
    if not all(c.passed for c in valid):
        rep.notes["skipped"] = "block-length family needs commuting 0 <= T_i <= 1"
        return
    rep.certificates.append(qmap.blocklength_cp(sys, fam, check=False))
    if sys.order <= THRESHOLD_MAX_ORDER:
        m0 = qmap.scalar_blocklength_min_eig(sys, -1.0)
        if m0 < -spec.tol("psd"):
            rep.notes["negative_threshold"] = qmap.blocklength_threshold(
                sys, psd_tol=spec.tol("psd"))
        else:
            rep.notes["negative_threshold"] = "kernel PSD down to q = -1"


def _tensor(spec: ScenarioSpec) -> fock.DeformationTensor:
    if spec.q is not None:
        return fock.from_q(spec.q_array())
    return fock.DeformationTensor(spec.tensor_array())


def run_fock(spec: ScenarioSpec, rep: Report):
    tensor = _tensor(spec)
    certs = rep.certificates
    valid = fock.validate(tensor)
    certs.extend(valid)
    if not all(c.passed for c in valid):
        rep.notes["skipped"] = "tensor is not a braided Hermitian contraction"
        return
    scene = fock.build_scene(tensor, spec.levels, spec.tol("kernel_cutoff"))
    rep.notes.update(level_dims=scene.level_dims, quotient_dims=scene.quotient_dims)
    tol = spec.tol("residual")
    for i in range(scene.d):
        certs.append(fock.adjointness_residual(scene, fock.basis_vector(scene.d, i), tol))
    for i in range(scene.d):
        for j in range(scene.d):
            certs.append(fock.relation_residual(scene, i, j, tol))
    if tensor.norm_bound < 1:
        if tensor.qspec is not None:
            certs.extend(fock.norm_suite(scene, spec.tol("norm")))
        certs.append(fock.r_norm_certificate(scene, spec.tol("norm")))
        f = np.random.default_rng(spec.seed).standard_normal(scene.d) + 0j
        certs.append(fock.creation_norm_certificate(scene, f, spec.tol("norm")))


def run_wick(spec: ScenarioSpec, rep: Report):
    qs = fock.QSpec(spec.q_array())
    tol = spec.tol("residual")
    if spec.word is not None:
        words = [spec.word]
    else:
        top = spec.max_degree or 4
        words = [w for m in range(2, top + 1, 2)
                 for w in itertools.product(range(1, qs.d + 1), repeat=m)]
    longest = max((len(w) for w in words), default=2)
    scene = fock.build_scene(fock.from_q(qs), max(spec.levels, (longest + 1) // 2),
                             spec.tol("kernel_cutoff"))
    worst, moments = 0.0, {}
    for w in words:
        c = wick.compare(wick.MomentQuery(w, qs), scene, tol)
        worst = max(worst, c.value)
        if len(words) == 1:
            rep.certificates.append(c)
            moments["".join(map(str, w))] = c.context["diagram"]
    if len(words) > 1:
        label = f"diagram vs matrix moments, {len(words)} words"
        rep.certificates.append(residual(label, worst, tol))
    rep.notes["moments"] = moments
    traces = wick.traciality_check(qs, spec.max_degree or 4, tol)
    rep.notes.update(tracial_structure=traces[0].to_dict(), tracial_empirical=traces[1].to_dict())


def run_opspace(spec: ScenarioSpec, rep: Report):
    tensor = _tensor(spec)
    scene = fock.build_scene(tensor, spec.levels, spec.tol("kernel_cutoff"))
    trials = 0 if spec.trials is None else spec.trials
    reports = opspace.sandwich_check(spec.seed, trials, spec.aux_dim or 2, scene)
    for r in reports:
        rep.certificates.extend(r.certificates())
    rep.notes["trials"] = [dict(lower=r.lower, middle=r.middle, upper=r.upper) for r in reports]
    if spec.m is not None:
        inj, certs = opspace.injectivity_witness(spec.m, scene, spec.tol("injectivity"), spec.seed)
        rep.certificates.extend(certs)
        rep.notes["injectivity"] = dict(norm=inj.norm, bound=inj.bound, trace=inj.trace_side,
                                        contradiction_needs_m_above=inj.threshold_m)


PIPELINES = {
    "coxeter": run_coxeter,
    "positivity": run_positivity,
    "blocklength": run_blocklength,
    "fock": run_fock,
    "wick": run_wick,
    "opspace": run_opspace,
}


def run(spec: ScenarioSpec) -> Report:
    rep = Report(scenario=to_mapping(spec))
    start = time.perf_counter()
    try:
        PIPELINES[spec.kind](spec, rep)
    except tuple(ERROR_CODES) as exc:
        code = next(c for t, c in ERROR_CODES.items() if isinstance(exc, t))
        rep.error = {"code": code, "message": str(exc)}
    rep.duration = time.perf_counter() - start
    return rep

