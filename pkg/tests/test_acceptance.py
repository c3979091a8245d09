"""Acceptance criteria, one test each, each printing a single PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for just the summary lines,
or under pytest where the lines are repeated in the terminal summary.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coxfock.coxeter import build_system, coxeter_matrix, symmetric_poincare  # noqa: E402
from coxfock.fock import (  # noqa: E402
    QSpec, adjointness_residual, annihilation, basis_vector, build_pn, build_scene,
    creation_norm_certificate, family, from_q, q_annihilation_block, r_norm_certificate,
    relation_residual, t_norm,
)
from coxfock.opspace import injectivity_witness, sandwich_check  # noqa: E402
from coxfock.qmap import (  # noqa: E402
    OperatorFamily, blocklength_cp, blocklength_threshold, cp_gram_certificate,
    factorization_check, alternating_sum_check, min_eig, phi_table, scalar_blocklength_min_eig,
)
from coxfock.scenario import random_hermitian  # noqa: E402
from coxfock.wick import MomentQuery, compare, moment, traciality_check  # noqa: E402

RESULTS: list[str] = []


def record(number, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = (f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}  [{detail}; "
            f"{elapsed:.2f} s of {limit:g} s]")
    RESULTS.append(line)
    print(line)
    return ok


def q_spec(seed, d, bound):
    return random_hermitian(np.random.default_rng(seed), d, bound)


def criterion_1():
    start = time.perf_counter()
    worst_poly = worst_es = worst_coset = 0
    for n in range(2, 7):
        sys_ = build_system(coxeter_matrix(f"A{n - 1}"))
        worst_poly = max(worst_poly, int(sys_.poincare_coefficients() != symmetric_poincare(n)))
        worst_es = max(worst_es, sum(
            sys_.euler_solomon(g) != (g == sys_.sigma0) for g in range(sys_.order)))
        for k in range(n):
            for J in itertools.combinations(range(1, n), k):
                sub, _, _ = sys_.parabolic(J)
                worst_coset = max(worst_coset,
                                  abs(len(sys_.coset_minima(J)) * sub.order - sys_.order))
    ok = worst_poly == worst_es == worst_coset == 0
    detail = f"poly mismatches {worst_poly}, E-S failures {worst_es}, coset defect {worst_coset}"
    return record(1, "Coxeter exactness, S_n for n <= 6", ok, detail,
                  time.perf_counter() - start, 5)


def criterion_2():
    start = time.perf_counter()
    worst = 0.0
    for n in (3, 4):
        sys_ = build_system(coxeter_matrix(f"A{n - 1}"))
        for seed in range(5):
            fam = family(from_q(q_spec(100 + seed, 2, 0.9)), n)
            table = phi_table(sys_, fam)
            worst = max(worst, alternating_sum_check(sys_, fam, table=table).value)
            for k in range(n):
                for J in itertools.combinations(range(1, n), k):
                    worst = max(worst, factorization_check(sys_, fam, J, table=table).value)
    return record(2, "alternating sum over D_J and P(W) factorization", worst <= 1e-10,
                  f"max residual {worst:.2e} <= 1e-10", time.perf_counter() - start, 10)


def criterion_3():
    start = time.perf_counter()
    bounds = np.linspace(0.2, 1.0, 25)
    worst, worst_strict = np.inf, np.inf
    for k, bound in enumerate(bounds):
        t = from_q(q_spec(200 + k, 2, bound))
        for n in range(1, 6):
            m0 = min_eig(build_pn(t, n))
            worst = min(worst, m0)
            if bound <= 0.9:
                worst_strict = min(worst_strict, m0)
    ok = worst >= -1e-8 and worst_strict > 0
    detail = f"min eig {worst:.3e} >= -1e-8; min eig for bound <= 0.9 {worst_strict:.3e} > 0"
    return record(3, "positivity of P^(n), n <= 5", ok, detail, time.perf_counter() - start, 60)


def criterion_4():
    start = time.perf_counter()
    s3 = build_system(coxeter_matrix("A2"))
    worst = np.inf
    for seed in range(10):
        fam = family(from_q(q_spec(300 + seed, 2, 1.0 if seed % 2 else 0.8)), 3)
        worst = min(worst, cp_gram_certificate(s3, fam).value)
    return record(4, "complete positivity, block Gram over S_3", worst >= -1e-8,
                  f"min eig {worst:.3e} >= -1e-8", time.perf_counter() - start, 30)


def criterion_5():
    start = time.perf_counter()
    adj = rel = oracle = 0.0
    for seed in range(10):
        q = q_spec(400 + seed, 2, 0.9)
        scene = build_scene(from_q(q), 4)
        f = np.random.default_rng(seed).standard_normal(2) + 1j * np.random.default_rng(
            seed + 1).standard_normal(2)
        for v in (basis_vector(2, 0), basis_vector(2, 1), f):
            adj = max(adj, adjointness_residual(scene, v).value)
        for i, j in itertools.product(range(2), repeat=2):
            rel = max(rel, relation_residual(scene, i, j).value)
        for i in range(2):
            a = annihilation(scene, basis_vector(2, i), raw=True).matrix
            for n in range(1, 5):
                blk = a[scene.level_slice(n - 1, True), scene.level_slice(n, True)]
                oracle = max(oracle, np.abs(blk - q_annihilation_block(q, i, n)).max())
    ok = adj <= 1e-10 and rel <= 1e-10 and oracle <= 1e-12
    detail = f"adjointness {adj:.1e}, relations {rel:.1e}, formula oracle {oracle:.1e}"
    return record(5, "Fock identities, d=2, N=4", ok, detail, time.perf_counter() - start, 60)


def criterion_6():
    start = time.perf_counter()
    slack_r = slack_c = -np.inf
    for seed in range(5):
        scene = build_scene(from_q(q_spec(500 + seed, 2, 0.75)), 5)
        c = r_norm_certificate(scene)
        slack_r = max(slack_r, c.value - c.tolerance)
        rng = np.random.default_rng(seed)
        for _ in range(3):
            f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            c = creation_norm_certificate(scene, f)
            slack_c = max(slack_c, c.value - c.tolerance)
    scene = build_scene(from_q(np.array([[0.75]])), 8)
    val = t_norm(scene, annihilation(scene, [1.0]))
    rel = abs(val - 2.0) / 2.0
    ok = slack_r <= 0 and slack_c <= 0 and rel <= 0.05
    detail = (f"|R|_T excess {slack_r:.2e}, |d*(f)|_T excess {slack_c:.2e}; "
              f"d=1 truncated |d|_T = {val:.6f}, {100 * rel:.2f}% from 2 (limit 5%)")
    return record(6, "norm bounds and truncated |d|_T", ok, detail,
                  time.perf_counter() - start, 30)


def criterion_7():
    start = time.perf_counter()
    q = q_spec(700, 2, 0.9)
    spec = QSpec(q)
    scene = build_scene(from_q(spec), 3)
    worst = 0.0
    count = 0
    for m in range(1, 7):
        for w in itertools.product((1, 2), repeat=m):
            worst = max(worst, compare(MomentQuery(w, spec), scene).value)
            count += 1
    scalar = 0.37
    quartic = moment(MomentQuery((1, 1, 1, 1), QSpec(np.array([[scalar]]))))
    exact = quartic == 2 + scalar
    sym = q_spec(701, 2, 0.8).real
    sym = (sym + sym.T) / 2
    tr_sym = traciality_check(sym, max_degree=6)
    tr_herm = traciality_check(np.array([[0.0, 1j], [-1j, 0.0]]), max_degree=6)
    ok = (worst <= 1e-10 and exact and all(tr_sym) and tr_herm[1].value > 1e-6)
    detail = (f"{count} words, max diff {worst:.1e}; eps(G^4) = {quartic.real} vs {2 + scalar}; "
              f"symmetric trace gaps {tr_sym[0].value:.1e}/{tr_sym[1].value:.1e}; "
              f"Hermitian witness {tr_herm[1].value:.3f}")
    return record(7, "Wick cross-validation and traciality", ok, detail,
                  time.perf_counter() - start, 120)


def criterion_8():
    start = time.perf_counter()
    scene = build_scene(from_q(q_spec(800, 3, 0.6)), 3)
    reports = sandwich_check(0, 20, 2, scene)
    ok = len(reports) == 20 and all(r.passed for r in reports)
    ratio = max(r.middle / r.lower for r in reports)
    detail = f"{sum(r.passed for r in reports)}/20 trials, max middle/lower {ratio:.3f} " \
             f"vs {2 / math.sqrt(0.4):.3f}"
    return record(8, "operator-space sandwich", ok, detail, time.perf_counter() - start, 120)


def criterion_9():
    start = time.perf_counter()
    scene = build_scene(from_q(np.zeros((4, 4))), 3)
    rep, _ = injectivity_witness(4, scene)
    ok = rep.norm <= 4 * math.sqrt(4) + 1e-6 and rep.trace_side == 4
    detail = f"|sum G_i (x) conj G_i| = {rep.norm:.6f} <= 8; eps(sum G_i G_i) = {rep.trace_side}"
    return record(9, "non-injectivity inequality", ok, detail, time.perf_counter() - start, 120)


def criterion_10():
    start = time.perf_counter()
    s4 = build_system(coxeter_matrix("A3"))
    psd = [blocklength_cp(s4, OperatorFamily.scalar(s4.matrix, q)).passed
           for q in (0.0, 0.25, 0.5, 0.75, 1.0)]
    alpha = blocklength_threshold(s4)
    below = scalar_blocklength_min_eig(s4, alpha - 0.05)
    ok = all(psd) and below < -1e-8
    detail = f"PSD at 5 nonnegative q: {all(psd)}; alpha_4 ~ {alpha:.6f}, " \
             f"min eig at alpha-0.05 = {below:.3e}"
    return record(10, "block-length kernel on S_4", ok, detail, time.perf_counter() - start, 30)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 11)])
def test_criterion(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
