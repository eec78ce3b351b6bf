"""Acceptance criteria.

Each test covers one numbered criterion and prints a single pass/fail
line (visible with pytest -s); the assertion carries the same condition.
"""

import math

import numpy as np
import pytest

import loopsoup as ls
from loopsoup.graph import EnergyForm

N_MC = 100_000


def _report(num, desc, ok):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {desc}", flush=True)
    assert ok, f"criterion {num} failed: {desc}"


@pytest.fixture(scope="module")
def p2():
    return ls.load_energy_form(ls.fixture("p2"))


@pytest.fixture(scope="module")
def k4c1():
    return ls.load_energy_form(ls.fixture("k4c1"))


@pytest.fixture(scope="module")
def k4_rooted():
    return ls.load_energy_form(ls.fixture("k4_rooted"))


@pytest.fixture(scope="module")
def cube():
    return ls.load_energy_form(ls.fixture("cube"))


def test_01_exact_green_fixture(k4c1):
    G = ls.green(k4c1).G
    ok = np.max(np.abs(G - (np.eye(4) + 1.0) / 5)) < 1e-12
    _report(1, "green(K4c1) equals (1/5)(I+J) entrywise to 1e-12", ok)


def test_02_loop_mass_identity(p2, k4c1):
    ok = abs(ls.mu_nontrivial_total(p2) - math.log(4 / 3)) < 1e-12
    for e in (p2, k4c1):
        loops, tail = ls.enumerate_loops(e, 14)
        total = sum(m for _, m in loops)
        ok = ok and abs(total - ls.mu_nontrivial_total(e)) <= tail
    _report(2, "enumerated loop masses bracket -log det(I-P) within the tail bound", ok)


def test_03_determinant_consistency_web(p2, k4c1, k4_rooted):
    ok = True
    rng = np.random.default_rng(33)
    for e in (p2, k4c1):
        G = ls.green(e).G
        done = 0
        while done < 20:
            chi = rng.uniform(0.05, 2.0, size=e.n)
            Gchi = ls.green_chi(e, chi)
            # resolvent identity
            ok = ok and np.allclose(G - Gchi, G @ np.diag(chi) @ Gchi, atol=1e-9)
            k = int(rng.integers(1, e.n))
            keep = sorted(rng.choice(e.n, size=k, replace=False))
            drop = [v for i, v in enumerate(e.vertices) if i not in keep]
            eD = ls.restrict(e, drop)
            eF = ls.trace_on(e, [e.vertices[i] for i in keep])
            # Jacobi
            ok = ok and abs(
                np.linalg.det(ls.green(eD).G)
                - np.linalg.det(G) / np.linalg.det(G[np.ix_(keep, keep)])
            ) < 1e-9
            # Z factorization
            ok = ok and abs(
                ls.green(e).logdet_G - ls.green(eD).logdet_G - ls.green(eF).logdet_G
            ) < 1e-9
            done += 1
    # root independence of Z^0: Laplacian minors agree for every root
    L = k4_rooted.laplacian()
    minors = [
        np.linalg.det(np.delete(np.delete(L, i, 0), i, 1)) for i in range(k4_rooted.n)
    ]
    ok = ok and max(abs(m - minors[0]) for m in minors) < 1e-9
    _report(3, "Res/Jacobi/Z-factorization at 1e-9 over 20 random splits; Z^0 root-independent", ok)


@pytest.fixture(scope="module")
def occupation_report(p2):
    return ls.verify_occupation_marginals(p2, n_samples=N_MC, rng=ls.RngStream(104))


def test_04_gamma_marginal(occupation_report):
    checks = [c for c in occupation_report.checks if "KS" in c.name]
    ok = len(checks) == 3 and all(c.passed and c.p_value > 0.001 for c in checks)
    _report(4, "KS of sampled occupation vs Gamma(alpha, G^xx), alpha in {0.5,1,2}, p>0.001", ok)


def test_05_negative_binomial(occupation_report):
    checks = [c for c in occupation_report.checks if "geometric" in c.name]
    ok = len(checks) >= 1 and all(c.passed and c.p_value > 0.001 for c in checks)
    _report(5, "chi-square of N_x + 1 vs geometric(1/(lambda_x G^xx)), p>0.001", ok)


def test_06_dynkin_isomorphism(p2, k4c1):
    ok = True
    for e, seed in ((p2, 106), (k4c1, 107)):
        r = ls.verify_dynkin(e, k=1, n_samples=N_MC, rng=ls.RngStream(seed))
        ok = ok and r.passed
        exact = [c for c in r.checks if c.kind == "exact"]
        ok = ok and all(c.residual <= 1e-9 for c in exact)
        zs = [c for c in r.checks if c.z is not None]
        ok = ok and all(abs(c.z) < max(4.0, c.tol or 0) + 1 for c in zs)
    _report(6, "Dynkin: sampled soup/field joint moments |z|<gate; exact Isserlis at 1e-9", ok)


def test_07_wilson_cayley_and_transfer_current(p2, k4_rooted):
    r1 = ls.verify_transfer_current(k4_rooted, n_samples=N_MC, rng=ls.RngStream(108), root="a")
    r2 = ls.verify_transfer_current(p2, n_samples=N_MC, rng=ls.RngStream(109))
    chi = [c for c in r1.checks if c.kind == "pvalue"]
    ok = r1.passed and r2.passed and chi and all(c.p_value > 0.001 for c in chi)
    # P2 edge inclusion 2/3 appears as an exact transfer determinant too
    ok = ok and abs(
        p2.C[0, 1] * np.linalg.det(ls.transfer_matrix(p2, [("x", "y")]).K) - 2 / 3
    ) < 1e-12
    _report(7, "Wilson/Cayley 16 trees chi-square p>0.001; edge inclusions within 4 SE", ok)


def test_08_erased_loop_equivalence(k4c1):
    rng = ls.RngStream(110)
    n = 30_000
    occ = np.zeros((n, 4))
    trav01 = np.zeros(n)
    for i in range(n):
        _, ens = ls.wilson_sample(k4c1, rng)
        occ[i] = ens.occupation()
        trav01[i] = ens.traversals()[0, 1]
    G = ls.green(k4c1).G
    ok = True
    for j in range(4):
        se = occ[:, j].std(ddof=1) / math.sqrt(n)
        ok = ok and abs(occ[:, j].mean() - G[j, j]) < 4 * se
    se = trav01.std(ddof=1) / math.sqrt(n)
    ok = ok and abs(trav01.mean() - G[0, 1] * k4c1.C[0, 1]) < 4 * se
    _report(8, "Wilson erased loops match alpha=1 soup network statistics within 4 SE", ok)


def test_09_loop_erasure_law(p2, k4c1):
    r1 = ls.verify_loop_erasure(k4c1, "a", "b", n_samples=N_MC, rng=ls.RngStream(111))
    r2 = ls.verify_loop_erasure(p2, "x", "y", n_samples=N_MC, rng=ls.RngStream(112))
    tv = [c for c in r1.checks if "TV" in c.name]
    direct = [c for c in r2.checks if "cemetery" in c.name]
    ok = r1.passed and r2.passed and tv and tv[0].residual < 0.01
    ok = ok and direct and abs(direct[0].z) < 4
    _report(9, "LERW bridge law TV<0.01; straight-to-cemetery = kappa_x G^xx within 4 SE", ok)


def test_10_ihara_zeta(k4_rooted, cube):
    ra = ls.verify_zeta(k4_rooted, m_max=8)
    rb = ls.verify_zeta(cube, m_max=8)
    za = ls.zeta_ihara(k4_rooted, [0.1], 8)
    zb = ls.zeta_ihara(cube, [0.1], 8)
    ok = ra.passed and rb.passed and za.N[2] == 24 and zb.N[3] == 48
    _report(10, "three-way N_m agreement m<=8; N_3(K4)=24, N_4(cube)=48", ok)


def test_11_reflection_positivity():
    mir = ls.load_energy_form(ls.fixture("mirror_p2"))
    cex = ls.load_energy_form(ls.fixture("counterexample"))
    r1 = ls.verify_reflection_positivity(mir, ls.default_involution(mir))
    r2 = ls.verify_reflection_positivity(
        cex, ls.default_involution(cex), counterexample_sets=(("al", "be"), ("ga", "de"))
    )
    neg = [c for c in r2.checks if "strictly negative" in c.name]
    ok = r1.passed and r2.passed and neg and neg[0].residual < 0
    _report(11, "PSD Gram on symmetric fixture; strictly negative counterexample value", ok)


def test_12_energy_variation(k4c1):
    kap = k4c1.kappa.copy()
    kap[0] += 0.7
    e_kap = EnergyForm(k4c1.vertices, k4c1.C, kap)
    C2 = k4c1.C.copy()
    C2[0, 1] = C2[1, 0] = 0.6
    e_cond = EnergyForm(k4c1.vertices, C2, k4c1.kappa + (k4c1.C - C2).sum(axis=1))
    omega = {("a", "b"): 0.4, ("c", "d"): -0.3}
    ok = True
    for e2, om, seed in ((e_kap, None, 113), (e_cond, None, 114), (k4c1, omega, 115)):
        r = ls.verify_energy_variation(
            k4c1, e2, omega=om, alpha=1.0, n_samples=N_MC, rng=ls.RngStream(seed)
        )
        ok = ok and r.passed
        schwinger = [c for c in r.checks if "Schwinger" in c.name]
        ok = ok and schwinger and schwinger[0].residual < 1e-5
    _report(12, "multiplicative functional vs (Z'/Z)^alpha within 4 SE; Schwinger < 1e-5", ok)


def test_13_cross_hitting(p2, k4c1):
    s1, t1, v1 = ls.cross_hitting_series(p2, ["x"], ["y"])
    s2, t2, v2 = ls.cross_hitting_series(k4c1, ["a"], ["b"])
    ok = abs(v1 - math.log(4 / 3)) < 1e-12
    ok = ok and abs(s1 - v1) <= t1 + 1e-12 and abs(s2 - v2) <= t2 + 1e-12
    _report(13, "cross-hitting series equals the log-det value within the geometric tail", ok)


def test_14_wreath_identity():
    k3 = ls.load_energy_form(ls.fixture("k3_wreath"))
    ns = {"a": 2, "b": 2, "c": 2}
    total = ls.mu_nontrivial_total(ls.build_wreath(k3, ns))
    approx, tail = ls.wreath_identity_sum(k3, ns, 14)
    ok = abs(total - approx) <= tail + 1e-12
    _report(14, "wreath identity reproduces -log det(I-P~) within the enumeration tail", ok)


def test_15_reproducibility(p2):
    a = ls.verify_dynkin(p2, k=1, n_samples=20_000, rng=ls.RngStream(200)).to_json()
    b = ls.verify_dynkin(p2, k=1, n_samples=20_000, rng=ls.RngStream(200)).to_json()
    import json

    da, db = json.loads(a), json.loads(b)
    ok = da["checks"] == db["checks"]
    _report(15, "Monte Carlo criteria are byte-identical under a fixed seed", ok)
