"""Command line surface.

Subcommands: green, mu, sample, wilson, gff, zeta, verify, fixtures.
Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

import argparse
import json
import sys

import numpy as np

from . import fixtures as fixture_mod
from .exact import green, green_chi
from .graph import GraphError, load_energy_form
from .loops import enumerate_loops, mu_hit_avoid, mu_nontrivial_total
from .rng import RngStream
from .samplers import sample_gff, sample_loop_soup, wilson_sample
from .verify import (
    default_involution,
    verify_dynkin,
    verify_energy_variation,
    verify_loop_erasure,
    verify_occupation_marginals,
    verify_reflection_positivity,
    verify_transfer_current,
    verify_zeta,
)
from .zeta import zeta_ihara

SUITES = (
    "dynkin",
    "transfer_current",
    "loop_erasure",
    "reflection",
    "energy_variation",
    "zeta",
    "occupation",
)


def _emit(args, payload, text=None):
    out = json.dumps(payload, indent=2) if (args.json or text is None) else text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _parse_chi(e, raw):
    chi = np.zeros(e.n)
    if raw:
        for v, val in json.loads(raw).items():
            chi[e.index[v]] = float(val)
    return chi


def cmd_green(args):
    e = load_energy_form(args.graph)
    bundle = green(e)
    payload = bundle.to_dict()
    if args.chi:
        payload["G_chi"] = green_chi(e, _parse_chi(e, args.chi)).tolist()
    lines = ["G (" + " ".join(e.vertices) + ")"]
    lines += ["  " + " ".join(f"{v:.6f}" for v in row) for row in bundle.G]
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_mu(args):
    e = load_energy_form(args.graph)
    payload = {"mu_nontrivial_total": mu_nontrivial_total(e)}
    if args.set:
        mass, prob = mu_hit_avoid(e, args.set, args.set2 or (), args.alpha)
        payload["hit"] = args.set
        payload["avoid"] = args.set2 or []
        payload["mass"] = mass
        payload["no_such_loop_probability"] = prob
    if args.k_cap:
        loops, tail = enumerate_loops(e, args.k_cap)
        payload["enumerated_loops"] = len(loops)
        payload["enumerated_mass"] = sum(m for _, m in loops)
        payload["tail_bound"] = tail
    _emit(args, payload, json.dumps(payload, indent=2))
    return 0


def cmd_sample(args):
    e = load_energy_form(args.graph)
    rng = RngStream(args.seed)
    summaries = []
    for _ in range(args.samples):
        ens = sample_loop_soup(e, args.alpha, rng, k_cap=args.k_cap)
        summaries.append(
            {
                "n_loops": len(ens.loops),
                "occupation": dict(zip(e.vertices, ens.occupation().tolist())),
            }
        )
    payload = {"alpha": args.alpha, "seed": args.seed, "samples": summaries}
    _emit(args, payload)
    return 0


def cmd_wilson(args):
    e = load_energy_form(args.graph)
    rng = RngStream(args.seed)
    root = args.root if args.root else (None if e.transient else e.vertices[0])
    trees = []
    for _ in range(args.samples):
        tree, ens = wilson_sample(e, rng, root=root)
        trees.append(
            {
                "parent": {c: p for c, p in tree.parent.items()},
                "erased_loops": len(ens.loops),
            }
        )
    _emit(args, {"seed": args.seed, "trees": trees})
    return 0


def cmd_gff(args):
    e = load_energy_form(args.graph)
    rng = RngStream(args.seed)
    fields = []
    for _ in range(args.samples):
        f = sample_gff(e, rng, complex_field=args.complex)
        phi = f.phi.tolist() if not args.complex else [[z.real, z.imag] for z in f.phi]
        fields.append(dict(zip(e.vertices, phi)))
    _emit(args, {"seed": args.seed, "fields": fields})
    return 0


def cmd_zeta(args):
    e = load_energy_form(args.graph)
    degrees = e.C.sum(axis=1)
    u_hi = 1.0 / max(1.0, degrees.max() - 1.0)
    grid = [float(u) for u in args.u_grid.split(",")] if args.u_grid else [0.2 * u_hi, 0.5 * u_hi]
    report = zeta_ihara(e, grid, args.m_max)
    _emit(args, report.to_dict())
    return 0


def cmd_verify(args):
    e = load_energy_form(args.graph)
    seed = args.seed
    n = args.samples
    rng = RngStream(seed)
    suite = args.suite
    if suite == "dynkin":
        report = verify_dynkin(e, k=1, n_samples=n, rng=rng, fixture=args.graph)
    elif suite == "transfer_current":
        root = None if e.transient else e.vertices[0]
        report = verify_transfer_current(e, n_samples=n, rng=rng, root=root, fixture=args.graph)
    elif suite == "loop_erasure":
        x, y = e.vertices[0], e.vertices[1]
        report = verify_loop_erasure(e, x, y, n_samples=n, rng=rng, fixture=args.graph)
    elif suite == "reflection":
        rho = default_involution(e)
        sets = None
        if all(v in e.index for v in ("al", "be", "ga", "de")):
            sets = (("al", "be"), ("ga", "de"))
        report = verify_reflection_positivity(e, rho, counterexample_sets=sets, fixture=args.graph)
    elif suite == "energy_variation":
        from .graph import EnergyForm

        kap = e.kappa.copy()
        kap[0] += 1.0
        e2 = EnergyForm(e.vertices, e.C, kap)
        report = verify_energy_variation(e, e2, alpha=args.alpha, n_samples=n, rng=rng, fixture=args.graph)
    elif suite == "zeta":
        report = verify_zeta(e, m_max=args.m_max, fixture=args.graph)
    elif suite == "occupation":
        report = verify_occupation_marginals(e, n_samples=n, rng=rng, fixture=args.graph)
    else:
        raise GraphError(f"unknown suite {suite!r}")
    _emit(args, report.to_dict(), report.table())
    return 0 if report.passed else 1


def cmd_fixtures(args):
    paths = fixture_mod.write_fixtures(args.output or ".")
    print("\n".join(paths))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="loopsoup")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=True):
        if graph:
            p.add_argument("graph", help="graph JSON document path")
        p.add_argument("--json", action="store_true", help="machine readable output")
        p.add_argument("-o", "--output", default=None)
        p.add_argument("--threads", type=int, default=1,
                       help="Monte Carlo shard count (results independent of it)")

    p = sub.add_parser("green")
    common(p)
    p.add_argument("--chi", default=None, help="JSON measure {vertex: value}")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("mu")
    common(p)
    p.add_argument("--set", nargs="*", default=None, help="vertices to hit")
    p.add_argument("--set2", nargs="*", default=None, help="vertices to avoid")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--k-cap", type=int, default=None, help="enumerate loops up to this length")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("sample")
    common(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("-n", "--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-cap", type=int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("wilson")
    common(p)
    p.add_argument("-n", "--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--root", default=None)
    p.set_defaults(func=cmd_wilson)

    p = sub.add_parser("gff")
    common(p)
    p.add_argument("-n", "--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--complex", action="store_true")
    p.set_defaults(func=cmd_gff)

    p = sub.add_parser("zeta")
    common(p)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--u-grid", default=None, help="comma separated u values")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("verify")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--graph", required=True)
    common(p, graph=False)
    p.add_argument("-n", "--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--m-max", type=int, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fixtures")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
