"""Seed-deterministic samplers: discrete loops, Poisson loop soups,
bridges, Gaussian free fields and Wilson's algorithm.

All samplers consume a counter-based RngStream (or any numpy Generator)
and are bit-reproducible for a fixed (seed, stream, call sequence).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermitenorm, exp1

from .exact import green
from .graph import GraphError
from .loops import PointedLoop, mu_nontrivial_total, spectral_radius
from .rng import as_generator

__all__ = [
    "LoopEnsemble",
    "SpanningTree",
    "FieldSample",
    "PointedLoopSampler",
    "sample_pointed_loop",
    "sample_loop_soup",
    "sample_bridge",
    "sample_gff",
    "wick_power",
    "wilson_sample",
    "loop_erase",
]


@dataclass
class LoopEnsemble:
    """A sampled loop soup: nontrivial pointed loops plus the aggregated
    trivial-loop occupation per vertex."""

    vertices: tuple
    alpha: float
    loops: list
    trivial: np.ndarray
    trivial_points: dict = field(default_factory=dict)

    def occupation(self):
        """Occupation field L-hat over the vertex list."""
        index = {v: i for i, v in enumerate(self.vertices)}
        occ = self.trivial.astype(float).copy()
        for loop in self.loops:
            for v, t in zip(loop.vertices, loop.taus):
                occ[index[v]] += t
        return occ

    def traversals(self):
        """Oriented-edge traversal counts N_{x,y} as a dense matrix."""
        index = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)
        N = np.zeros((n, n), dtype=int)
        for loop in self.loops:
            p = loop.p
            for i in range(p):
                N[index[loop.vertices[i]], index[loop.vertices[(i + 1) % p]]] += 1
        return N

    def visit_counts(self):
        """Vertex visit counts N_x over nontrivial loops."""
        index = {v: i for i, v in enumerate(self.vertices)}
        N = np.zeros(len(self.vertices), dtype=int)
        for loop in self.loops:
            for v in loop.vertices:
                N[index[v]] += 1
        return N


@dataclass
class SpanningTree:
    """Rooted oriented spanning tree: child -> parent, with None standing
    for the cemetery root of a transient chain."""

    parent: dict
    root: object  # vertex name, or None for the cemetery

    def key(self):
        """Canonical hashable identity of the tree (for frequency counts)."""
        return tuple(sorted(self.parent.items(), key=lambda kv: str(kv[0])))

    def edges(self):
        return [(c, p) for c, p in self.parent.items() if p is not None]

    def contains_edge(self, x, y):
        """Whether the undirected edge {x, y} is in the tree."""
        return self.parent.get(x) == y or self.parent.get(y) == x


@dataclass
class FieldSample:
    vertices: tuple
    phi: np.ndarray
    complex_field: bool = False

    def value(self, x):
        return self.phi[self.vertices.index(x)]


class PointedLoopSampler:
    """Exact sampler for the normalized nontrivial loop measure.

    Draws the length k with probability (Tr(P^k)/k) / mu(p>1), the base
    point proportionally to the diagonal of P^k, then the intermediate
    vertices by conditioned transitions; holding times are exp(1)/lambda.
    """

    def __init__(self, e, k_cap=None):
        if not e.transient:
            raise GraphError("loop sampling requires a transient chain")
        self.e = e
        self.total = mu_nontrivial_total(e)
        if self.total <= 0:
            raise GraphError("no nontrivial loops on this chain")
        rho = spectral_radius(e)
        if k_cap is None:
            k_cap = 8
            while e.n * rho ** (k_cap + 1) / ((k_cap + 1) * (1 - rho)) > 1e-12 * self.total:
                k_cap *= 2
                if k_cap > 1 << 16:
                    raise GraphError("length cap growth failed")
        self.k_cap = k_cap
        self.powers = [np.eye(e.n), e.P.copy()]
        for _ in range(2, k_cap + 1):
            self.powers.append(self.powers[-1] @ e.P)
        probs = np.zeros(k_cap + 1)
        for k in range(2, k_cap + 1):
            probs[k] = np.trace(self.powers[k]) / k
        self.length_probs = probs / probs.sum()

    def sample(self, rng):
        gen = as_generator(rng)
        k = int(gen.choice(self.k_cap + 1, p=self.length_probs))
        diag = np.diag(self.powers[k]).copy()
        base = int(gen.choice(self.e.n, p=diag / diag.sum()))
        seq = [base]
        for i in range(1, k):
            u = seq[-1]
            w = self.e.P[u, :] * self.powers[k - i][:, base]
            seq.append(int(gen.choice(self.e.n, p=w / w.sum())))
        taus = gen.standard_exponential(k) / self.e.lam[seq]
        return PointedLoop(
            tuple(self.e.vertices[i] for i in seq), tuple(float(t) for t in taus)
        )


def sample_pointed_loop(e, rng, k_cap=None):
    return PointedLoopSampler(e, k_cap).sample(rng)


def _sample_trivial_points(lam, alpha, gen, cutoff):
    """Points of the Poisson process with intensity alpha e^{-lam t}/t dt
    above the cutoff (the individual trivial-loop occupations at a vertex)."""
    w1 = exp1(lam * cutoff) - exp1(1.0)  # mass on (cutoff, 1/lam)
    w2 = exp1(1.0)  # mass on (1/lam, inf)
    count = gen.poisson(alpha * (w1 + w2))
    points = []
    for _ in range(count):
        if gen.random() * (w1 + w2) < w1:
            while True:
                t = cutoff * np.exp(gen.random() * np.log(1.0 / (lam * cutoff)))
                if gen.random() < np.exp(-lam * t):
                    points.append(t)
                    break
        else:
            while True:
                t = (1.0 + gen.standard_exponential()) / lam
                if gen.random() < 1.0 / (lam * t):
                    points.append(t)
                    break
    return np.array(points)


def sample_loop_soup(e, alpha, rng, k_cap=None, trivial_detail_vertex=None):
    """Poisson ensemble L_alpha: Poisson(alpha mu(p>1)) nontrivial loops
    plus Gamma(alpha, rate lambda_x) aggregated trivial occupation.

    With trivial_detail_vertex, the individual trivial-loop occupations at
    that vertex are sampled explicitly (point process truncated at a
    relative cutoff 1e-10) instead of the aggregate.
    """
    gen = as_generator(rng)
    if alpha < 0:
        raise GraphError("alpha must be nonnegative")
    if alpha == 0:
        return LoopEnsemble(e.vertices, 0.0, [], np.zeros(e.n))
    sampler = PointedLoopSampler(e, k_cap)
    n_loops = gen.poisson(alpha * sampler.total)
    loops = [sampler.sample(gen) for _ in range(n_loops)]
    trivial = np.array([gen.gamma(alpha, 1.0 / l) for l in e.lam])
    detail = {}
    if trivial_detail_vertex is not None:
        i = e.index[trivial_detail_vertex]
        points = _sample_trivial_points(e.lam[i], alpha, gen, cutoff=1e-10 / e.lam[i])
        trivial[i] = points.sum()
        detail[trivial_detail_vertex] = points
    return LoopEnsemble(e.vertices, alpha, loops, trivial, detail)


@dataclass
class BridgePath:
    """Open path sampled from the normalized bridge measure mu^{x,y}/G^{x,y}."""

    vertices: tuple
    taus: tuple

    def occupation(self):
        occ = {}
        for v, t in zip(self.vertices, self.taus):
            occ[v] = occ.get(v, 0.0) + t
        return occ


def sample_bridge(e, x, y, rng, max_steps=10**7):
    """Bridge from x to y: at u, stop with probability delta_{u,y}/V^u_y,
    else move to z with probability P^u_z V^z_y / V^u_y (V = (I-P)^{-1}).
    Holding times exp(1)/lambda at every position including the last."""
    if not e.transient:
        raise GraphError("bridge sampling requires a transient chain")
    gen = as_generator(rng)
    i, j = e.index[x], e.index[y]
    V = np.linalg.inv(np.eye(e.n) - e.P)
    if V[i, j] <= 0:
        raise GraphError(f"{y!r} unreachable from {x!r}")
    seq = [i]
    for _ in range(max_steps):
        u = seq[-1]
        if u == j and gen.random() < 1.0 / V[u, j]:
            break
        w = e.P[u, :] * V[:, j]
        seq.append(int(gen.choice(e.n, p=w / w.sum())))
    else:
        raise GraphError("bridge failed to terminate")
    taus = gen.standard_exponential(len(seq)) / e.lam[seq]
    return BridgePath(
        tuple(e.vertices[k] for k in seq), tuple(float(t) for t in taus)
    )


def sample_gff(e, rng, complex_field=False):
    """Gaussian free field with covariance G (E[phi phi-bar] = 2G in the
    complex case)."""
    gen = as_generator(rng)
    G = green(e).G
    try:
        Lf = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as err:
        raise GraphError("Green matrix is not numerically positive definite") from err
    phi = Lf @ gen.standard_normal(e.n)
    if complex_field:
        phi = phi + 1j * (Lf @ gen.standard_normal(e.n))
    return FieldSample(e.vertices, phi, complex_field)


def wick_power(gxx, value, n):
    """:phi^n: = G^{n/2} He_n(phi / sqrt(G)) with He_n the probabilists'
    Hermite polynomial."""
    s = np.sqrt(gxx)
    return gxx ** (n / 2.0) * eval_hermitenorm(n, np.asarray(value) / s)


def loop_erase(path):
    """Progressive erasure of based sub-loops from the origin; returns a
    self-avoiding path."""
    out = []
    pos = {}
    for v in path:
        if v in pos:
            for w in out[pos[v] + 1 :]:
                del pos[w]
            del out[pos[v] + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def wilson_sample(e, rng, vertex_order=None, root=None):
    """Wilson's algorithm: iterated loop-erased walks building a spanning
    tree, together with the ensemble of erased loops.

    Transient chains are rooted at the cemetery (root=None in the tree);
    recurrent chains need an explicit root vertex.  Every walk visit
    carries an exp(1)/lambda holding time; erased visits accumulate into
    the erased loops, the surviving visit of each tree vertex becomes its
    trivial occupation.
    """
    gen = as_generator(rng)
    n = e.n
    if e.transient:
        if root is not None:
            raise GraphError("root only applies to recurrent chains")
        step_probs = np.hstack([e.P, (e.kappa / e.lam)[:, None]])  # column n = cemetery
    else:
        if root is None:
            raise GraphError("recurrent chain needs an explicit root")
        step_probs = np.hstack([e.P, np.zeros((n, 1))])
    in_tree = np.zeros(n, dtype=bool)
    parent = {}
    trivial = np.zeros(n)
    erased = []
    if root is not None:
        in_tree[e.index[root]] = True
    order = list(vertex_order) if vertex_order is not None else list(e.vertices)
    for start_name in order:
        start = e.index[start_name]
        if in_tree[start]:
            continue
        stack = [(start, float(gen.standard_exponential()) / e.lam[start])]
        pos = {start: 0}
        terminal = None
        while True:
            u = stack[-1][0]
            nxt = int(gen.choice(n + 1, p=step_probs[u]))
            if nxt == n or in_tree[nxt]:
                terminal = None if nxt == n else nxt
                break
            tau = float(gen.standard_exponential()) / e.lam[nxt]
            if nxt in pos:
                i = pos[nxt]
                cycle = stack[i:]
                erased.append(
                    PointedLoop(
                        tuple(e.vertices[v] for v, _ in cycle),
                        tuple(t for _, t in cycle),
                    )
                )
                for v, _ in cycle:
                    del pos[v]
                del stack[i:]
            stack.append((nxt, tau))
            pos[nxt] = len(stack) - 1
        for idx_in_stack, (v, tau) in enumerate(stack):
            nxt_v = (
                stack[idx_in_stack + 1][0]
                if idx_in_stack + 1 < len(stack)
                else terminal
            )
            parent[e.vertices[v]] = e.vertices[nxt_v] if nxt_v is not None else None
            in_tree[v] = True
            trivial[v] = tau
    tree = SpanningTree(parent, root)
    ensemble = LoopEnsemble(e.vertices, 1.0, erased, trivial)
    return tree, ensemble
