"""Discrete-observation HMM speaker recognizer with a vector-quantization front end."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import VocalTractError

EMISSION_FLOOR = 1e-6
_STOCHASTIC_TOL = 1e-9


# ---------------------------------------------------------------------------
# vector quantization


@dataclass(frozen=True)
class Codebook:
    centroids: np.ndarray
    distortion_history: tuple = ()

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centroids, dtype=float))
        if c.shape[0] < 1:
            raise VocalTractError("codebook needs at least one centroid")
        if len(np.unique(c, axis=0)) != len(c):
            raise VocalTractError("codebook centroids must be distinct")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "distortion_history", tuple(float(d) for d in self.distortion_history))

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def to_dict(self) -> dict:
        return {"centroids": self.centroids.tolist(), "distortion_history": list(self.distortion_history)}

    @classmethod
    def from_dict(cls, d) -> "Codebook":
        return cls(np.array(d["centroids"], dtype=float), tuple(d.get("distortion_history", ())))


def _nearest(x, centroids):
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(-1)
    # argmin returns the first (lowest) index on ties
    idx = np.argmin(d2, axis=1)
    return idx, d2[np.arange(len(x)), idx]


def _kmeans(x, centroids, max_iter, tol, history):
    prev = None
    for _ in range(max_iter):
        idx, d2 = _nearest(x, centroids)
        # an empty cell takes the point currently worst served
        for j in range(len(centroids)):
            if not np.any(idx == j):
                far = int(np.argmax(d2))
                centroids[j] = x[far]
                idx[far] = j
                d2[far] = 0.0
        new = np.array([x[idx == j].mean(0) for j in range(len(centroids))])
        idx, d2 = _nearest(x, new)
        dist = float(d2.mean())
        centroids = new
        history.append(dist)
        if prev is not None and prev - dist <= tol * max(prev, 1e-300):
            break
        prev = dist
    return centroids


def train_codebook(features, size: int, rng: np.random.Generator, max_iter: int = 50, tol: float = 1e-6, split_eps: float = 0.01) -> Codebook:
    """LBG codebook: start from the global mean, split, refine with k-means.

    When ``size`` is not a power of two the cells with the largest
    distortion are split first. Deterministic given ``rng``.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if size < 1:
        raise VocalTractError("codebook size must be >= 1")
    n_distinct = len(np.unique(x, axis=0))
    if n_distinct < size:
        raise VocalTractError(f"need at least {size} distinct vectors, found {n_distinct}")
    centroids = x.mean(0, keepdims=True)
    history = [float(((x - centroids) ** 2).sum(1).mean())]
    while len(centroids) < size:
        idx, d2 = _nearest(x, centroids)
        cell_dist = np.array([d2[idx == j].sum() for j in range(len(centroids))])
        n_split = min(len(centroids), size - len(centroids))
        order = np.argsort(-cell_dist, kind="stable")[:n_split]
        scale = split_eps * (np.abs(centroids).mean() + 1e-12)
        new = []
        for j in order:
            delta = scale * rng.standard_normal(x.shape[1])
            new.append(centroids[j] + delta)
            centroids[j] = centroids[j] - delta
        centroids = np.vstack([centroids, np.array(new)])
        centroids = _kmeans(x, centroids, max_iter, tol, history)
    if size == 1:
        history.append(history[0])
    centroids = _dedupe(x, centroids)
    return Codebook(centroids, tuple(history))


def _dedupe(x, centroids):
    # coincident centroids: move the duplicate onto an unclaimed data point
    _, first = np.unique(centroids, axis=0, return_index=True)
    dup = sorted(set(range(len(centroids))) - set(first.tolist()))
    if dup:
        taken = {tuple(c) for c in centroids}
        pool = [p for p in np.unique(x, axis=0) if tuple(p) not in taken]
        for j, p in zip(dup, pool):
            centroids[j] = p
    return centroids


def quantize(seq, cb: Codebook) -> np.ndarray:
    """Nearest-centroid symbol per frame; ties go to the lowest index."""
    x = np.atleast_2d(np.asarray(seq, dtype=float))
    if x.shape[1] != cb.dim:
        raise VocalTractError(f"dimension mismatch: frames have {x.shape[1]}, codebook {cb.dim}")
    idx, _ = _nearest(x, cb.centroids)
    return idx.astype(int)


def distortion(features, cb: Codebook) -> float:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    return float(_nearest(x, cb.centroids)[1].mean())


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class HmmModel:
    initial: np.ndarray
    transition: np.ndarray
    emission: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pi = np.asarray(self.initial, dtype=float)
        a = np.atleast_2d(np.asarray(self.transition, dtype=float))
        b = np.atleast_2d(np.asarray(self.emission, dtype=float))
        n = pi.size
        if a.shape != (n, n) or b.shape[0] != n:
            raise VocalTractError(f"inconsistent shapes: pi {pi.shape}, A {a.shape}, B {b.shape}")
        for name, m in (("initial", pi[None, :]), ("transition", a), ("emission", b)):
            if np.any(m < 0) or not np.all(np.isfinite(m)):
                raise VocalTractError(f"{name} probabilities must be finite and non-negative")
            if np.any(np.abs(m.sum(1) - 1.0) > _STOCHASTIC_TOL):
                raise VocalTractError(f"{name} rows must sum to 1")
        for m in (pi, a, b):
            m.setflags(write=False)
        object.__setattr__(self, "initial", pi)
        object.__setattr__(self, "transition", a)
        object.__setattr__(self, "emission", b)

    @property
    def n_states(self) -> int:
        return self.initial.size

    @property
    def n_symbols(self) -> int:
        return self.emission.shape[1]

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.tolist(),
            "transition": self.transition.tolist(),
            "emission": self.emission.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d) -> "HmmModel":
        return cls(np.array(d["initial"]), np.array(d["transition"]), np.array(d["emission"]), d.get("meta", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_obs(m: HmmModel, obs) -> np.ndarray:
    o = np.asarray(obs)
    if o.ndim != 1 or o.size < 1:
        raise VocalTractError("observation sequence must be a non-empty 1-D sequence")
    if not np.issubdtype(o.dtype, np.integer):
        if not np.all(o == np.round(o)):
            raise VocalTractError("observation symbols must be integers")
        o = o.astype(int)
    if o.min() < 0 or o.max() >= m.n_symbols:
        raise VocalTractError(f"symbols must lie in [0, {m.n_symbols})")
    return o


def _forward(m: HmmModel, o):
    """Scaled forward pass: returns (alpha_hat, scale) or None if mass vanishes."""
    T, N = o.size, m.n_states
    alpha = np.empty((T, N))
    scale = np.empty(T)
    a = m.initial * m.emission[:, o[0]]
    for t in range(T):
        if t:
            a = (alpha[t - 1] @ m.transition) * m.emission[:, o[t]]
        s = a.sum()
        if not s > 0:
            return None
        scale[t] = s
        alpha[t] = a / s
    return alpha, scale


def forward_log_likelihood(m: HmmModel, obs) -> float:
    """``log P(obs | m)`` by the scaled forward algorithm.

    Returns ``-inf`` when the sequence has zero probability under ``m``.
    """
    o = _check_obs(m, obs)
    res = _forward(m, o)
    if res is None:
        return -np.inf
    return float(np.log(res[1]).sum())


def _backward(m: HmmModel, o, scale):
    T, N = o.size, m.n_states
    beta = np.empty((T, N))
    beta[-1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = m.transition @ (m.emission[:, o[t + 1]] * beta[t + 1]) / scale[t + 1]
    return beta


def _floored_simplex(counts, floor):
    """argmax of sum(c log b) over {b >= floor, sum b = 1}."""
    c = np.asarray(counts, dtype=float)
    k = c.size
    if floor * k >= 1:
        return np.full(k, 1.0 / k)
    total = c.sum()
    if total <= 0:
        return np.full(k, 1.0 / k)
    b = c / total
    clamped = np.zeros(k, dtype=bool)
    for _ in range(k):
        low = (b < floor) & ~clamped
        if not np.any(low):
            break
        clamped |= low
        free = ~clamped
        mass = 1.0 - floor * clamped.sum()
        cf = c[free].sum()
        b = np.where(clamped, floor, c * mass / cf if cf > 0 else mass / free.sum())
    return b / b.sum()


def random_model(n_states: int, n_symbols: int, rng: np.random.Generator, topology: str = "left-right", floor: float = EMISSION_FLOOR) -> HmmModel:
    """Random initial model. ``left-right``: start in state 0, self-loop or advance one state."""
    if n_states < 1 or n_symbols < 1:
        raise VocalTractError("n_states and n_symbols must be >= 1")
    if topology == "left-right":
        pi = np.zeros(n_states)
        pi[0] = 1.0
        a = np.zeros((n_states, n_states))
        for i in range(n_states - 1):
            stay = rng.uniform(0.5, 0.9)
            a[i, i], a[i, i + 1] = stay, 1.0 - stay
        a[-1, -1] = 1.0
    elif topology == "ergodic":
        pi = rng.dirichlet(np.ones(n_states))
        a = rng.dirichlet(np.ones(n_states), size=n_states)
    else:
        raise VocalTractError(f"unknown topology {topology!r}")
    b = rng.dirichlet(np.ones(n_symbols), size=n_states)
    b = np.array([_floored_simplex(row, floor) for row in b])
    return HmmModel(pi, a, b, {"topology": topology})


def baum_welch_step(m: HmmModel, sequences, floor: float = EMISSION_FLOOR):
    """One EM update. Returns ``(new_model, total_log_likelihood_of_m)``."""
    N, M = m.n_states, m.n_symbols
    pi_acc = np.zeros(N)
    a_num = np.zeros((N, N))
    b_num = np.zeros((N, M))
    total = 0.0
    for obs in sequences:
        o = _check_obs(m, obs)
        res = _forward(m, o)
        if res is None:
            total = -np.inf
            continue
        alpha, scale = res
        beta = _backward(m, o, scale)
        total += np.log(scale).sum()
        gamma = alpha * beta
        gamma /= gamma.sum(1, keepdims=True)
        pi_acc += gamma[0]
        if o.size > 1:
            xi = (
                alpha[:-1, :, None]
                * m.transition[None, :, :]
                * (m.emission[:, o[1:]].T * beta[1:])[:, None, :]
                / scale[1:, None, None]
            )
            a_num += xi.sum(0)
        np.add.at(b_num.T, o, gamma)
    if not np.isfinite(total):
        return m, total
    pi = pi_acc / pi_acc.sum()
    a = np.array(m.transition, copy=True)
    for i in range(N):
        s = a_num[i].sum()
        if s > 0:
            a[i] = a_num[i] / s
    b = np.array([_floored_simplex(b_num[i], floor) if b_num[i].sum() > 0 else m.emission[i] for i in range(N)])
    return HmmModel(pi, a, b, m.meta), float(total)


def baum_welch_train(
    sequences,
    n_states: int,
    n_symbols: int,
    iters: int,
    rng: np.random.Generator,
    topology: str = "left-right",
    floor: float = EMISSION_FLOOR,
    init: HmmModel | None = None,
    return_history: bool = False,
):
    """Fit a discrete HMM by Baum-Welch.

    Emission rows are kept at or above ``floor``: the M-step maximizes over
    the floored simplex, so EM's monotone likelihood still holds. With
    ``return_history`` the per-iteration training log-likelihoods (of the
    model entering each iteration, then of the final model) come back too.
    """
    seqs = [np.asarray(s) for s in sequences]
    if not seqs:
        raise VocalTractError("need at least one training sequence")
    m = init if init is not None else random_model(n_states, n_symbols, rng, topology, floor)
    history = []
    for _ in range(iters):
        m, ll = baum_welch_step(m, seqs, floor)
        history.append(ll)
    if return_history:
        history.append(sum(forward_log_likelihood(m, s) for s in seqs))
        return m, history
    return m


def hmm_rank(obs, models: dict) -> list:
    if not models:
        raise VocalTractError("no models enrolled")
    scored = [(forward_log_likelihood(m, obs), str(spk), spk) for spk, m in models.items()]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [(spk, ll) for ll, _, spk in scored]


def hmm_identify(obs, models: dict):
    """Maximum-likelihood speaker; ties go to the lexicographically smallest id."""
    return hmm_rank(obs, models)[0]
