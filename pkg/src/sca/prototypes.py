"""Prototype selection over a component library and simplex mixture fitting.

Diffusion K-means embeds the library, clusters it in diffusion
coordinates, and represents each cluster by the observable-space mean of
its members; the parameter-grid baseline picks actual components nearest
a uniform grid over (log age, log metallicity).  Observations are then
modeled as convex mixtures of prototypes, and target parameters are the
mixture-weighted average log age and log metallicity.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .dataset import frozen_array
from .errors import NumericalError, ValidationError
from .markov import build_transition, default_epsilon
from .spectral import decompose, embed

KKT_TOL = 1e-8


@dataclass(frozen=True)
class ComponentLibrary:
    """Library of normalized component vectors with age/metallicity labels.

    Every spectrum equals 1 at the stored reference coordinate.
    """

    spectra: np.ndarray
    ages: np.ndarray
    metallicities: np.ndarray
    ref_index: int = 0

    def __post_init__(self):
        spectra = np.asarray(self.spectra, dtype=np.float64)
        if spectra.ndim != 2 or spectra.shape[0] < 1:
            raise ValidationError("spectra must be a nonempty N x d matrix")
        if not np.isfinite(spectra).all():
            raise ValidationError("spectra contain non-finite entries")
        n, d = spectra.shape
        if not 0 <= self.ref_index < d:
            raise ValidationError(f"ref_index {self.ref_index} out of range for d={d}")
        if not np.allclose(spectra[:, self.ref_index], 1.0, rtol=0, atol=1e-9):
            raise ValidationError(
                f"spectra are not normalized to 1 at reference index {self.ref_index}"
            )
        for name in ("ages", "metallicities"):
            vals = np.asarray(getattr(self, name), dtype=np.float64)
            if vals.shape != (n,):
                raise ValidationError(f"{name} must have length {n}")
            if not np.isfinite(vals).all() or (vals <= 0).any():
                raise ValidationError(f"{name} must be finite and strictly positive")
            object.__setattr__(self, name, frozen_array(vals))
        object.__setattr__(self, "spectra", frozen_array(spectra))

    @classmethod
    def normalize(cls, spectra, ages, metallicities, ref_index: int = 0):
        """Divide each spectrum by its value at the reference coordinate."""
        spectra = np.asarray(spectra, dtype=np.float64)
        ref = spectra[:, ref_index]
        if (ref <= 0).any() or not np.isfinite(ref).all():
            raise ValidationError(
                "cannot normalize: some spectra are nonpositive at the reference index"
            )
        return cls(spectra=spectra / ref[:, None], ages=ages,
                   metallicities=metallicities, ref_index=ref_index)

    @property
    def n_components(self) -> int:
        return self.spectra.shape[0]

    @property
    def n_bins(self) -> int:
        return self.spectra.shape[1]


@dataclass(frozen=True)
class PrototypeSet:
    """K prototypes with member assignments and per-prototype parameters.

    For the K-means quantizer each prototype is the observable-space mean
    of its members and carries their mean log age / log metallicity; the
    grid baseline returns selected components verbatim with their own
    parameters (and an empty diffusion-centroid block).
    """

    prototypes: np.ndarray            # (K, d)
    member_assignments: np.ndarray    # (N,) cluster label per library row
    centroids_diffusion: np.ndarray   # (K, r) centroids in diffusion space
    member_coords_diffusion: np.ndarray  # (N, r) member coords, original row order
    log_ages: np.ndarray              # (K,)
    log_metallicities: np.ndarray     # (K,)
    wcss_history: tuple               # per-assignment within-cluster sum of squares
    method: str

    def __post_init__(self):
        for name in ("prototypes", "centroids_diffusion", "member_coords_diffusion",
                     "log_ages", "log_metallicities"):
            object.__setattr__(self, name, frozen_array(getattr(self, name)))
        object.__setattr__(self, "member_assignments",
                           frozen_array(self.member_assignments, dtype=np.int64))
        object.__setattr__(self, "wcss_history", tuple(float(w) for w in self.wcss_history))

    @property
    def k(self) -> int:
        return self.prototypes.shape[0]


@dataclass(frozen=True)
class MixtureFit:
    """Simplex weights over prototypes with derived target parameters."""

    gamma: np.ndarray
    residual: float
    mean_log_age: float
    mean_log_met: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", frozen_array(self.gamma))


def _kmeans_pp_seed(coords: np.ndarray, k: int, rng) -> np.ndarray:
    n = coords.shape[0]
    centroids = np.empty((k, coords.shape[1]))
    chosen = np.zeros(n, dtype=bool)
    first = int(rng.integers(n))
    centroids[0] = coords[first]
    chosen[first] = True
    closest = np.sum((coords - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(np.argmin(chosen))  # all remaining are duplicates
        centroids[c] = coords[idx]
        chosen[idx] = True
        closest = np.minimum(closest, np.sum((coords - coords[idx]) ** 2, axis=1))
    return centroids


def diffusion_kmeans(lib: ComponentLibrary, k: int, t: int = 1,
                     r: Optional[int] = None, seed: int = 0,
                     epsilon: Optional[float] = None,
                     max_iter: int = 500) -> PrototypeSet:
    """Quantize the library by K-means in diffusion coordinates.

    Library rows are pre-sorted lexicographically by spectrum before the
    seeded k-means++ start, so the returned prototype set (as a multiset
    of vectors) does not depend on input row order.  Lloyd iterations run
    to an assignment fixed point or ``max_iter``; an empty cluster is
    repaired by reseeding its centroid at the point currently farthest
    from its own centroid.
    """
    n = lib.n_components
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    order = np.lexsort(lib.spectra.T[::-1])
    spectra = np.ascontiguousarray(lib.spectra[order])
    log_age = np.log(lib.ages[order])
    log_met = np.log(lib.metallicities[order])

    dmat = kernels.pairwise_sq_dists(spectra)
    eps = default_epsilon(dmat) if epsilon is None else float(epsilon)
    transition = build_transition(dmat, eps)
    decomposition = decompose(transition)
    if r is None:
        r = min(50, n - 1)
    coords = np.ascontiguousarray(embed(decomposition, t, r).coords)

    rng = np.random.default_rng(seed)
    centroids = np.ascontiguousarray(_kmeans_pp_seed(coords, k, rng))
    labels_prev = None
    wcss_history = []
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        labels, d2 = kernels.assign_nearest(coords, centroids)
        wcss_history.append(float(d2.sum()))
        if labels_prev is not None and np.array_equal(labels, labels_prev):
            break
        labels_prev = labels
        counts = np.bincount(labels, minlength=k)
        new_centroids = np.array(centroids)
        for c in range(k):
            if counts[c]:
                new_centroids[c] = coords[labels == c].mean(axis=0)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            farthest = np.argsort(-d2, kind="stable")
            for rank, c in enumerate(empties):
                new_centroids[c] = coords[farthest[rank]]
        centroids = np.ascontiguousarray(new_centroids)

    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        raise NumericalError(
            f"k-means left {int((counts == 0).sum())} empty clusters; "
            "k exceeds the number of distinguishable components"
        )
    prototypes = np.empty((k, lib.n_bins))
    proto_log_age = np.empty(k)
    proto_log_met = np.empty(k)
    for c in range(k):
        members = labels == c
        prototypes[c] = spectra[members].mean(axis=0)
        proto_log_age[c] = log_age[members].mean()
        proto_log_met[c] = log_met[members].mean()

    assignments = np.empty(n, dtype=np.int64)
    assignments[order] = labels
    member_coords = np.empty_like(coords)
    member_coords[order] = coords
    return PrototypeSet(
        prototypes=prototypes,
        member_assignments=assignments,
        centroids_diffusion=centroids,
        member_coords_diffusion=member_coords,
        log_ages=proto_log_age,
        log_metallicities=proto_log_met,
        wcss_history=wcss_history,
        method="diffusion-kmeans",
    )


def grid_prototypes(lib: ComponentLibrary, k: int) -> PrototypeSet:
    """Baseline: pick the K components nearest a uniform (log t, log Z) grid.

    Grid nodes sit at the centers of K equal cells over each active
    parameter range (a near-square product grid when both vary); each
    node claims its nearest unclaimed component.  Selected components are
    returned verbatim, ordered by library index.
    """
    n = lib.n_components
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    log_age = np.log(lib.ages)
    log_met = np.log(lib.metallicities)
    cols = []
    spans = []
    for vals in (log_age, log_met):
        lo, hi = float(vals.min()), float(vals.max())
        spans.append(hi - lo)
        cols.append((vals - lo) / (hi - lo) if hi > lo else np.zeros(n))
    params = np.column_stack(cols)

    def centers(count):
        return (np.arange(count) + 0.5) / count

    if spans[0] > 0 and spans[1] > 0:
        k1 = math.ceil(math.sqrt(k))
        k2 = math.ceil(k / k1)
        nodes = [(a, z) for a in centers(k1) for z in centers(k2)][:k]
    elif spans[0] > 0:
        nodes = [(a, 0.0) for a in centers(k)]
    elif spans[1] > 0:
        nodes = [(0.0, z) for z in centers(k)]
    else:
        nodes = [(0.0, 0.0)] * k

    taken = np.zeros(n, dtype=bool)
    selected = []
    for node in nodes:
        d2 = np.sum((params - np.asarray(node)) ** 2, axis=1)
        d2[taken] = np.inf
        pick = int(np.argmin(d2))
        taken[pick] = True
        selected.append(pick)
    sel = np.array(sorted(selected))

    d2all = np.sum((params[:, None, :] - params[sel][None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2all, axis=1).astype(np.int64)
    labels[sel] = np.arange(k)  # a selected component always owns itself
    return PrototypeSet(
        prototypes=lib.spectra[sel],
        member_assignments=labels,
        centroids_diffusion=np.empty((k, 0)),
        member_coords_diffusion=np.empty((n, 0)),
        log_ages=log_age[sel],
        log_metallicities=log_met[sel],
        wcss_history=(),
        method="grid",
    )


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u * ks > css - 1.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def kkt_residual(gamma: np.ndarray, grad: np.ndarray) -> float:
    """Stationarity violation on the simplex: active gradients must agree,
    inactive gradients must not beat them."""
    mu = float(gamma @ grad)
    active = gamma > 1e-12
    viol = 0.0
    if active.any():
        viol = float(np.max(np.abs(grad[active] - mu)))
    if (~active).any():
        viol = max(viol, float(np.max(mu - grad[~active])))
    return max(viol, 0.0)


def fit_mixture(proto: PrototypeSet, y: np.ndarray, noise_sd: float = 1.0,
                max_iter: int = 500_000) -> MixtureFit:
    """Simplex-constrained least squares fit of y to the prototypes.

    Under iid Gaussian noise the maximum-likelihood mixture weights solve
    min ||y - gamma @ P||^2 over the simplex, independent of the noise
    scale; ``noise_sd`` is validated but does not move the optimum.
    Solved by accelerated projected gradient with restarts, converged
    when the KKT residual drops below 1e-8.
    """
    if not noise_sd > 0:
        raise ValidationError(f"noise_sd must be positive, got {noise_sd}")
    p = proto.prototypes
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (p.shape[1],):
        raise ValidationError(f"observation must have length {p.shape[1]}, got {y.shape}")
    if not np.isfinite(y).all():
        raise ValidationError("observation contains non-finite entries")
    k = p.shape[0]
    gram = 2.0 * (p @ p.T)
    lin = 2.0 * (p @ y)
    lipschitz = float(np.linalg.eigvalsh(gram)[-1]) if k > 1 else float(gram[0, 0])
    step = 1.0 / lipschitz if lipschitz > 0 else 1.0

    gamma = np.full(k, 1.0 / k)
    zk = gamma
    tk = 1.0
    converged = False
    for it in range(max_iter):
        grad_z = gram @ zk - lin
        nxt = project_to_simplex(zk - step * grad_z)
        if it % 4 == 0:
            if kkt_residual(nxt, gram @ nxt - lin) <= KKT_TOL:
                gamma = nxt
                converged = True
                break
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        momentum = (tk - 1.0) / t_next
        if float(grad_z @ (nxt - gamma)) > 0:  # adaptive restart
            momentum = 0.0
            t_next = 1.0
        zk = nxt + momentum * (nxt - gamma)
        gamma = nxt
        tk = t_next
    if not converged:
        raise NumericalError(
            f"simplex solver did not reach KKT residual {KKT_TOL} in {max_iter} iterations"
        )
    model = gamma @ p
    rss = float(np.sum((y - model) ** 2))
    return MixtureFit(
        gamma=gamma,
        residual=rss,
        mean_log_age=float(gamma @ proto.log_ages),
        mean_log_met=float(gamma @ proto.log_metallicities),
    )


@dataclass(frozen=True)
class TrialRecord:
    true_log_age: float
    est_log_age: float
    true_log_met: float
    est_log_met: float


@dataclass(frozen=True)
class MethodBenchmark:
    name: str
    rmse_log_age: float
    rmse_log_met: float
    trials: tuple

    def to_dict(self):
        return {
            "name": self.name,
            "rmse_log_age": self.rmse_log_age,
            "rmse_log_met": self.rmse_log_met,
            "trials": [
                {
                    "true_log_age": tr.true_log_age,
                    "est_log_age": tr.est_log_age,
                    "true_log_met": tr.true_log_met,
                    "est_log_met": tr.est_log_met,
                }
                for tr in self.trials
            ],
        }


@dataclass(frozen=True)
class QuantizationReport:
    k: int
    n_trials: int
    noise_sd: float
    seed: int
    diffusion: MethodBenchmark
    grid: MethodBenchmark
    diffusion_set: PrototypeSet
    grid_set: PrototypeSet

    def to_dict(self):
        return {
            "k": self.k,
            "n_trials": self.n_trials,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
            "methods": {
                "diffusion": self.diffusion.to_dict(),
                "grid": self.grid.to_dict(),
            },
            "kmeans_wcss": list(self.diffusion_set.wcss_history),
        }


def quantization_benchmark(lib: ComponentLibrary, k: int, n_trials: int,
                           noise_sd: float, seed: int, t: int = 1,
                           r: Optional[int] = None) -> QuantizationReport:
    """Compare target-parameter recovery of the two prototype selections.

    Each trial draws simplex weights over the full library, synthesizes a
    noisy observation, fits it against both prototype sets, and records
    estimated versus true mean log age / log metallicity.  Per-trial
    randomness is keyed by (seed, trial index).
    """
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    if noise_sd < 0:
        raise ValidationError(f"noise_sd must be nonnegative, got {noise_sd}")
    protos = {
        "diffusion": diffusion_kmeans(lib, k, t=t, r=r, seed=seed),
        "grid": grid_prototypes(lib, k),
    }
    log_age = np.log(lib.ages)
    log_met = np.log(lib.metallicities)
    fit_noise = noise_sd if noise_sd > 0 else 1.0
    records = {name: [] for name in protos}
    for trial in range(n_trials):
        rng = np.random.default_rng([seed, trial])
        weights = rng.dirichlet(np.ones(lib.n_components))
        observation = weights @ lib.spectra + noise_sd * rng.normal(size=lib.n_bins)
        true_la = float(weights @ log_age)
        true_lz = float(weights @ log_met)
        for name, proto in protos.items():
            fit = fit_mixture(proto, observation, noise_sd=fit_noise)
            records[name].append(TrialRecord(
                true_log_age=true_la,
                est_log_age=fit.mean_log_age,
                true_log_met=true_lz,
                est_log_met=fit.mean_log_met,
            ))

    def summarize(name):
        recs = records[name]
        err_la = np.array([tr.est_log_age - tr.true_log_age for tr in recs])
        err_lz = np.array([tr.est_log_met - tr.true_log_met for tr in recs])
        return MethodBenchmark(
            name=name,
            rmse_log_age=float(np.sqrt(np.mean(err_la ** 2))),
            rmse_log_met=float(np.sqrt(np.mean(err_lz ** 2))),
            trials=tuple(recs),
        )

    return QuantizationReport(
        k=k, n_trials=n_trials, noise_sd=float(noise_sd), seed=seed,
        diffusion=summarize("diffusion"), grid=summarize("grid"),
        diffusion_set=protos["diffusion"], grid_set=protos["grid"],
    )


def load_component_library(path, ref_index: int = 0) -> ComponentLibrary:
    """Read a library CSV: columns id (optional), age, met, then spectrum bins."""
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValidationError("empty library file")
    header = [h.strip() for h in rows[0]]
    for required in ("age", "met"):
        if required not in header:
            raise ValidationError(f"library file is missing the {required!r} column")
    age_idx = header.index("age")
    met_idx = header.index("met")
    skip = {age_idx, met_idx}
    if "id" in header:
        skip.add(header.index("id"))
    feat_idx = [i for i in range(len(header)) if i not in skip]
    if not feat_idx:
        raise ValidationError("library file has no spectrum columns")
    spectra, ages, mets = [], [], []
    for ridx, row in enumerate(r for r in rows[1:] if r):
        if len(row) != len(header):
            raise ValidationError(f"malformed library row {ridx + 1}")
        try:
            spectra.append([float(row[i]) for i in feat_idx])
            ages.append(float(row[age_idx]))
            mets.append(float(row[met_idx]))
        except ValueError as exc:
            raise ValidationError(f"malformed library row {ridx + 1}: {exc}") from exc
    return ComponentLibrary.normalize(
        np.array(spectra), np.array(ages), np.array(mets), ref_index=ref_index
    )
