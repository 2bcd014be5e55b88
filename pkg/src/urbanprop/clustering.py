"""Multipath-component clustering: multi-restart K-power-means with shape pruning.

Rays (delay + departure/arrival directions + power) are grouped in a joint
delay-angle metric, the multipath component distance (MCD): directions
enter as points on the unit sphere scaled by 1/2, delays as a normalized,
zeta-weighted scalar. Embedding each ray as a 7-vector

    u = [omega_tx / 2, omega_rx / 2, zeta * delay / delay_norm]

makes MCD(a, b) exactly the Euclidean distance |u_a - u_b|, so the
power-weighted K-means objective is well-defined and provably
non-increasing under the assign/update iteration.

Cluster-count selection sweeps a k-range and scores each k with a
Calinski-Harabasz ratio on the embedding; across random restarts the kept
result is the one with the fewest final clusters (ties: lower
within-cluster MCD sum, then earlier restart).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ValidationError


class DegenerateDelayWarning(UserWarning):
    """All rays share one delay; the MCD delay normalizer falls back to 1 ns."""


@dataclass(frozen=True)
class RayRecord:
    """One multipath component.

    Angles in degrees (azimuth wrapped to [-180, 180), elevation in
    [-90, 90]), delay in nanoseconds, power linear (> 0). XPR is optional
    and carried in dB.
    """

    delay_ns: float
    aod_az_deg: float
    aod_el_deg: float
    aoa_az_deg: float
    aoa_el_deg: float
    power: float
    xpr_db: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.power) or self.power <= 0.0:
            raise ValidationError(f"ray power must be > 0 (linear), got {self.power}")
        if not math.isfinite(self.delay_ns):
            raise ValidationError(f"ray delay must be finite, got {self.delay_ns}")
        for name in ("aod_el_deg", "aoa_el_deg"):
            el = getattr(self, name)
            if not -90.0 <= el <= 90.0:
                raise ValidationError(f"{name} must be in [-90, 90], got {el}")
        for name in ("aod_az_deg", "aoa_az_deg"):
            az = getattr(self, name)
            if not math.isfinite(az):
                raise ValidationError(f"{name} must be finite, got {az}")
            object.__setattr__(self, name, (az + 180.0) % 360.0 - 180.0)


@dataclass(frozen=True)
class ClusteringConfig:
    k_min: int = 2
    k_max: int = 10
    prune_p: float = 0.98  # minimum retained ray-count fraction per cluster
    prune_s: float = 0.95  # minimum retained power fraction per cluster
    restarts: int = 50
    zeta: float = 1.0  # MCD delay weight
    rng_seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k_min <= self.k_max:
            raise ValidationError(f"need 1 <= k_min <= k_max, got ({self.k_min}, {self.k_max})")
        if not 0.0 < self.prune_s <= self.prune_p <= 1.0:
            raise ValidationError(
                f"need 0 < prune_s <= prune_p <= 1, got ({self.prune_p}, {self.prune_s})"
            )
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.zeta < 0.0:
            raise ValidationError(f"zeta must be >= 0, got {self.zeta}")


def _unit_vectors(az_deg: np.ndarray, el_deg: np.ndarray) -> np.ndarray:
    az = np.radians(az_deg)
    el = np.radians(el_deg)
    return np.column_stack((np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)))


def _ray_arrays(rays):
    delays = np.array([r.delay_ns for r in rays], dtype=float)
    aod = _unit_vectors(
        np.array([r.aod_az_deg for r in rays]), np.array([r.aod_el_deg for r in rays])
    )
    aoa = _unit_vectors(
        np.array([r.aoa_az_deg for r in rays]), np.array([r.aoa_el_deg for r in rays])
    )
    powers = np.array([r.power for r in rays], dtype=float)
    return delays, aod, aoa, powers


def _default_delay_norm(delays: np.ndarray, powers: np.ndarray) -> float:
    """Power-weighted RMS delay spread; falls back to 1 ns when degenerate."""
    w = powers / powers.sum()
    mean = float(np.dot(w, delays))
    # shifted form: exactly zero for constant delays, no cancellation
    var = float(np.dot(w, np.square(delays - mean)))
    ds = math.sqrt(max(var, 0.0))
    if ds <= 1e-12:
        warnings.warn(
            "all rays share one delay; using 1 ns as the MCD delay normalizer",
            DegenerateDelayWarning,
            stacklevel=3,
        )
        return 1.0
    return ds


def ray_embedding(rays, zeta: float = 1.0, delay_norm_ns: float | None = None) -> np.ndarray:
    """Embed rays in R^7 so that Euclidean distance equals the MCD."""
    delays, aod, aoa, powers = _ray_arrays(rays)
    if delay_norm_ns is None:
        delay_norm_ns = _default_delay_norm(delays, powers)
    if delay_norm_ns <= 0.0:
        raise ValidationError(f"delay_norm_ns must be > 0, got {delay_norm_ns}")
    return np.column_stack((aod / 2.0, aoa / 2.0, zeta * delays / delay_norm_ns))


def mcd_distance(a: RayRecord, b: RayRecord, zeta: float = 1.0, delay_norm_ns: float = 1.0):
    """Multipath component distance between two rays.

    sqrt(|dOmega_tx|^2/4 + |dOmega_rx|^2/4 + (zeta |dtau| / delay_norm)^2).
    """
    u = ray_embedding([a, b], zeta=zeta, delay_norm_ns=delay_norm_ns)
    return float(np.linalg.norm(u[0] - u[1]))


@dataclass(frozen=True)
class ClusterSet:
    """Clustering result: assignments aligned with the input ray order.

    Pruned rays keep their cluster id but are flagged; centroids are
    power-weighted means in the MCD embedding over retained rays.
    """

    rays: tuple
    assignments: np.ndarray
    pruned: np.ndarray
    centroids: np.ndarray
    objective_trace: tuple
    zeta: float
    delay_norm_ns: float
    seed: int

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def n_clusters(self) -> int:
        """Number of clusters still holding at least one retained ray."""
        return len(np.unique(self.assignments[~self.pruned]))

    def cluster_members(self, j: int, include_pruned: bool = False) -> np.ndarray:
        mask = self.assignments == j
        if not include_pruned:
            mask &= ~self.pruned
        return np.flatnonzero(mask)

    def within_mcd_sum(self) -> float:
        """Power-weighted sum of retained-ray MCDs to their centroids."""
        u = ray_embedding(self.rays, self.zeta, self.delay_norm_ns)
        powers = np.array([r.power for r in self.rays])
        keep = ~self.pruned
        d = np.linalg.norm(u[keep] - self.centroids[self.assignments[keep]], axis=1)
        return float(np.dot(powers[keep], d))


def _canonical_order(rays) -> np.ndarray:
    keys = np.array(
        [
            (r.delay_ns, r.aod_az_deg, r.aod_el_deg, r.aoa_az_deg, r.aoa_el_deg, r.power)
            for r in rays
        ]
    )
    return np.lexsort(tuple(keys[:, i] for i in range(keys.shape[1] - 1, -1, -1)))


def _relabel_by_centroid(assign: np.ndarray, centroids: np.ndarray):
    """Deterministic cluster labels: sort centroids lexicographically."""
    order = np.lexsort(tuple(centroids[:, i] for i in range(centroids.shape[1] - 1, -1, -1)))
    remap = np.empty(len(centroids), dtype=int)
    remap[order] = np.arange(len(centroids))
    return remap[assign], centroids[order]


def kpower_means(
    rays,
    k: int,
    seed: int,
    zeta: float = 1.0,
    delay_norm_ns: float | None = None,
    max_iter: int = 100,
) -> ClusterSet:
    """Power-weighted K-means in the MCD embedding.

    Iterates nearest-centroid assignment and power-weighted centroid
    updates until assignments stabilize (at most max_iter sweeps). Empty
    clusters are re-seeded on the ray currently farthest from its
    centroid, which keeps the recorded objective non-increasing.
    Deterministic given (rays, k, seed); invariant to input ray order.
    """
    rays = tuple(rays)
    n = len(rays)
    if n == 0:
        raise ValidationError("no rays to cluster")
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    order = _canonical_order(rays)
    sorted_rays = tuple(rays[i] for i in order)
    delays, _, _, powers = _ray_arrays(sorted_rays)
    if delay_norm_ns is None:
        delay_norm_ns = _default_delay_norm(delays, powers)
    u = ray_embedding(sorted_rays, zeta, delay_norm_ns)

    # power- and distance-weighted seeding: the first centroid is drawn with
    # probability proportional to ray power, later ones proportional to
    # power times squared distance to the nearest centroid so far; this
    # makes well-separated groups claim one seed each almost surely
    rng = np.random.default_rng(seed)
    prob = powers / powers.sum()
    centroids = np.empty((k, u.shape[1]))
    centroids[0] = u[int(rng.choice(n, p=prob))]
    closest = np.square(u - centroids[0]).sum(axis=1)
    for j in range(1, k):
        weights = prob * closest
        total = weights.sum()
        if total <= 0.0:
            idx = int(rng.choice(n))  # all remaining rays coincide with a seed
        else:
            idx = int(rng.choice(n, p=weights / total))
        centroids[j] = u[idx]
        closest = np.minimum(closest, np.square(u - centroids[j]).sum(axis=1))
    assign = np.full(n, -1, dtype=int)
    trace = []
    for _ in range(max_iter):
        d2 = np.square(u[:, None, :] - centroids[None, :, :]).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        trace.append(float(np.dot(powers, d2[np.arange(n), new_assign])))
        converged = bool(np.array_equal(new_assign, assign))
        assign = new_assign
        # re-seed empty clusters on the farthest-out ray (deterministic);
        # rays are only taken from clusters that keep at least one member
        member_dist = d2[np.arange(n), assign]
        sizes = np.bincount(assign, minlength=k)
        for j in range(k):
            if sizes[j] == 0:
                candidates = np.where(sizes[assign] > 1, member_dist, -np.inf)
                far = int(np.argmax(candidates))
                sizes[assign[far]] -= 1
                sizes[j] += 1
                assign[far] = j
                member_dist[far] = -np.inf
                converged = False
        for j in range(k):
            members = assign == j
            w = powers[members]
            centroids[j] = np.average(u[members], axis=0, weights=w)
        if converged:
            break
    assign, centroids = _relabel_by_centroid(assign, centroids)
    # map assignments back to the caller's ray order
    out = np.empty(n, dtype=int)
    out[order] = assign
    return ClusterSet(
        rays=rays,
        assignments=out,
        pruned=np.zeros(n, dtype=bool),
        centroids=centroids,
        objective_trace=tuple(trace),
        zeta=zeta,
        delay_norm_ns=delay_norm_ns,
        seed=seed,
    )


def shape_prune(cs: ClusterSet, p: float = 0.98, s: float = 0.95) -> ClusterSet:
    """Greedy per-cluster outlier removal.

    Discards the ray currently farthest from its cluster centroid as long
    as the cluster would still retain at least fraction p of its rays AND
    fraction s of its power; never empties a cluster. Pruned rays keep
    their assignment but are flagged; centroids are recomputed over the
    retained rays.
    """
    if not 0.0 < s <= p <= 1.0:
        raise ValidationError(f"need 0 < s <= p <= 1, got p={p}, s={s}")
    u = ray_embedding(cs.rays, cs.zeta, cs.delay_norm_ns)
    powers = np.array([r.power for r in cs.rays])
    pruned = cs.pruned.copy()
    centroids = cs.centroids.copy()
    tol = 1e-9
    for j in range(cs.k):
        members = np.flatnonzero((cs.assignments == j) & ~cs.pruned)
        if len(members) == 0:
            continue
        n_total = len(members)
        p_total = float(powers[members].sum())
        dist = np.linalg.norm(u[members] - centroids[j], axis=1)
        # farthest first; ties resolved by input position for determinism
        drop_order = members[np.lexsort((members, -dist))]
        kept = n_total
        kept_power = p_total
        for idx in drop_order:
            if kept <= 1:
                break
            if (kept - 1) < p * n_total - tol:
                break
            if (kept_power - powers[idx]) < s * p_total - tol:
                break
            pruned[idx] = True
            kept -= 1
            kept_power -= float(powers[idx])
        retained = np.flatnonzero((cs.assignments == j) & ~pruned)
        centroids[j] = np.average(u[retained], axis=0, weights=powers[retained])
    return ClusterSet(
        rays=cs.rays,
        assignments=cs.assignments.copy(),
        pruned=pruned,
        centroids=centroids,
        objective_trace=cs.objective_trace,
        zeta=cs.zeta,
        delay_norm_ns=cs.delay_norm_ns,
        seed=cs.seed,
    )


def _ch_score(u: np.ndarray, powers: np.ndarray, cs_assign: np.ndarray, centroids: np.ndarray):
    """Calinski-Harabasz ratio on the MCD embedding (power-weighted)."""
    n = len(u)
    k = len(centroids)
    if k < 2 or n <= k:
        return math.nan
    overall = np.average(u, axis=0, weights=powers)
    between = 0.0
    within = 0.0
    for j in range(k):
        members = cs_assign == j
        pj = float(powers[members].sum())
        between += pj * float(np.square(centroids[j] - overall).sum())
        within += float(np.dot(powers[members], np.square(u[members] - centroids[j]).sum(axis=1)))
    if within <= 1e-300:
        return math.inf
    return (between / (k - 1)) / (within / (n - k))


@dataclass(frozen=True)
class RestartDiagnostics:
    restart: int
    seed: int
    k_selected: int
    n_clusters_final: int
    within_mcd_sum: float
    ch_scores: dict
    objective_trace: tuple


@dataclass(frozen=True)
class MultirestartResult:
    best: ClusterSet
    best_restart: int
    diagnostics: tuple

    @property
    def n_clusters(self) -> int:
        return self.best.n_clusters


def cluster_multirestart(rays, cfg: ClusteringConfig) -> MultirestartResult:
    """Full clustering pipeline over random restarts.

    Each restart r (seeded cfg.rng_seed + r) sweeps k over
    [k_min, min(k_max, n_rays)], picks k by the highest
    Calinski-Harabasz score (k=1 is only considered when the range is
    exactly [1, 1]), then applies shape pruning. Across restarts the kept
    result has the minimum final cluster count; ties go to the lower
    within-cluster MCD sum, then the earlier restart.
    """
    rays = tuple(rays)
    if not rays:
        raise ValidationError("no rays to cluster")
    n = len(rays)
    if cfg.k_min > n:
        raise ValidationError(f"k_min={cfg.k_min} exceeds the {n} available rays")
    k_lo, k_hi = cfg.k_min, min(cfg.k_max, n)
    ks = [1] if (k_lo, k_hi) == (1, 1) else [k for k in range(max(k_lo, 2), k_hi + 1)]
    if not ks:
        ks = [k_hi]

    delays, _, _, powers = _ray_arrays(rays)
    delay_norm = _default_delay_norm(delays, powers)
    u = ray_embedding(rays, cfg.zeta, delay_norm)

    best = None
    best_key = None
    best_restart = -1
    diagnostics = []
    for r in range(1, cfg.restarts + 1):
        seed = cfg.rng_seed + r
        by_k = {}
        scores = {}
        for k in ks:
            cs = kpower_means(rays, k, seed=seed, zeta=cfg.zeta, delay_norm_ns=delay_norm)
            by_k[k] = cs
            scores[k] = _ch_score(u, powers, cs.assignments, cs.centroids)
        if len(ks) == 1:
            k_sel = ks[0]
        else:
            finite_best = max(
                ks, key=lambda k: (scores[k] if not math.isnan(scores[k]) else -math.inf, -k)
            )
            k_sel = finite_best
        pruned_cs = shape_prune(by_k[k_sel], cfg.prune_p, cfg.prune_s)
        within = pruned_cs.within_mcd_sum()
        diagnostics.append(
            RestartDiagnostics(
                restart=r,
                seed=seed,
                k_selected=k_sel,
                n_clusters_final=pruned_cs.n_clusters,
                within_mcd_sum=within,
                ch_scores=scores,
                objective_trace=pruned_cs.objective_trace,
            )
        )
        key = (pruned_cs.n_clusters, within, r)
        if best_key is None or key < best_key:
            best = pruned_cs
            best_key = key
            best_restart = r
    return MultirestartResult(best=best, best_restart=best_restart, diagnostics=tuple(diagnostics))


# ---------------------------------------------------------------------------
# Ray CSV I/O
# ---------------------------------------------------------------------------

RAY_CSV_FIELDS = (
    "link_id",
    "delay_ns",
    "aod_az_deg",
    "aod_el_deg",
    "aoa_az_deg",
    "aoa_el_deg",
    "power_db",
)


def load_rays(path) -> dict:
    """Read a ray CSV into {link_id: [RayRecord, ...]} (insertion order).

    Expected header: link_id,delay_ns,aod_az_deg,aod_el_deg,aoa_az_deg,
    aoa_el_deg,power_db[,xpr_db]. Power is converted from dB to linear.
    Errors name the offending 1-based line.
    """
    links: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if tuple(header[: len(RAY_CSV_FIELDS)]) != RAY_CSV_FIELDS or len(header) > len(
            RAY_CSV_FIELDS
        ) + 1 or (len(header) == len(RAY_CSV_FIELDS) + 1 and header[-1] != "xpr_db"):
            raise ValidationError(
                f"{path}: line 1: expected header {','.join(RAY_CSV_FIELDS)}[,xpr_db], "
                f"got {','.join(header)}"
            )
        has_xpr = len(header) == len(RAY_CSV_FIELDS) + 1
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                link = row[0].strip()
                values = [float(c) for c in row[1:7]]
                xpr = None
                if has_xpr and row[7].strip() != "":
                    xpr = float(row[7])
                ray = RayRecord(
                    delay_ns=values[0],
                    aod_az_deg=values[1],
                    aod_el_deg=values[2],
                    aoa_az_deg=values[3],
                    aoa_el_deg=values[4],
                    power=10.0 ** (values[5] / 10.0),
                    xpr_db=xpr,
                )
            except (ValueError, ValidationError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
            links.setdefault(link, []).append(ray)
    if not links:
        raise ValidationError(f"{path}: no ray rows found")
    return links


def save_assignments_csv(path, results: dict) -> None:
    """Write per-ray cluster assignments: {link_id: ClusterSet} -> CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["link_id", "ray_index", "cluster", "pruned"])
        for link_id, cs in results.items():
            for i in range(len(cs.rays)):
                writer.writerow([link_id, i, int(cs.assignments[i]), int(cs.pruned[i])])
