"""Synthetic scene generation, noise injection, accuracy metrics, benchmark.

Two generators live here:

* `generate_scene` follows the evaluation protocol: scene points in a frustum
  slab (or plane), a random baseline of fixed length, the third camera
  strictly between 1/3 and 2/3 of the way along it, Gaussian pixel noise.
  It works in floats and is what the benchmark sweeps drive.

* `generate_rational_scene` builds a fully consistent instance in exact
  rational arithmetic, already in normalized form (the zero pattern holds
  exactly), together with exact ground-truth rotations and rotation
  parameters.  Constructing one takes care: rational rotations with a shared
  node angle come from tangent-half-angle circle points, the camera-3 twist
  is pinned by a conic trick (complete the square on the norm quartic, which
  has a square leading coefficient), and the baseline length is forced
  rational by a second conic parameterization.  These scenes are the exact
  vanishing oracles used throughout the test suite.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from .errors import SolverError, ZeroVector
from .normalize import ProblemInstance
from .poly import Rat, rat

# ---------------------------------------------------------------------------
# exact 3x3 helpers (nested tuples of mpq)


def _mvec(m, v):
    return tuple(sum(m[i][k] * v[k] for k in range(3)) for i in range(3))


def _mmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def _mtrans(m):
    return tuple(tuple(m[j][i] for j in range(3)) for i in range(3))


def _col(m, j):
    return (m[0][j], m[1][j], m[2][j])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _det3v(a, b, c):
    return _dot(a, _cross(b, c))


def _cs_from_tanhalf(t: Rat) -> tuple[Rat, Rat]:
    t = mpq(t)
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def _rz(c: Rat, s: Rat):
    return ((c, -s, mpq(0)), (s, c, mpq(0)), (mpq(0), mpq(0), mpq(1)))


def _rx(c: Rat, s: Rat):
    return ((mpq(1), mpq(0), mpq(0)), (mpq(0), c, -s), (mpq(0), s, c))


_XHAT = (mpq(1), mpq(0), mpq(0))
_ZHAT = (mpq(0), mpq(0), mpq(1))


# ---------------------------------------------------------------------------
# exact consistent scenes


@dataclass(frozen=True)
class RationalScene:
    """Exactly consistent normalized instance with its exact ground truth."""

    instance: ProblemInstance
    r2: tuple  # world <- camera rotations, exact
    r3: tuple
    o2: tuple
    o3: tuple
    points: tuple  # 4 world points
    cayley2: tuple  # (u, v, w) exact
    cayley3: tuple
    s: Rat  # shared node-angle tangent
    u2t: Rat
    u3t: Rat
    sigma: int
    alpha: Rat  # O3 = alpha * O2
    t: tuple  # baseline direction (= O2)


def _small_rat(rng, den: int = 8, lo: float = -1.0, hi: float = 1.0) -> Rat:
    num_lo = math.ceil(lo * den)
    num_hi = math.floor(hi * den)
    return mpq(rng.randint(num_lo, num_hi), den)


def _small_rat_nonzero(rng, den: int = 8, lo: float = -1.0, hi: float = 1.0) -> Rat:
    while True:
        v = _small_rat(rng, den, lo, hi)
        if v:
            return v


def generate_rational_scene(seed: int = 0, max_tries: int = 500) -> RationalScene:
    """Construct an exactly consistent collinear scene with rational data.

    All 24 image coordinates, the baseline length, the camera rotations and
    the rotation parameters (u_j, v_j, w_j) are exact rationals, the
    normalization zero pattern holds exactly, and the three camera centers
    are exactly collinear.
    """
    import random

    rng = random.Random(seed)
    for _ in range(max_tries):
        scene = _try_rational_scene(rng)
        if scene is not None:
            return scene
    raise SolverError(f"no consistent rational scene found for seed {seed}")


def _try_rational_scene(rng) -> RationalScene | None:
    from .constraints import cayley_from_rotation
    from .errors import GimbalDegenerate

    tphi = _small_rat_nonzero(rng, 16, -0.35, 0.35)
    tth2 = _small_rat_nonzero(rng, 16, -0.30, 0.30)
    tth3 = _small_rat_nonzero(rng, 16, -0.30, 0.30)
    if tth2 == tth3:
        return None
    cphi, sphi = _cs_from_tanhalf(tphi)
    b2 = _mmul(_rz(cphi, sphi), _rx(*_cs_from_tanhalf(tth2)))
    b3 = _mmul(_rz(cphi, sphi), _rx(*_cs_from_tanhalf(tth3)))

    # bilinear coplanarity form for the first columns; K11 vanishes by
    # construction (both untwisted x-axes equal the node direction)
    k11 = _det3v(_XHAT, _col(b2, 0), _col(b3, 0))
    k12 = _det3v(_XHAT, _col(b2, 0), _col(b3, 1))
    k21 = _det3v(_XHAT, _col(b2, 1), _col(b3, 0))
    k22 = _det3v(_XHAT, _col(b2, 1), _col(b3, 1))
    assert k11 == 0
    if k12 == 0 or k21 == 0:
        return None

    # norm quartic N(t) = ((1-t^2) k12 + 2 t k22)^2 + 4 t^2 k21^2 has square
    # leading coefficient; complete the square to find a rational point
    gamma = -2 * k22
    delta = (2 * k21 * k21 - k12 * k12) / k12
    c1 = 4 * k12 * k22 - 2 * gamma * delta
    c0 = k12 * k12 - delta * delta
    if c1 == 0:
        return None
    tpsi2 = -c0 / c1
    if tpsi2 == 0:
        return None
    c2, s2 = _cs_from_tanhalf(tpsi2)
    ynorm = k12 * tpsi2 * tpsi2 + gamma * tpsi2 + delta
    if ynorm == 0:
        return None
    a_part = (1 - tpsi2 * tpsi2) * k12 + 2 * tpsi2 * k22
    c3 = a_part / ynorm
    s3 = -2 * tpsi2 * k21 / ynorm
    if c3 * c3 + s3 * s3 != 1:  # cannot happen: ynorm^2 = a^2 + (2 t k21)^2
        return None
    if s2 == 0 or s3 == 0:
        return None

    r2 = _mmul(b2, _rz(c2, s2))
    r3 = _mmul(b3, _rz(c3, s3))
    try:
        u2, v2, w2 = cayley_from_rotation(r2)
        u3, v3, w3 = cayley_from_rotation(r3)
    except GimbalDegenerate:
        return None
    if 1 - u2 * v2 == 0 or 1 - u3 * v3 == 0:
        return None
    s_shared = (u2 + v2) / (1 - u2 * v2)
    if s_shared != (u3 + v3) / (1 - u3 * v3) or s_shared == 0:
        return None

    p1z = mpq(rng.randint(10, 14), 8)
    p1 = (mpq(0), mpq(0), p1z)
    z2 = _col(r2, 2)
    z3 = _col(r3, 2)
    if _det3v(_ZHAT, z2, z3) != 0:
        return None

    # rational-norm baseline: lam2 from the conic family, then solve
    # (alpha, lam3) from collinearity
    kpar = mpq(rng.randint(28, 42), 16)  # around 2
    z2z = z2[2]
    if kpar * kpar == 1:
        return None
    lam2 = 2 * p1z * (z2z - kpar) / (1 - kpar * kpar)
    if not lam2 > 0:
        return None
    d = abs(p1z - kpar * lam2)
    if d == 0:
        return None
    o2 = tuple(p1[i] - lam2 * z2[i] for i in range(3))
    # p1 - lam3 z3 = alpha o2: solve the 2x2 system in (alpha, lam3)
    rows = [(o2[i], z3[i], p1[i]) for i in range(3)]
    sol = None
    for a in range(3):
        for b in range(a + 1, 3):
            det = rows[a][0] * rows[b][1] - rows[b][0] * rows[a][1]
            if det:
                alpha = (rows[a][2] * rows[b][1] - rows[b][2] * rows[a][1]) / det
                lam3 = (rows[a][0] * rows[b][2] - rows[b][0] * rows[a][2]) / det
                sol = (alpha, lam3)
                break
        if sol:
            break
    if not sol:
        return None
    alpha, lam3 = sol
    for i in range(3):
        if p1[i] - lam3 * z3[i] != alpha * o2[i]:
            return None
    if not (lam3 > 0 and mpq(1, 10) < alpha < mpq(9, 10)):
        return None
    o3 = tuple(alpha * c for c in o2)

    # P2 on the line through P1 perpendicular to all three camera x-axes
    x2ax = _col(r2, 0)
    x3ax = _col(r3, 0)
    e = _cross(_XHAT, x2ax)
    if _dot(x3ax, e) != 0:
        return None
    mu = _small_rat_nonzero(rng, 8, -0.5, 0.5)
    p2 = tuple(p1[i] + mu * e[i] for i in range(3))

    # generic extra points in front of everything
    p3 = (
        _small_rat_nonzero(rng, 16, -0.6, 0.6),
        _small_rat_nonzero(rng, 16, -0.6, 0.6),
        p1z + _small_rat(rng, 16, -0.4, 0.4),
    )
    p4 = (
        _small_rat_nonzero(rng, 16, -0.6, 0.6),
        _small_rat_nonzero(rng, 16, -0.6, 0.6),
        p1z + _small_rat(rng, 16, -0.4, 0.4),
    )
    if p3 == p4:
        return None

    pts = (p1, p2, p3, p4)
    cams = (
        (None, (mpq(0), mpq(0), mpq(0))),
        (r2, o2),
        (r3, o3),
    )
    views = []
    for r, o in cams:
        view = []
        for p in pts:
            dvec = tuple(p[i] - o[i] for i in range(3))
            if r is not None:
                dvec = _mvec(_mtrans(r), dvec)
            if not dvec[2] > 0:
                return None
            view.append((dvec[0] / dvec[2], dvec[1] / dvec[2]))
        views.append(tuple(view))
    # normalization zero pattern must be exact
    for j in range(3):
        if views[j][0] != (0, 0) or views[j][1][0] != 0:
            return None
        if views[j][1][1] == 0:
            return None
    # guards for the generic-position divisors downstream
    x13, y13 = views[0][2]
    x14, y14 = views[0][3]
    if x13 + y13 * s_shared == 0 or x14 + y14 * s_shared == 0:
        return None
    if x13 == 0 or x14 == 0 or y13 == y14:
        return None
    if u2 == 0 or v2 == 0 or u3 == 0 or v3 == 0:
        return None

    inst = ProblemInstance(points=tuple(views), baseline=d)
    return RationalScene(
        instance=inst,
        r2=r2,
        r3=r3,
        o2=o2,
        o3=o3,
        points=pts,
        cayley2=(u2, v2, w2),
        cayley3=(u3, v3, w3),
        s=s_shared,
        u2t=u2 - 1 / u2,
        u3t=u3 - 1 / u3,
        sigma=1 if alpha > 0 else -1,
        alpha=alpha,
        t=o2,
    )


# ---------------------------------------------------------------------------
# evaluation-protocol scenes (floats)


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of the synthetic evaluation protocol."""

    kind: str = "generic"  # generic | planar
    baseline: float = 0.3
    noise_sigma: float = 0.0  # pixels
    image_size: int = 512
    fov_deg: float = 45.0
    trials: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("generic", "planar"):
            raise ValueError(f"unknown configuration kind {self.kind!r}")
        if not self.baseline > 0:
            raise ValueError("baseline must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be nonnegative")
        if self.trials < 1:
            raise ValueError("at least one trial required")

    @property
    def focal_px(self) -> float:
        """Focal length in pixels implied by image size and field of view."""
        return (self.image_size / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)


@dataclass(frozen=True)
class GroundTruth:
    """True geometry of one generated trial (in the raw camera-1 frame)."""

    r2: np.ndarray
    r3: np.ndarray
    t: np.ndarray  # O2 - O1
    o2: np.ndarray
    o3: np.ndarray
    points: np.ndarray  # 4 x 3
    lam: float  # O3 position along the baseline
    sigma: int


def _aim_rotation(z_axis: np.ndarray) -> np.ndarray:
    z = z_axis / np.linalg.norm(z_axis)
    up = np.array([0.0, 1.0, 0.0])
    if abs(np.dot(up, z)) > 0.99:
        up = np.array([1.0, 0.0, 0.0])
    x = np.cross(up, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def _random_rotation_smallangle(rng, max_deg: float) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    ang = math.radians(rng.uniform(0.0, max_deg))
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(ang) * k + (1.0 - math.cos(ang)) * (k @ k)


def _project(r: np.ndarray | None, o: np.ndarray, p: np.ndarray):
    d = p - o
    if r is not None:
        d = r.T @ d
    if d[2] <= 0:
        return None
    return d[0] / d[2], d[1] / d[2]


def generate_scene(cfg: ScenarioConfig, trial: int) -> tuple[ProblemInstance, GroundTruth]:
    """One noiseless trial: 4 visible points, collinear centers, baseline d.

    Deterministic in (cfg.seed, trial).  Rejection-resamples until all 12
    projections land strictly inside the field of view with positive depth;
    gives up after 10^4 attempts.
    """
    kind_flag = 0 if cfg.kind == "generic" else 1
    rng = np.random.default_rng([cfg.seed, trial, kind_flag])
    tan_half = math.tan(math.radians(cfg.fov_deg) / 2.0)
    for _ in range(10_000):
        pts = []
        while len(pts) < 4:
            if cfg.kind == "planar":
                z = 2.0
            else:
                z = rng.uniform(1.0, 2.0)
            x = rng.uniform(-2.0 * tan_half, 2.0 * tan_half)
            y = rng.uniform(-2.0 * tan_half, 2.0 * tan_half)
            if abs(x) <= z * tan_half and abs(y) <= z * tan_half:
                pts.append((x, y, z))
        pts = np.array(pts)

        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        o2 = cfg.baseline * direction
        lam = rng.uniform(1.0 / 3.0, 2.0 / 3.0)
        o3 = lam * o2

        centroid = pts.mean(axis=0)
        r2 = _aim_rotation(centroid - o2) @ _random_rotation_smallangle(rng, 10.0)
        r3 = _aim_rotation(centroid - o3) @ _random_rotation_smallangle(rng, 10.0)

        views = []
        ok = True
        for r, o in ((None, np.zeros(3)), (r2, o2), (r3, o3)):
            view = []
            for p in pts:
                xy = _project(r, o, p)
                if xy is None or abs(xy[0]) > tan_half or abs(xy[1]) > tan_half:
                    ok = False
                    break
                view.append(xy)
            if not ok:
                break
            views.append(tuple(view))
        if not ok:
            continue
        # reject instances degenerate for the normalization formulas
        bad = False
        for view in views:
            if abs(view[1][1] - view[0][1]) < 1e-6:
                bad = True
        if bad:
            continue
        inst = ProblemInstance(points=tuple(views), baseline=cfg.baseline)
        gt = GroundTruth(
            r2=r2,
            r3=r3,
            t=o2.copy(),
            o2=o2,
            o3=o3,
            points=pts,
            lam=lam,
            sigma=1,
        )
        return inst, gt
    raise SolverError("visibility rejection sampling did not converge")


def add_noise(
    inst: ProblemInstance,
    sigma_px: float,
    rng,
    image_size: int = 512,
    fov_deg: float = 45.0,
) -> ProblemInstance:
    """Perturb every image coordinate by N(0, (sigma_px/f)^2), f the focal
    length in pixels.  sigma_px = 0 returns the instance unchanged."""
    if sigma_px < 0:
        raise ValueError("noise sigma must be nonnegative")
    if sigma_px == 0:
        return inst
    f = (image_size / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
    s = sigma_px / f
    views = []
    for view in inst.points:
        new = []
        for x, y in view:
            new.append((float(x) + s * rng.normal(), float(y) + s * rng.normal()))
        views.append(tuple(new))
    return ProblemInstance(points=tuple(views), baseline=inst.baseline)


# ---------------------------------------------------------------------------
# error metrics


def rot_error(r_est: np.ndarray, r_true: np.ndarray) -> float:
    """Angle in degrees between two rotations (estimate already mapped back
    to the original frame).

    The angle whose cosine is (trace - 1)/2, evaluated in the atan2 form
    with the skew part supplying the sine: same quantity, but conditioned
    well enough to resolve sub-microdegree errors (plain arccos floors near
    1.2e-6 degrees)."""
    e = np.asarray(r_true).T @ np.asarray(r_est)
    c = (float(np.trace(e)) - 1.0) / 2.0
    v = 0.5 * np.array(
        [e[2, 1] - e[1, 2], e[0, 2] - e[2, 0], e[1, 0] - e[0, 1]]
    )
    s = float(np.linalg.norm(v))
    return math.degrees(math.atan2(s, c))


def transl_error(t_est, t_true) -> float:
    """Angle in degrees between two translation directions (atan2 form of
    the direction-cosine angle, stable for nearly parallel vectors)."""
    a = np.asarray(t_est, dtype=float)
    b = np.asarray(t_true, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("translation direction of zero length")
    c = float(np.dot(a, b))
    s = float(np.linalg.norm(np.cross(a, b)))
    return math.degrees(math.atan2(s, c))


# ---------------------------------------------------------------------------
# benchmark loop


BENCH_COLUMNS = (
    "config",
    "sigma_px",
    "trial",
    "rot_err_deg",
    "transl_err_deg",
    "reproj_err",
    "n_real_roots",
    "runtime_ms",
    "status",
)


def _solve_trial(args) -> dict:
    cfg_dict, sigma, trial = args
    cfg = ScenarioConfig(**cfg_dict)
    from .recover import solve

    inst, gt = generate_scene(cfg, trial)
    kind_flag = 0 if cfg.kind == "generic" else 1
    noise_rng = np.random.default_rng(
        [cfg.seed, trial, kind_flag, int(round(sigma * 1000)), 7]
    )
    noisy = add_noise(inst, sigma, noise_rng, cfg.image_size, cfg.fov_deg)
    row = {
        "config": cfg.kind,
        "sigma_px": f"{sigma:g}",
        "trial": trial,
        "rot_err_deg": "",
        "transl_err_deg": "",
        "reproj_err": "",
        "n_real_roots": "",
        "runtime_ms": "",
        "status": "ok",
    }
    t0 = time.perf_counter()
    try:
        sol = solve(noisy)
    except SolverError as exc:
        row["status"] = type(exc).__name__
        row["runtime_ms"] = f"{(time.perf_counter() - t0) * 1000.0:.1f}"
        return row
    dt = (time.perf_counter() - t0) * 1000.0
    e2 = rot_error(sol.r2, gt.r2)
    e3 = rot_error(sol.r3, gt.r3)
    row["rot_err_deg"] = repr((e2 + e3) / 2.0)
    row["transl_err_deg"] = repr(transl_error(sol.t, gt.t))
    row["reproj_err"] = repr(sol.reproj_error)
    row["n_real_roots"] = sol.n_real_roots
    row["runtime_ms"] = f"{dt:.1f}"
    return row


def default_sigmas() -> list[float]:
    return [round(0.1 * k, 1) for k in range(11)]


def run_benchmark(
    cfg: ScenarioConfig,
    sigmas: Sequence[float] | None = None,
    threads: int | None = None,
    include_runtime: bool = True,
) -> list[dict]:
    """Run the noise sweep: for every sigma, cfg.trials independent trials.

    Rows are deterministic given (cfg, sigmas): every trial derives its own
    random stream from (seed, trial, config, sigma), so parallel and serial
    runs produce identical rows.  Per-trial solver failures become status
    rows, not crashes.  `include_runtime=False` blanks the wall-time column
    so output bytes can be compared across runs.
    """
    if sigmas is None:
        sigmas = default_sigmas()
    if threads is None:
        threads = int(os.environ.get("COLLINEAR4P3V_THREADS", "0")) or (
            os.cpu_count() or 1
        )
    jobs = [
        (cfg.__dict__.copy(), float(sig), trial)
        for sig in sigmas
        for trial in range(cfg.trials)
    ]
    if threads > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(threads) as pool:
            rows = pool.map(_solve_trial, jobs, chunksize=1)
    else:
        rows = [_solve_trial(j) for j in jobs]
    if not include_runtime:
        for row in rows:
            row["runtime_ms"] = ""
    return rows


def write_csv(rows: Iterable[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def summarize(rows: Sequence[dict]) -> list[dict]:
    """Per (config, sigma) mean/median of the error columns plus failure rate."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["config"], row["sigma_px"]), []).append(row)
    out = []
    for (config, sigma), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], float(kv[0][1]))):
        rot = [float(r["rot_err_deg"]) for r in rs if r["status"] == "ok"]
        tra = [float(r["transl_err_deg"]) for r in rs if r["status"] == "ok"]
        n_ok = len(rot)
        out.append(
            {
                "config": config,
                "sigma_px": sigma,
                "n": len(rs),
                "n_ok": n_ok,
                "rot_mean": float(np.mean(rot)) if rot else float("nan"),
                "rot_median": float(np.median(rot)) if rot else float("nan"),
                "transl_mean": float(np.mean(tra)) if tra else float("nan"),
                "transl_median": float(np.median(tra)) if tra else float("nan"),
            }
        )
    return out
