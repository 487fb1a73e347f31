"""World model: bounds, hard no-go polygons, and the current field.

The current field is a regular lattice of velocity vectors queried with
bilinear interpolation. Queries outside the lattice clamp to the nearest
cell so that padded geometry slightly past the data extent stays usable.
"""

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import Polygon

from .exceptions import InvalidEnvironment
from .geometry import points_in_polygon, polygon_area, polygon_centroid

# ASV used in the field experiments: 2 m hull, 1.0 m/s, 35 deg/s.
DEFAULT_V_THRUST = 1.0
DEFAULT_OMEGA_MAX = math.radians(35.0)
DEFAULT_LENGTH = 2.0


@dataclass(frozen=True)
class VehicleModel:
    v_thrust: float = DEFAULT_V_THRUST
    omega_max: float = DEFAULT_OMEGA_MAX
    length: float = DEFAULT_LENGTH

    def __post_init__(self):
        if not (self.v_thrust > 0 and math.isfinite(self.v_thrust)):
            raise InvalidEnvironment(f"v_thrust must be positive, got {self.v_thrust}")
        if not (self.omega_max > 0 and math.isfinite(self.omega_max)):
            raise InvalidEnvironment(f"omega_max must be positive, got {self.omega_max}")
        if not self.length >= 0:
            raise InvalidEnvironment(f"length must be non-negative, got {self.length}")

    @property
    def turn_radius(self):
        """Still-water turning radius v_thrust / omega_max."""
        return self.v_thrust / self.omega_max

    def to_dict(self):
        return {"v_thrust": self.v_thrust, "omega_max": self.omega_max, "length": self.length}


@dataclass(frozen=True, eq=False)
class CurrentField:
    """Velocity lattice ``grid[j, i] = (vx, vy)`` at ``origin + (i, j) * spacing``."""

    grid: np.ndarray
    spacing: float
    origin: tuple = (0.0, 0.0)
    noise_sigma_dir: float = 0.0
    noise_sigma_mag: float = 0.0

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        if g.ndim != 3 or g.shape[2] != 2 or g.shape[0] < 1 or g.shape[1] < 1:
            raise InvalidEnvironment(f"current grid must have shape (ny, nx, 2), got {g.shape}")
        bad = np.argwhere(~np.isfinite(g).all(axis=2))
        if len(bad):
            j, i = bad[0]
            raise InvalidEnvironment(f"non-finite current vector at cell (x_index={i}, y_index={j})")
        if not (self.spacing > 0):
            raise InvalidEnvironment(f"field spacing must be positive, got {self.spacing}")
        if self.noise_sigma_dir < 0 or self.noise_sigma_mag < 0:
            raise InvalidEnvironment("noise sigmas must be non-negative")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self):
        return self.grid.shape[:2]

    @property
    def max_speed(self):
        return float(np.linalg.norm(self.grid, axis=2).max())

    def node_positions(self):
        ny, nx = self.shape
        xs = self.origin[0] + self.spacing * np.arange(nx)
        ys = self.origin[1] + self.spacing * np.arange(ny)
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    def sample(self, points):
        """Bilinear interpolation at one point ``(2,)`` or many ``(n, 2)``."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = pts.reshape(-1, 2)
        ny, nx = self.shape
        fx = (pts[:, 0] - self.origin[0]) / self.spacing
        fy = (pts[:, 1] - self.origin[1]) / self.spacing
        fx = np.clip(fx, 0.0, nx - 1)
        fy = np.clip(fy, 0.0, ny - 1)
        i0 = np.minimum(np.floor(fx).astype(int), max(nx - 2, 0))
        j0 = np.minimum(np.floor(fy).astype(int), max(ny - 2, 0))
        i1 = np.minimum(i0 + 1, nx - 1)
        j1 = np.minimum(j0 + 1, ny - 1)
        tx = (fx - i0)[:, None]
        ty = (fy - j0)[:, None]
        g = self.grid
        out = ((1 - tx) * (1 - ty) * g[j0, i0] + tx * (1 - ty) * g[j0, i1]
               + (1 - tx) * ty * g[j1, i0] + tx * ty * g[j1, i1])
        return out[0] if single else out

    def sample_xy(self, x, y):
        """Scalar twin of :meth:`sample` on plain floats, for single-vehicle loops."""
        ny, nx = self.shape
        fx = min(max((x - self.origin[0]) / self.spacing, 0.0), nx - 1)
        fy = min(max((y - self.origin[1]) / self.spacing, 0.0), ny - 1)
        i0 = min(int(fx), max(nx - 2, 0))
        j0 = min(int(fy), max(ny - 2, 0))
        i1 = min(i0 + 1, nx - 1)
        j1 = min(j0 + 1, ny - 1)
        tx, ty = fx - i0, fy - j0
        g = self._rows
        a, b, c, d = g[j0][i0], g[j0][i1], g[j1][i0], g[j1][i1]
        w00, w10, w01, w11 = (1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty
        return (w00 * a[0] + w10 * b[0] + w01 * c[0] + w11 * d[0],
                w00 * a[1] + w10 * b[1] + w01 * c[1] + w11 * d[1])

    @property
    def _rows(self):
        rows = self.__dict__.get("_rows_cache")
        if rows is None or rows[0] is not self.grid:
            rows = (self.grid, self.grid.tolist())
            self.__dict__["_rows_cache"] = rows
        return rows[1]


def sample_current(field, x):
    return field.sample(x)


def _angular_spread(vectors, mean_dir):
    ang = np.arctan2(vectors[:, 1], vectors[:, 0])
    dev = np.angle(np.exp(1j * (ang - mean_dir)))
    return float(np.sqrt(np.mean(dev ** 2)))


def local_current_stats(field, region):
    """Mean current and direction/magnitude spread over the grid nodes in ``region``.

    Spreads are population standard deviations (direction deviations are
    wrapped around the mean direction), combined with the configured noise
    sigmas by root-sum-square. A region containing no grid node falls back
    to the node nearest its centroid with noise only.

    Returns ``(mean_vector, std_dir, std_mag)``.
    """
    region = np.asarray(region, dtype=float)
    nodes = field.node_positions()
    lo, hi = region.min(axis=0), region.max(axis=0)
    box = np.all((nodes >= lo - 1e-12) & (nodes <= hi + 1e-12), axis=1)
    idx = np.flatnonzero(box)
    inside = idx[points_in_polygon(nodes[idx], region)] if len(idx) else idx
    flat = field.grid.reshape(-1, 2)
    if len(inside) == 0:
        c = polygon_centroid(region)
        mean = field.sample(c)
        return mean, float(field.noise_sigma_dir), float(field.noise_sigma_mag)
    vecs = flat[inside]
    mean = vecs.mean(axis=0)
    mags = np.linalg.norm(vecs, axis=1)
    if np.linalg.norm(mean) > 1e-12:
        std_dir = _angular_spread(vecs[mags > 1e-12], math.atan2(mean[1], mean[0])) if (mags > 1e-12).any() else 0.0
    else:
        std_dir = 0.0
    std_mag = float(mags.std())
    return (mean,
            float(math.hypot(std_dir, field.noise_sigma_dir)),
            float(math.hypot(std_mag, field.noise_sigma_mag)))


# --- analytic generators -------------------------------------------------

def _uniform(X, Y, bounds, vx=None, vy=None, direction_deg=None, magnitude=None):
    if direction_deg is not None:
        b = math.radians(direction_deg)
        vx, vy = magnitude * math.cos(b), magnitude * math.sin(b)
    return np.full_like(X, vx or 0.0), np.full_like(Y, vy or 0.0)


def _four_gyre(X, Y, bounds, amplitude=0.6, cells_x=2, cells_y=2, sign=1.0):
    # psi = A sin(m pi x / W) sin(n pi y / H); amplitude is the peak speed.
    xmin, ymin, xmax, ymax = bounds
    kx = cells_x * math.pi / (xmax - xmin)
    ky = cells_y * math.pi / (ymax - ymin)
    sx, cx = np.sin(kx * (X - xmin)), np.cos(kx * (X - xmin))
    sy, cy = np.sin(ky * (Y - ymin)), np.cos(ky * (Y - ymin))
    scale = sign * amplitude / max(kx, ky)
    return -scale * ky * sx * cy, scale * kx * cx * sy


def _single_gyre(X, Y, bounds, amplitude=0.5, sign=1.0):
    return _four_gyre(X, Y, bounds, amplitude=amplitude, cells_x=1, cells_y=1, sign=sign)


def _jet(X, Y, bounds, direction_deg=90.0, magnitude=0.5, center=(0.0, 0.0), width=20.0, background=0.0):
    """Straight Gaussian-profile current band along ``direction_deg``."""
    b = math.radians(direction_deg)
    u = np.array([math.cos(b), math.sin(b)])
    n = np.array([-u[1], u[0]])
    off = (X - center[0]) * n[0] + (Y - center[1]) * n[1]
    speed = background + (magnitude - background) * np.exp(-0.5 * (off / width) ** 2)
    return speed * u[0], speed * u[1]


FIELD_GENERATORS = {
    "uniform": _uniform,
    "four_gyre": _four_gyre,
    "single_gyre": _single_gyre,
    "jet": _jet,
}


def rasterize_field(generator, bounds, spacing, params=None, noise=(0.0, 0.0)):
    """Evaluate a named analytic generator on a lattice covering ``bounds``."""
    if generator not in FIELD_GENERATORS:
        raise InvalidEnvironment(f"unknown field generator {generator!r}; known: {sorted(FIELD_GENERATORS)}")
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    spacing = float(spacing)
    nx = int(math.ceil((xmax - xmin) / spacing - 1e-9)) + 1
    ny = int(math.ceil((ymax - ymin) / spacing - 1e-9)) + 1
    xs = xmin + spacing * np.arange(nx)
    ys = ymin + spacing * np.arange(ny)
    X, Y = np.meshgrid(xs, ys)
    vx, vy = FIELD_GENERATORS[generator](X, Y, (xmin, ymin, xmax, ymax), **(params or {}))
    grid = np.stack([vx, vy], axis=2)
    return CurrentField(grid, spacing, (xmin, ymin), float(noise[0]), float(noise[1]))


# --- environment ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Environment:
    bounds: tuple
    obstacles: tuple
    field: CurrentField
    name: str = "env"
    vehicle: VehicleModel = dc_field(default_factory=VehicleModel)
    start: tuple = None
    goal: tuple = None
    source: dict = None

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(float(v) for v in self.bounds))
        obs = tuple(np.array(p, dtype=float) for p in self.obstacles)
        for p in obs:
            p.setflags(write=False)
        object.__setattr__(self, "obstacles", obs)
        validate_environment(self)

    @property
    def width(self):
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self):
        return self.bounds[3] - self.bounds[1]

    def bounds_polygon(self):
        xmin, ymin, xmax, ymax = self.bounds
        return np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])

    def shapely_obstacles(self):
        return [Polygon(p) for p in self.obstacles]

    def in_obstacle(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.zeros(len(pts), dtype=bool)
        for p in self.obstacles:
            out |= points_in_polygon(pts, p)
        return out

    def to_dict(self):
        d = {
            "name": self.name,
            "bounds": list(self.bounds),
            "obstacles": [p.tolist() for p in self.obstacles],
            "noise": {"sigma_dir": self.field.noise_sigma_dir, "sigma_mag": self.field.noise_sigma_mag},
            "vehicle": self.vehicle.to_dict(),
        }
        if self.source and self.source.get("type") == "analytic":
            d["field"] = dict(self.source)
        else:
            d["field"] = {
                "type": "grid",
                "origin": list(self.field.origin),
                "spacing": self.field.spacing,
                "rows": self.field.grid.tolist(),
            }
        if self.start is not None:
            d["start"] = list(self.start)
        if self.goal is not None:
            d["goal"] = list(self.goal)
        return d


def validate_environment(env):
    xmin, ymin, xmax, ymax = env.bounds
    if not (xmax > xmin and ymax > ymin):
        raise InvalidEnvironment(f"bounds must have positive extent, got {env.bounds}")
    polys = []
    for k, p in enumerate(env.obstacles):
        if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
            raise InvalidEnvironment(f"obstacle {k}: need at least 3 (x, y) vertices")
        if not np.isfinite(p).all():
            raise InvalidEnvironment(f"obstacle {k}: non-finite vertex")
        if (p[:, 0] < xmin - 1e-9).any() or (p[:, 0] > xmax + 1e-9).any() \
                or (p[:, 1] < ymin - 1e-9).any() or (p[:, 1] > ymax + 1e-9).any():
            raise InvalidEnvironment(f"obstacle {k}: vertex outside bounds")
        steps = np.linalg.norm(p - np.roll(p, -1, axis=0), axis=1)
        if (steps < 1e-9).any():
            raise InvalidEnvironment(f"obstacle {k}: degenerate polygon (duplicate consecutive vertices)")
        if abs(polygon_area(p)) < 1e-12:
            raise InvalidEnvironment(f"obstacle {k}: degenerate polygon (zero area)")
        poly = Polygon(p)
        if not poly.exterior.is_simple or not poly.is_valid:
            raise InvalidEnvironment(f"obstacle {k}: simple polygon violated")
        polys.append(poly)
    if polys:
        tree = shapely.STRtree(polys)
        for k, poly in enumerate(polys):
            for m in tree.query(poly):
                if m <= k:
                    continue
                if poly.intersection(polys[m]).area > 1e-9:
                    raise InvalidEnvironment(f"obstacles {k} and {m} overlap")
    vmax = env.field.max_speed
    if not env.vehicle.v_thrust > vmax:
        raise InvalidEnvironment(
            f"underactuated assumption violated: v_thrust={env.vehicle.v_thrust} <= max current {vmax:.6g}")


def make_environment(bounds, obstacles, field, name="env", vehicle=None, start=None, goal=None, source=None):
    """Build an Environment with obstacles normalised to counter-clockwise order."""
    obs = []
    for p in obstacles:
        p = np.asarray(p, dtype=float)
        if len(p) >= 3 and polygon_area(p) < 0:
            p = p[::-1]
        obs.append(p)
    return Environment(tuple(bounds), tuple(obs), field, name, vehicle or VehicleModel(),
                       None if start is None else tuple(start),
                       None if goal is None else tuple(goal), source)


def _read_csv_field(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append((int(rec["x_index"]), int(rec["y_index"]), float(rec["vx"]), float(rec["vy"])))
    if not rows:
        raise InvalidEnvironment(f"{path}: empty current CSV")
    nx = max(r[0] for r in rows) + 1
    ny = max(r[1] for r in rows) + 1
    grid = np.full((ny, nx, 2), np.nan)
    for i, j, vx, vy in rows:
        grid[j, i] = (vx, vy)
    return grid


def environment_from_dict(doc, base_dir="."):
    try:
        bounds = doc["bounds"]
        obstacles = doc.get("obstacles", [])
        fdoc = doc["field"]
    except (KeyError, TypeError) as exc:
        raise InvalidEnvironment(f"missing required field: {exc}") from None
    noise = doc.get("noise", {})
    sig = (float(noise.get("sigma_dir", 0.0)), float(noise.get("sigma_mag", 0.0)))
    ftype = fdoc.get("type", "grid")
    source = None
    if ftype == "analytic":
        spacing = float(fdoc.get("spacing", 5.0))
        fld = rasterize_field(fdoc["generator"], bounds, spacing, fdoc.get("params"), sig)
        source = dict(fdoc)
    elif ftype == "grid":
        if "csv" in fdoc:
            grid = _read_csv_field(Path(base_dir) / fdoc["csv"])
        else:
            grid = np.asarray(fdoc["rows"], dtype=float)
        fld = CurrentField(grid, float(fdoc["spacing"]), tuple(fdoc.get("origin", bounds[:2])), *sig)
    else:
        raise InvalidEnvironment(f"unknown field type {ftype!r}")
    vehicle = VehicleModel(**doc["vehicle"]) if "vehicle" in doc else VehicleModel()
    return make_environment(bounds, obstacles, fld, doc.get("name", "env"), vehicle,
                            doc.get("start"), doc.get("goal"), source)


def load_environment(path):
    """Parse and validate an environment file (JSON document)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"environment file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidEnvironment(f"{path}: parse failure: {exc}") from None
    return environment_from_dict(doc, base_dir=path.parent)


def save_environment(env, path):
    Path(path).write_text(json.dumps(env.to_dict(), indent=1) + "\n")
