"""Constant-thrust unicycle kinematics under a current field.

    px' = v cos(theta) + cx(p),  py' = v sin(theta) + cy(p),  theta' = omega

Integration is fixed-step RK4. Batched variants integrate many vehicles at
once; the current may be a CurrentField or a per-vehicle constant vector.
"""

import math
from dataclasses import dataclass

import numpy as np

from .env import local_current_stats
from .geometry import point_segment_distance, wrap_angle

PADDING_DT = 0.05
VERIFY_DT = 0.01
DEFAULT_HEADING_SPREAD = math.radians(30.0)


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self):
        return np.array([self.x, self.y])


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # (n, 3): x, y, heading
    dt: float

    @property
    def positions(self):
        return self.states[:, :2]

    @property
    def times(self):
        return self.dt * np.arange(len(self.states))


def _current_fn(field, current):
    if current is not None:
        c = np.asarray(current, dtype=float)
        return lambda p: np.broadcast_to(c, p.shape)
    if field is None:
        return lambda p: np.zeros_like(p)
    return field.sample


def integrate_batch(positions, headings, omegas, v_thrust, dt, n_steps, field=None, current=None):
    """RK4 for ``m`` vehicles. Returns positions ``(n_steps+1, m, 2)`` and headings ``(n_steps+1, m)``.

    ``current`` (shape ``(2,)`` or ``(m, 2)``) overrides ``field`` with a
    spatially constant current per vehicle.
    """
    p = np.array(positions, dtype=float).reshape(-1, 2)
    th = np.array(headings, dtype=float).reshape(-1)
    om = np.broadcast_to(np.asarray(omegas, dtype=float), th.shape)
    if current is not None or field is None:
        return _integrate_constant(p, th, om, v_thrust, dt, n_steps, current)
    if len(th) == 1 and hasattr(field, "sample_xy"):
        return _integrate_single(p[0], th[0], om[0], v_thrust, dt, n_steps, field)
    cfn = _current_fn(field, current)
    P = np.empty((n_steps + 1,) + p.shape)
    TH = np.empty((n_steps + 1,) + th.shape)
    P[0], TH[0] = p, th

    def deriv(pp, tt):
        return v_thrust * np.stack([np.cos(tt), np.sin(tt)], axis=1) + cfn(pp)

    for n in range(n_steps):
        k1 = deriv(p, th)
        k2 = deriv(p + 0.5 * dt * k1, th + 0.5 * dt * om)
        k3 = deriv(p + 0.5 * dt * k2, th + 0.5 * dt * om)
        k4 = deriv(p + dt * k3, th + dt * om)
        p = p + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        th = th + dt * om
        P[n + 1], TH[n + 1] = p, th
    return P, TH


def _integrate_single(p, th, om, v, dt, n_steps, field):
    # same RK4 as the batch loop, on floats: numpy call overhead dominates for one vehicle
    c = field.sample_xy
    x, y, th = float(p[0]), float(p[1]), float(th)
    om, h = float(om), 0.5 * dt
    out, headings = [(x, y)], [th]
    for n in range(n_steps):
        th0 = th
        th1, th2 = th0 + h * om, th0 + dt * om
        cx, cy = c(x, y)
        k1x, k1y = v * math.cos(th0) + cx, v * math.sin(th0) + cy
        cx, cy = c(x + h * k1x, y + h * k1y)
        k2x, k2y = v * math.cos(th1) + cx, v * math.sin(th1) + cy
        cx, cy = c(x + h * k2x, y + h * k2y)
        k3x, k3y = v * math.cos(th1) + cx, v * math.sin(th1) + cy
        cx, cy = c(x + dt * k3x, y + dt * k3y)
        k4x, k4y = v * math.cos(th2) + cx, v * math.sin(th2) + cy
        x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        th = th2
        out.append((x, y))
        headings.append(th)
    return np.asarray(out).reshape(n_steps + 1, 1, 2), np.asarray(headings).reshape(n_steps + 1, 1)


def _integrate_constant(p, th, om, v_thrust, dt, n_steps, current):
    # With a position-independent current the RK4 stages depend only on
    # time: each step adds (dt/6) v Re(g e^{i theta_n}) + dt c with
    # g = 1 + 4 e^{i omega dt/2} + e^{i omega dt}.
    m = len(th)
    c = np.zeros((m, 2)) if current is None else np.broadcast_to(np.asarray(current, dtype=float), (m, 2))
    t = np.arange(n_steps + 1) * dt
    uo, inv = np.unique(om, return_inverse=True)
    z = np.exp(1j * np.outer(t[:-1], uo))[:, inv] * np.exp(1j * th)[None, :]
    g = 1.0 + 4.0 * np.exp(0.5j * om * dt) + np.exp(1j * om * dt)
    inc = (dt / 6.0 * v_thrust) * (z * g[None, :]) + dt * (c[:, 0] + 1j * c[:, 1])[None, :]
    zc = np.empty((n_steps + 1, m), dtype=complex)
    zc[0] = p[:, 0] + 1j * p[:, 1]
    np.cumsum(inc, axis=0, out=zc[1:])
    zc[1:] += zc[0][None, :]
    P = np.stack([zc.real, zc.imag], axis=-1)
    TH = th[None, :] + om[None, :] * t[:, None]
    return P, TH


def integrate(start, omega, field, vehicle, dt, duration):
    """Integrate one vehicle for ``duration`` seconds at constant turn rate."""
    if abs(omega) > vehicle.omega_max * (1 + 1e-12):
        raise ValueError(f"|omega|={abs(omega)} exceeds omega_max={vehicle.omega_max}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(duration / dt))
    P, TH = integrate_batch(start.position, start.heading, omega, vehicle.v_thrust, dt, n, field=field)
    states = np.column_stack([P[:, 0, :], wrap_angle(TH[:, 0])])
    return Trajectory(states, dt)


def hard_over_steps(vehicle, dt):
    """Steps for one full 2*pi heading revolution at omega_max."""
    return int(math.ceil(2.0 * math.pi / vehicle.omega_max / dt - 1e-9))


def simulate_hard_over(position, heading, turn, vehicle, dt=PADDING_DT, field=None, current=None):
    """Positions ``(n+1, m, 2)`` of hard-over turns; ``turn`` is +1 (left) or -1 (right)."""
    n = hard_over_steps(vehicle, dt)
    heading = np.atleast_1d(np.asarray(heading, dtype=float))
    pos = np.broadcast_to(np.asarray(position, dtype=float), heading.shape + (2,))
    om = np.broadcast_to(np.asarray(turn, dtype=float) * vehicle.omega_max, heading.shape)
    P, _ = integrate_batch(pos, heading, om, vehicle.v_thrust, dt, n, field=field, current=current)
    return P


def turn_extremes(trajectory, entry):
    """Advance (max forward excursion) and tactical diameter (max lateral excursion).

    Measured in the entry frame. Returned tactical diameter is unsigned.
    """
    rel = trajectory.positions - entry.position
    fwd = np.array([math.cos(entry.heading), math.sin(entry.heading)])
    lat = np.array([-fwd[1], fwd[0]])
    along = rel @ fwd
    across = rel @ lat
    return float(along.max()), float(np.abs(across).max())


def signed_edge_distance(points, a, b):
    """Distance to segment ab, negative where a point has crossed it.

    The free side is to the left of a->b. Points on the right side whose
    projection falls within the segment are inside by their line distance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    L = float(np.hypot(*d))
    dist = point_segment_distance(pts, a, b)
    side = (d[0] * (pts[:, 1] - a[1]) - d[1] * (pts[:, 0] - a[0])) / L
    t = ((pts - a) @ d) / (L * L)
    crossed = (side < 0) & (t >= 0) & (t <= 1)
    return np.where(crossed, side, dist)


def line_clearance(P, a, b):
    """Minimum signed distance of trajectories to the infinite line through a->b.

    ``P`` has shape ``(n, m, 2)``; returns ``(m,)``. Positive on the free
    (left) side.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    L = float(np.hypot(*d))
    side = (d[0] * (P[..., 1] - a[1]) - d[1] * (P[..., 0] - a[0])) / L
    return side.min(axis=0)


def hard_over_clearance(entry, turn, edge, field, vehicle, dt=PADDING_DT):
    """Signed minimum distance from a full hard-over turn to ``edge``.

    ``turn`` is ``"left"``/``"right"`` (or +1/-1); ``edge`` is ``(a, b)``
    with free water on the left of a->b. Negative means the turn crossed.
    """
    sgn = {"left": 1, "right": -1}.get(turn, turn)
    P = simulate_hard_over(entry.position, entry.heading, sgn, vehicle, dt, field=field)
    a, b = edge
    return float(signed_edge_distance(P[:, 0, :], a, b).min())


def draw_currents(rng, mean, std_dir, std_mag, n):
    """Uniform current realizations: mean rotated/scaled by Gaussian noise."""
    mean = np.asarray(mean, dtype=float)
    mag0 = float(np.hypot(*mean))
    ang0 = math.atan2(mean[1], mean[0]) if mag0 > 0 else 0.0
    ang = ang0 + rng.normal(0.0, std_dir, n) if std_dir > 0 else np.full(n, ang0)
    mag = np.maximum(mag0 + rng.normal(0.0, std_mag, n), 0.0) if std_mag > 0 else np.full(n, mag0)
    return np.stack([mag * np.cos(ang), mag * np.sin(ang)], axis=1)


def best_effort_distance_samples(entry_region, midline_dir, field, vehicle, edge, n_samples,
                                 rng=None, heading_spread=DEFAULT_HEADING_SPREAD, dt=PADDING_DT,
                                 stats=None):
    """Per-sample best-turn clearance of hard-over maneuvers started on ``edge``.

    Each sample draws a heading uniformly within ``heading_spread`` of
    ``midline_dir`` and a uniform current realization from the local
    statistics of ``entry_region``. Both hard-over turns are simulated from
    the point on the edge nearest the region's centroid; the sample keeps
    the better of the two clearances to the edge's supporting line. Values
    are <= 0 and their negation is the encroachment depth a vehicle needs
    as standoff from the edge.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    a, b = (np.asarray(v, dtype=float) for v in edge)
    region = np.asarray(entry_region, dtype=float)
    mean, sd_dir, sd_mag = stats if stats is not None else local_current_stats(field, region)
    headings = midline_dir + rng.uniform(-heading_spread, heading_spread, n_samples) if heading_spread > 0 \
        else np.full(n_samples, float(midline_dir))
    currents = draw_currents(rng, mean, sd_dir, sd_mag, n_samples)
    c = region.mean(axis=0)
    d = b - a
    t = np.clip(((c - a) @ d) / (d @ d), 0.0, 1.0)
    entry = a + t * d
    both_h = np.concatenate([headings, headings])
    both_c = np.concatenate([currents, currents])
    turns = np.concatenate([np.ones(n_samples), -np.ones(n_samples)])
    clear = constant_current_line_clearance(entry, both_h, turns, both_c, vehicle, dt, a, b)
    return np.maximum(clear[:n_samples], clear[n_samples:])


def constant_current_line_clearance(position, headings, turns, currents, vehicle, dt, a, b):
    """``line_clearance`` of hard-over turns under per-vehicle constant currents.

    Same RK4 recurrence as ``simulate_hard_over`` but only the offset along
    the line normal is accumulated, which avoids materializing trajectories.
    """
    n_steps = hard_over_steps(vehicle, dt)
    th = np.asarray(headings, dtype=float)
    om = np.asarray(turns, dtype=float) * vehicle.omega_max
    c = np.asarray(currents, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    nrm = np.array([-d[1], d[0]]) / float(np.hypot(*d))
    nz = complex(nrm[0], -nrm[1])  # Re(nz * z) == nrm . (x, y)
    t = np.arange(n_steps) * dt
    uo, inv = np.unique(om, return_inverse=True)
    z = np.exp(1j * np.outer(t, uo))[:, inv] * (nz * np.exp(1j * th))[None, :]
    g = 1.0 + 4.0 * np.exp(0.5j * om * dt) + np.exp(1j * om * dt)
    inc = (dt / 6.0 * vehicle.v_thrust) * (z * g[None, :]).real + dt * (c @ nrm)[None, :]
    side0 = float((np.asarray(position, dtype=float) - a) @ nrm)
    prog = np.cumsum(inc, axis=0).min(axis=0)
    return side0 + np.minimum(prog, 0.0)
