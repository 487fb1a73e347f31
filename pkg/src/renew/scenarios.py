"""Built-in scenarios at desk scale.

``four-gyre``, ``ablation``, ``strait``, ``hugging`` and ``empty`` are
generated in code; coastal stand-ins (``hansando``, ``far-east``,
``palawan-summer``, ``palawan-winter``) are packaged environment files with
simplified polygons. Coastal geometry and currents are approximations, not survey data.
"""

import json
import math
from importlib import resources

from .env import VehicleModel, environment_from_dict, make_environment, rasterize_field
from .exceptions import InvalidEnvironment

FOUR_GYRE_OBSTACLES = [
    [[88, 84], [112, 84], [116, 100], [112, 116], [88, 116], [84, 100]],
    [[40, 112], [64, 118], [60, 140], [36, 134]],
    [[140, 60], [162, 66], [158, 88], [136, 82]],
    [[126, 142], [150, 134], [158, 158], [134, 164]],
    [[44, 40], [68, 48], [60, 70], [38, 62]],
]

PACKAGED = {
    "hansando": "hansando.json",
    "far-east": "far_east.json",
    "palawan-summer": "palawan_summer.json",
    "palawan-winter": "palawan_winter.json",
}


def four_gyre(amplitude=0.6, spacing=5.0, noise_dir=0.1, noise_mag=0.03, start=(20.0, 20.0),
              goal=(180.0, 180.0), sign=1.0):
    bounds = (0.0, 0.0, 200.0, 200.0)
    params = {"amplitude": amplitude, "sign": sign}
    fld = rasterize_field("four_gyre", bounds, spacing, params, (noise_dir, noise_mag))
    source = {"type": "analytic", "generator": "four_gyre", "params": params, "spacing": spacing}
    return make_environment(bounds, FOUR_GYRE_OBSTACLES, fld, "four-gyre", VehicleModel(), start, goal, source)


def ablation(beta_deg=45.0, magnitude=0.7, spacing=5.0, noise_dir=0.05, noise_mag=0.02,
             start=(45.0, 8.0), goal=(45.0, 92.0)):
    """Single rectangular obstacle fixed to the west wall; the only passage is east of it."""
    bounds = (0.0, 0.0, 70.0, 100.0)
    obstacle = [[0.0, 40.0], [40.0, 40.0], [40.0, 60.0], [0.0, 60.0]]
    params = {"direction_deg": beta_deg, "magnitude": magnitude}
    fld = rasterize_field("uniform", bounds, spacing, params, (noise_dir, noise_mag))
    source = {"type": "analytic", "generator": "uniform", "params": params, "spacing": spacing}
    return make_environment(bounds, [obstacle], fld, f"ablation-{beta_deg:g}", VehicleModel(), start, goal, source)


def strait(cross_current=0.5, direction_deg=90.0, gap=8.0, spacing=5.0, noise_dir=0.05, noise_mag=0.02,
           start=(8.0, 50.0), goal=(112.0, 50.0)):
    """Two islands separated by a narrow strait; wide routes pass north and south."""
    bounds = (0.0, 0.0, 120.0, 100.0)
    half = gap / 2.0
    north = [[45.0, 50.0 + half], [75.0, 50.0 + half], [70.0, 72.0], [50.0, 72.0]]
    south = [[50.0, 28.0], [70.0, 28.0], [75.0, 50.0 - half], [45.0, 50.0 - half]]
    params = {"direction_deg": direction_deg, "magnitude": cross_current}
    fld = rasterize_field("uniform", bounds, spacing, params, (noise_dir, noise_mag))
    source = {"type": "analytic", "generator": "uniform", "params": params, "spacing": spacing}
    return make_environment(bounds, [north, south], fld, "strait", VehicleModel(), start, goal, source)


def hugging(onshore=0.6, spacing=5.0, noise_dir=0.05, noise_mag=0.02, start=(10.0, 32.0), goal=(90.0, 32.0)):
    """Long island with start and goal just off its north shore and a current pushing onto it."""
    bounds = (0.0, 0.0, 100.0, 60.0)
    island = [[20.0, 20.0], [80.0, 20.0], [80.0, 30.0], [20.0, 30.0]]
    params = {"direction_deg": 270.0, "magnitude": onshore}
    fld = rasterize_field("uniform", bounds, spacing, params, (noise_dir, noise_mag))
    source = {"type": "analytic", "generator": "uniform", "params": params, "spacing": spacing}
    return make_environment(bounds, [island], fld, "hugging", VehicleModel(), start, goal, source)


def empty(width=100.0, height=100.0, spacing=5.0, start=(10.0, 10.0), goal=(90.0, 90.0)):
    """Obstacle-free box with zero current."""
    bounds = (0.0, 0.0, float(width), float(height))
    params = {"vx": 0.0, "vy": 0.0}
    fld = rasterize_field("uniform", bounds, spacing, params)
    source = {"type": "analytic", "generator": "uniform", "params": params, "spacing": spacing}
    return make_environment(bounds, [], fld, "empty", VehicleModel(), start, goal, source)


def load_packaged(name):
    text = resources.files("renew.data").joinpath(PACKAGED[name]).read_text()
    return environment_from_dict(json.loads(text))


GENERATORS = {
    "four-gyre": four_gyre,
    "ablation": ablation,
    "strait": strait,
    "hugging": hugging,
    "empty": empty,
}


def scenario_names():
    return sorted(GENERATORS) + sorted(PACKAGED)


def generate(name, **params):
    """Deterministic Environment for a scenario id."""
    if name in GENERATORS:
        return GENERATORS[name](**params)
    if name in PACKAGED:
        if params:
            raise InvalidEnvironment(f"packaged scenario {name!r} takes no parameters")
        return load_packaged(name)
    raise InvalidEnvironment(f"unknown scenario {name!r}; known: {scenario_names()}")


def uniform_direction(beta_deg, magnitude):
    b = math.radians(beta_deg)
    return magnitude * math.cos(b), magnitude * math.sin(b)
