"""Synthetic stand-in for the 2006 CHF table.

The real table is not redistributable here, so tests and demos use a smooth,
made-up CHF surface sampled on (subsets of) the genuine 2006 axes. Its values
have the right qualitative shape (CHF rises with mass flux and subcooling,
falls with quality, vanishes towards x = 1) and the right order of magnitude,
but they are NOT Groeneveld data and must never be reported as such.

``python -m chfnet.sample OUT.csv [--full]`` writes a grid to disk.
"""
import argparse
from importlib import resources

import numpy as np

from .lut import LUT2006_MASS_FLUXES, LUT2006_PRESSURES, LUT2006_QUALITIES, LutGrid, write_lut

P_CRIT = 22.064  # MPa, water

SAMPLE_PRESSURES = (0.1, 1.0, 3.0, 7.0, 10.0, 14.0, 18.0, 21.0)
SAMPLE_MASS_FLUXES = (0.0, 100.0, 500.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0, 7000.0, 8000.0)
SAMPLE_QUALITIES = (-0.5, -0.3, -0.15, -0.05, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0)


def synthetic_chf(p, g, x):
    """Made-up CHF surface [kW/m2]; vectorised over broadcastable inputs."""
    p, g, x = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (p, g, x)))
    pr = p / P_CRIT
    q0 = 4200.0 * (1.0 - pr) ** 0.9 * (1.0 + 2.2 * pr * np.exp(-4.0 * pr))
    flow = 0.15 + (g / 1000.0) ** 0.75
    x_crit = 0.95 - 0.35 * np.sqrt(g / 8000.0) - 0.35 * pr
    burnout = np.clip((x_crit - x) / (x_crit + 0.5), 0.0, None) ** 1.3
    tail = 450.0 * (1.0 - pr) * (1.0 - x) * (1.0 + g / 4000.0) ** 0.5
    return q0 * flow * burnout + tail


def synthetic_grid(pressures=SAMPLE_PRESSURES, mass_fluxes=SAMPLE_MASS_FLUXES, qualities=SAMPLE_QUALITIES):
    mesh = np.meshgrid(pressures, mass_fluxes, qualities, indexing="ij")
    values = np.round(synthetic_chf(*mesh), 1)
    return LutGrid(np.array(pressures), np.array(mass_fluxes), np.array(qualities), values)


def full_synthetic_grid():
    """Synthetic values on the complete 15 x 21 x 23 axes of the 2006 table."""
    return synthetic_grid(LUT2006_PRESSURES, LUT2006_MASS_FLUXES, LUT2006_QUALITIES)


def sample_lut_path():
    """Path of the packaged sample grid CSV (8 x 11 x 12 synthetic nodes)."""
    return resources.files("chfnet") / "data" / "sample_lut.csv"


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m chfnet.sample", description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--full", action="store_true", help="use all 7245 nodes of the 2006 axes")
    args = ap.parse_args(argv)
    write_lut(full_synthetic_grid() if args.full else synthetic_grid(), args.out)


if __name__ == "__main__":
    main()
