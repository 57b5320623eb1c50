"""Revival periods of the four driven rings at their critical frequencies.

For each parameter set: locate omega_c, evolve the chosen mode block,
report the measured peak gap next to 2 pi / dE, and scan omega for the
frequencies at which 2 pi / dE of the same block would equal the target
revival time.

Usage: python3 scripts/revival_periods.py
"""

import math

import numpy as np

from quadfloquet import (
    DriveParams,
    InitialStateSpec,
    LatticeParams,
    detect_revivals,
    evolve,
    prepare_state,
    quasi_energies,
    sweep_frequency,
)
from quadfloquet.dynamics import auto_substeps, predicted_period
from quadfloquet.floquet import Sampling

SETUPS = {
    "a": (LatticeParams(6, 7.0, 7.0, 3.0, "periodic"), (6, 7, 8), 128.0),
    "b": (LatticeParams(6, 10.0, 10.0, 3.0, "periodic"), (4, 5, 6), 175.0),
    "c": (LatticeParams(6, 7.0, 8.5, 10.0, "periodic"), (5, 6, 7, 8, 9), 78.0),
    "d": (LatticeParams(6, 7.0, 10.0, 10.0, "periodic"), (6, 7, 8), 92.0),
}
GRID = np.round(np.arange(0.5, 20.0 + 1e-9, 0.1), 12)
SCAN = np.round(np.arange(0.3, 20.0 + 1e-9, 0.02), 12)


def crossings(p, modes, target):
    periods = np.array([predicted_period(quasi_energies(p, DriveParams(w)), modes) for w in SCAN])
    s = np.sign(periods - target)
    return [float(SCAN[i]) for i in np.flatnonzero(s[:-1] * s[1:] < 0)]


if __name__ == "__main__":
    for k, (p, modes, target) in SETUPS.items():
        sw = sweep_frequency(p, GRID)
        d = DriveParams(sw.omega_c)
        fr = quasi_energies(p, d)
        spec = InitialStateSpec(modes)
        trace = evolve(prepare_state(spec, fr), p, d, 0.1, 600.0,
                       substeps=auto_substeps(0.1, d), sampling=Sampling.MIDPOINT)
        rep = detect_revivals(trace, fr, modes=modes)
        whole = predicted_period(fr)
        print(f"[{k}] omega_c={sw.omega_c:.5f} Delta={sw.delta_at_omega_c:.4f} "
              f"dE={sw.ladder_spacing:.4f}")
        print(f"    block 2pi/dE={rep.predicted_period:.2f}  whole-spectrum 2pi/dE={whole:.2f}  "
              f"measured={rep.period_estimate:.2f}  target={target:g}")
        hits = crossings(p, modes, target)
        print(f"    omega where block 2pi/dE = {target:g}: "
              + (", ".join(f"{w:.2f}" for w in hits) if hits else "none in scan"))
        print(f"    dE needed for the target: {2 * math.pi / target:.4f}")
