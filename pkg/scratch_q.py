import math
import numpy as np
from pulsespec import (
    DensityMatrix, DetuningModel, EmitterParams, PulseSequence,
    spectrum_single, ensemble_spectrum, default_grid, mhz_to_angular,
)

GAMMA = 1.0 / 12.3e-9
params = EmitterParams(decay_rate=GAMMA)
seq12 = PulseSequence.calibrated(12, 10e-9, 1.6e-9)
freqs = np.linspace(-150e6, 150e6, 401)
g12 = default_grid(seq12, freqs)

for dmhz in (0.0, 10.0, 20.0):
    s = spectrum_single(mhz_to_angular(dmhz), seq12, params, g12, freqs)
    scale = np.max(np.abs(s.q))
    print(f"delta0 = {dmhz} MHz, max|Q| = {scale:.3e}")
    # print q on a coarse grid
    for i in range(0, 401, 20):
        bar = "#" * int(40 * (s.q[i] / scale + 1) / 2)
        print(f"  {freqs[i]/1e6:8.1f} MHz  q={s.q[i]/scale:+.3f} p1={s.p1[i]/scale:+.3f} p2={s.p2[i]/scale:+.3f} {bar}")
    # local minima
    q = s.q
    mins = [i for i in range(1, 400) if q[i] < q[i-1] and q[i] < q[i+1]]
    print("  local minima at MHz:", [round(freqs[i]/1e6, 1) for i in mins if abs(q[i]) > 0.05*scale])
    maxs = [i for i in range(1, 400) if q[i] > q[i-1] and q[i] > q[i+1]]
    print("  local maxima at MHz:", [round(freqs[i]/1e6, 1) for i in maxs if abs(q[i]) > 0.05*scale])
