import math
import numpy as np
from pulsespec import (
    DensityMatrix, EmitterParams, PulseSequence,
    spectrum_single, default_grid, mhz_to_angular,
)
from pulsespec.dynamics import _build_axis, _rk4_transfer

GAMMA = 1.0 / 12.3e-9
params = EmitterParams(decay_rate=GAMMA)
seq12 = PulseSequence.calibrated(12, 10e-9, 1.6e-9)
freqs = np.linspace(-150e6, 150e6, 401)
g12 = default_grid(seq12, freqs)


def prep_state(delta):
    s = seq12.support_halfwidth
    axis = _build_axis(-s, 0.0, seq12, 10e-9 / 200, 1.6e-9 / 40)
    Ms = _rk4_transfer(axis, seq12, delta, GAMMA)
    u = DensityMatrix.ground().as_vector()
    for M in Ms:
        u = M @ u
    return DensityMatrix.from_vector(u)


nodes, gh_w = np.polynomial.hermite.hermgauss(21)
sigma = mhz_to_angular(30.0) / 2.3548
deltas = math.sqrt(2) * sigma * nodes
weights = gh_w / math.sqrt(math.pi)
P1 = np.zeros_like(freqs)
P2 = np.zeros_like(freqs)
for w, d in zip(weights, deltas):
    s = spectrum_single(d, seq12, params, g12, freqs, rho0=prep_state(d))
    P1 += w * s.p1
    P2 += w * s.p2
q = P2 - P1
s1 = np.max(np.abs(P1))
print("freq_mhz   p1     p2      q   (all /max|P1|)")
sel = np.where((freqs >= 0) & (freqs <= 150e6))[0][::4]
for i in sel:
    print(f"{freqs[i]/1e6:7.1f}  {P1[i]/s1:+.3f}  {P2[i]/s1:+.3f}  {q[i]/s1:+.3f}")
