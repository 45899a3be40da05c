"""
Phase noise and the growth of entropy
=====================================

Random rotations exp(-i xi n) between kicks wash out the off-diagonal
harmonics of the density matrix. Weak noise leaves the von Neumann entropy
near zero for a long time; strong noise pushes it onto the Shannon entropy
of the harmonic spectrum within a few kicks.
"""
import numpy as np

from kickosc import metrics as mt
from kickosc import quantum as qm

spec = qm.FloquetSpec(0.5, 2.0, 1.0, 512)
rho0 = qm.initial_mixed_state(0.0, spec)
t_max = 12

clean = list(qm.evolve(rho0, spec, t_max))
shannon = [mt.shannon_entropy(mt.harmonic_weights(r)) for r in clean]

print("sigma     S_vN(t=4)  S_vN(t=12)  Shannon(t=12)  F(t=12)")
for sigma in (0.001, 0.064, 0.512):
    noisy = list(qm.evolve(rho0, spec, t_max, qm.NoiseSpec(sigma)))
    s_vn = [mt.von_neumann_entropy(r) for r in noisy]
    fid = mt.averaged_noise_fidelity(clean, noisy).values
    print(f"{sigma:<8g}  {s_vn[4]:9.3f}  {s_vn[-1]:10.3f}  {shannon[-1]:13.3f}  {fid[-1]:.3f}")

# the averaged channel is the mean of single noisy histories
u = qm.build_floquet(spec)
rng = np.random.default_rng(3)
sigma = 0.3
mc = np.mean([qm.noisy_step(clean[2], u, x).block for x in sigma * rng.standard_normal(2000)], axis=0)
exact = qm.averaged_step(clean[2], u, sigma).block
k = min(mc.shape[0], exact.shape[0])
print(f"\nMonte Carlo vs closed-form channel, 2000 draws: max |diff| = {np.abs(mc[:k, :k] - exact[:k, :k]).max():.1e}")
