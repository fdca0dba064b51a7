#!/usr/bin/env python3
"""Smoke test for the adas_py extension module.

Builds nothing itself: run `cargo build -p adas-py --release` first, then

    python3 python/smoke_test.py

The script locates the compiled cdylib in target/, exposes it as an
importable module and exercises the main types and operations end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent


def locate_module() -> Path:
    candidates = [
        REPO / "target" / "release" / "libadas_py.so",
        REPO / "target" / "debug" / "libadas_py.so",
        REPO / "target" / "release" / "libadas_py.dylib",
        REPO / "target" / "debug" / "libadas_py.dylib",
    ]
    for cand in candidates:
        if cand.exists():
            return cand
    sys.exit("build the extension first: cargo build -p adas-py --release")


STAGE = Path(tempfile.mkdtemp(prefix="adas_py_"))
src = locate_module()
shutil.copy2(src, STAGE / "adas_py.so")
sys.path.insert(0, str(STAGE))

import adas_py  # noqa: E402

L = 2.0 * math.pi
grid = adas_py.Grid(16, L)
assert grid.n == 16
assert abs(grid.lambda1 - 1.0) < 1e-15

# round trip physical <-> spectral removes only the mean
rng = np.random.default_rng(1)
samples = rng.uniform(-1.0, 1.0, size=(16, 16, 16))
phi = adas_py.ScalarField.from_numpy(grid, samples)
back = phi.to_numpy()
assert np.max(np.abs(back - (samples - samples.mean()))) < 1e-12
print("round trip: ok")

# gradient of sin(x) is cos(x)
x = np.arange(16) * (L / 16)
sinx = np.broadcast_to(np.sin(x)[None, None, :], (16, 16, 16)).copy()
phi = adas_py.ScalarField.from_numpy(grid, sinx)
g = adas_py.gradient(phi).to_numpy()
assert np.max(np.abs(g[0] - np.cos(x)[None, None, :])) < 1e-10
assert np.max(np.abs(g[1])) < 1e-12 and np.max(np.abs(g[2])) < 1e-12
print("gradient: ok")

# projection produces divergence-free fields; random fields carry the
# requested energy exactly
v = adas_py.VectorField.random_divergence_free(grid, 2.5, 4, 11)
assert abs(v.energy() - 2.5) < 1e-10
assert v.divergence_residual() < 1e-12
noisy = adas_py.VectorField.from_numpy(grid, rng.uniform(-1, 1, size=(3, 16, 16, 16)))
proj = adas_py.leray_project(noisy)
assert proj.divergence_residual() < 1e-12
print("projection: ok")

# Helmholtz filter contracts
u = adas_py.helmholtz_filter(v, 0.5)
assert u.l2_norm() <= v.l2_norm()

# observer: low-mode projection is exact on retained modes, gamma0 <= 1
obs = adas_py.Observer.fourier_lowmode(0.35, [True, True, False])
gamma0 = adas_py.estimate_gamma0(obs, grid, 20, 3)
assert 0.0 < gamma0 <= 1.0 + 1e-12
print(f"gamma0 (fourier): {gamma0:.4f}")

# condition checker: boundary case passes, G^4 scaling
rep = adas_py.check_conditions(0.2, 0.25, 1.0, 10.0, 15.0, 0.1, gamma0, c=5e-7, ctilde=1.0)
assert rep["cond2"], "overdamping condition expected to pass"
rep1 = adas_py.check_conditions(0.2, 0.25, 1.0, 5.0, 1.0, 0.1, gamma0)
rep2 = adas_py.check_conditions(0.2, 0.25, 1.0, 10.0, 1.0, 0.1, gamma0)
assert abs(rep2["mu_threshold"] / rep1["mu_threshold"] - 16.0) < 1e-12
print("check_conditions: ok")

# a small twin experiment synchronizes; its mu = 0 control does not
CONFIG = """
[grid]
n = 16
box_length = 6.283185307179586

[model]
preset = "leray_alpha"
nu_viscosity = 0.5
alpha_length = 0.25

[forcing]
kind = "steady_lowmode"
amplitude_force = 1.0
shell = 1

[time]
dt_time = 0.01
t_end_time = 8.0
spin_up_time = 1.0
sample_every = 10

[initial]
kind = "random"
energy = 2.0
max_shell = 3

[assimilation]
mu_relaxation = {mu}
observer_variant = "fourier_lowmode"
h_length = 0.25
mask = [true, true, false]
v_star_kind = "zero"
gamma0_ensemble = 10
"""

nudged = adas_py.run_twin(CONFIG.format(mu=8.0))
control = adas_py.run_twin(CONFIG.format(mu=0.0))
drop_nudged = nudged["err_l2"][0] / nudged["err_l2"][-1]
drop_control = control["err_l2"][0] / control["err_l2"][-1]
print(f"twin error drop: nudged {drop_nudged:.1f}x, control {drop_control:.1f}x")
assert drop_nudged > 2.5 * drop_control, "nudging should beat the control run"
assert nudged["final_assimilated"].divergence_residual() < 1e-11

rate = adas_py.estimate_decay_rate(
    list(nudged["t"]), list(nudged["err_l2"]), (nudged["t"][len(nudged["t"]) // 2], nudged["t"][-1])
)
assert rate > 0.0
print(f"fitted decay rate: {rate:.3f}")

print("smoke test: all checks passed")
