"""Quick check of the cqhj Python bindings."""

import cmath
import math

import cqhj

model = cqhj.WaveModel.head_on_collision()
assert abs(model.norm - 1 / math.sqrt(2)) < 1e-8, model.norm

# Nodes at t = 4 sit on the real axis, at odd multiples of pi/4.
nodes = cqhj.find_nodes(model, 4.0, (-3.0, 3.0, -1.0, 1.0))
assert nodes, "no nodes found"
for z, residual, winding in nodes:
    assert abs(z.imag) < 1e-8 and abs(winding) == 1
    assert abs(math.remainder(z.real - math.pi / 4, math.pi / 2)) < 1e-8

z0 = nodes[0][0]
w = cqhj.winding_number(model, z0, 0.1, 4.0)
gamma = cqhj.circulation(model, z0, 0.1, 4.0)
assert abs(gamma - 2 * math.pi * w) < 1e-6, (gamma, w)

# Single packet: the trajectory moves classically with the packet centre.
p = cqhj.GaussianPacket(-8.0, 2.0, 1.0)
single = cqhj.WaveModel([p])
path = cqhj.propagate_complex(single, complex(-8, 0), 0.0, 2.0)
assert path.status == "completed"
assert abs(path.positions[-1] - complex(-4, 0)) < 1e-8

# The trajectory launched at -8 in the collision never reaches the origin.
real = cqhj.propagate_real(model, -8.0, 0.0, 8.0)
assert cqhj.is_completed(real.status)
assert max(z.real for z in real.positions) < 0

fam = cqhj.build_isochrone(model, 4.0, [-2.0, -1.0, 1.0, 2.0], 8.0)
for x, start, residual, traj in fam:
    if start is not None:
        assert residual < 1e-8

rho, s, v = model.real_fields(0.0, 0.0)
assert rho >= 0 and abs(v) < 1e-12
assert cmath.isfinite(model.psi_bar(complex(1, 0.5), 2.0))

print("cqhj smoke test OK")
