"""Check one autodiff gradient against a finite difference computed right
here, no test harness involved."""

import numpy as np

import zeroshift.autodiff as ad
from zeroshift.autodiff import Tensor
from zeroshift.losses import ce_loss

rng = np.random.default_rng(0)

# five feature rows, four class prototypes, all unit length
feats = rng.standard_normal((5, 8))
feats /= np.linalg.norm(feats, axis=1, keepdims=True)
protos = rng.standard_normal((4, 8))
protos /= np.linalg.norm(protos, axis=1, keepdims=True)
labels = np.array([0, 1, 2, 3, 1])

p = Tensor(protos, requires_grad=True)
loss = ce_loss(Tensor(feats), p, labels)
loss.backward()
print("loss:", float(loss.data))

# central differences on one entry at a time, same formula the tests use
h = 1e-6
numeric = np.zeros_like(protos)
for i in range(protos.shape[0]):
    for j in range(protos.shape[1]):
        bumped = protos.copy()
        bumped[i, j] += h
        up = float(ce_loss(Tensor(feats), Tensor(bumped), labels).data)
        bumped[i, j] -= 2 * h
        down = float(ce_loss(Tensor(feats), Tensor(bumped), labels).data)
        numeric[i, j] = (up - down) / (2 * h)

gap = np.abs(p.grad - numeric)
scale = np.maximum(1.0, np.maximum(np.abs(p.grad), np.abs(numeric)))
print("max relative error:", float((gap / scale).max()))

# the tape is tiny enough to poke at directly
a = Tensor(np.array([2.0, 3.0]), requires_grad=True)
b = ad.tsum(a * a)  # d/da (sum a^2) = 2a
b.backward()
print("d sum(a^2) / da =", a.grad, "(expected 2a =", 2 * a.data, ")")
