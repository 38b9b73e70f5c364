"""
Pose and correspondence for two point sets
==========================================

P = Pi Q R + 1 t^T.  Centering removes t, the Gram matrices of the
centered sets differ only by Pi, and once Pi is known R comes from an
SVD (with a determinant fix so it stays a rotation).
"""
import numpy as np

from slr.registration import (
    generate_scene, reconstruction_error, register, register_with_correspondence, synthetic_model,
)

model = synthetic_model(20_000, seed=0)
print("model points:", len(model))

scene, truth = generate_scene(model, m=200, sigma2=0.0, seed=7)
res = register(scene, truth)
print("noiseless: accuracy", res.matching_accuracy,
      " |R - R*| =", np.linalg.norm(res.rotation - truth.rotation),
      " t =", np.round(res.translation, 6))

for sigma2 in (1e-6, 1e-5, 1e-4):
    scene, truth = generate_scene(model, 200, sigma2, seed=7)
    res = register(scene, truth)
    ref = register_with_correspondence(scene, truth.perm)
    print(f"sigma2={sigma2:g}  accuracy {res.matching_accuracy:.3f}  "
          f"error {reconstruction_error(scene, res):.4f}  (known correspondence {reconstruction_error(scene, ref):.4f})")
