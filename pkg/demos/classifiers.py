"""
The three classifiers on toy problems
=====================================

k-NN, an RBF SVM trained by SMO, and a bagged tree ensemble, on XOR-like
data that no linear rule can separate.
"""

import tempfile
from pathlib import Path

import numpy as np

from eegend import ens_train, knn_train, svm_train
from eegend.classifiers import load_model, save_model

rng = np.random.default_rng(4)
centres = [(-3, -3, 0), (3, 3, 0), (-3, 3, 1), (3, -3, 1)]
X = np.vstack([rng.normal((cx, cy), 0.8, (40, 2)) for cx, cy, _ in centres])
y = np.repeat([c for *_, c in centres], 40)
Xq = np.vstack([rng.normal((cx, cy), 0.8, (20, 2)) for cx, cy, _ in centres])
yq = np.repeat([c for *_, c in centres], 20)

knn = knn_train(X, y, k=5)
svm = svm_train(X, y, C=1.0, record_objective=True)
ens = ens_train(X, y, n_trees=50, max_depth=6, seed=0)

for name, m in [("kNN", knn), ("SVM", svm), ("ENS", ens)]:
    print(f"{name}: train {np.mean(m.predict(X) == y):.3f}  held-out {np.mean(m.predict(Xq) == yq):.3f}")

print(f"SVM: {svm.n_iter} SMO steps, KKT gap {svm.kkt_gap:.2e}, "
      f"{svm.support_indices.size} support vectors, gamma {svm.gamma:.3f}")
print("dual objective, first/last:", round(svm.objective_history[1], 4), round(svm.objective_history[-1], 4))
print("ENS out-of-bag accuracy:", round(ens.oob_accuracy(X, y), 3))

# models are plain JSON
with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "svm.json"
    save_model(svm, path)
    print("reloaded SVM agrees:", np.array_equal(load_model(path).predict(Xq), svm.predict(Xq)))
