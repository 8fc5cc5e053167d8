"""
End-to-end evaluation on synthetic data
=======================================

Rank on the training part, keep three channels, extract features, z-score,
keep half of the features by chi-square, classify. Done per fold of a
stratified 10-fold split, for both ranking methods.
"""

from eegend import PipelineConfig, SplitPlan, SynthSpec, run_pipeline, segment_dataset, synthesize_dataset
from eegend.evaluation import PipelineContext

ds = segment_dataset(synthesize_dataset(SynthSpec(20, 4096, planted_channels=(0, 2, 5)), 1), 2048)
plan = SplitPlan("kfold", folds=10, seed=1)
ctx = PipelineContext(ds)   # shares feature blocks between runs

print(f"{'extractor':<9} {'classifier':<10} {'En':>6} {'EnD':>6}")
for extractor in ("DWT", "SLBP", "EMD"):
    for classifier in ("KNN", "SVM", "ENS"):
        accs = []
        for method in ("en", "end"):
            cfg = PipelineConfig(ranking=method, extractor=extractor, classifier=classifier)
            accs.append(run_pipeline(ds, plan, cfg, ctx).accuracy)
        print(f"{extractor:<9} {classifier:<10} {accs[0]:6.3f} {accs[1]:6.3f}")

row = run_pipeline(ds, plan, PipelineConfig(), ctx)
print("\nchannels chosen in fold 0:", row.splits[0].channels)
print("pooled confusion counts:", row.pooled)
