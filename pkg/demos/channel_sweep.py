"""
Accuracy against the number of channels
=======================================

With three planted channels the entropy-difference curve should level off
at N = 3, while the entropy ranking needs many more channels. At N = 19 both
rankings use every channel; with canonical feature order their scores match.
"""

from eegend import PipelineConfig, SplitPlan, SynthSpec, segment_dataset, sweep_channels, synthesize_dataset

ds = segment_dataset(synthesize_dataset(SynthSpec(12, 2048, planted_channels=(0, 2, 5)), 3), 2048)
cfg = PipelineConfig(extractor="DWT", classifier="KNN", channel_order="canonical")
rows = sweep_channels(ds, SplitPlan("kfold", folds=6, seed=0), cfg)

curves = {"en": {}, "end": {}}
for method, _, _, n, acc in rows:
    curves[method][n] = acc
print(" N     En    EnD")
for n in range(1, 20):
    print(f"{n:>2}  {curves['en'][n]:.3f}  {curves['end'][n]:.3f}")
