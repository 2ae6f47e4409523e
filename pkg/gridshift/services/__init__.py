"""GridShift services: grid core, engine, baselines, metrics, segmentation, tracking, theory checks and benchmarks."""
