#!/usr/bin/env python

""" dev tool: wall clock time per step of each detector on null streams of
growing size, next to the edge statistic evaluations counted per step """

import time

from commwatch.detectors import create_detector
from commwatch.graph import stream
from commwatch.models import DetectorConfig, ScenarioSpec

STEPS = 200
WARMUP = 50

print('method\tn_nodes\tseconds_per_step\tevaluations_per_step')
for method in ('ES', 'Mixture', 'HMix'):
    for n_nodes in (6, 10, 14):
        config = DetectorConfig(method=method, p0=0.3, p1=0.8, s=3, threshold=1e9, m0=0, m1=50)
        detector = create_detector(config, n_nodes)
        snapshots = stream(ScenarioSpec.null(n_nodes, 0.3), 1)
        for _ in range(WARMUP):
            detector.step(next(snapshots))

        evaluations = detector.pair_evaluations
        start = time.perf_counter()
        for _ in range(STEPS):
            detector.step(next(snapshots))
        elapsed = (time.perf_counter() - start) / STEPS
        print('{}\t{}\t{:.3g}\t{:.0f}'.format(
            method, n_nodes, elapsed, (detector.pair_evaluations - evaluations) / STEPS))
