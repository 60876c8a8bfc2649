# Copyright 2026 The lossbench Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Loss-variance theory, SGD simulation and BEV detection metrics."""

from ._core import (
    ApAggregate,
    ApEntry,
    ApReport,
    Box3D,
    ConvergenceFit,
    DiceComparison,
    EnsembleStats,
    FrameSet,
    LengthReport,
    LossKind,
    LossSummary,
    SeedOutcome,
    SweepRow,
    DiceAdvantageReport,
    ThresholdResult,
    VarianceEstimate,
    bev_iou,
    center_nms,
    closed_form_variance,
    cumulative_square_sum,
    empirical_gradient_variance,
    evaluate,
    fit_deviation_line,
    iou3d,
    loss_gradient,
    loss_value,
    oracle_swap,
    ray_iou,
    run_ensemble,
    sigma_c,
    sigma_m,
    sweep,
    dice_advantage_experiment,
)

__version__ = "0.1.0"
