"""Interactive keypoint estimation workbench.

Core pieces: a heatmap codec for keypoint <-> heatmap conversion, a user
interaction simulator, a morphology-aware training loss, a small trainable
refinement network with interaction-guided recalibration, an interactive
evaluation protocol (NoC / FR), cervical-vertebra morphometrics, and
population growth analytics.  An HTTP annotation service and a CLI sit on
top of the core package.
"""

__version__ = "0.1.0"
