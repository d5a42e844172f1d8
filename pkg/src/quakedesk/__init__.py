"""Decision-support toolkit for earthquake disaster response.

The package turns raw early-warning feeds into resource assessments
(medics, shelter, food, cost), keeps a small analytical warehouse of
historical quakes, and drives a two-stage aid-request workflow with
human approval gates.  Every state change flows through an append-only
event log so the whole service can be replayed deterministically.
"""

__version__ = "0.1.0"
