"""Estimator-style front ends for the scheduling policies.

Every policy follows the scikit-learn conventions: constructor arguments are
stored unchanged and exposed through ``get_params``/``set_params``, learned
state carries a trailing underscore, and ``fit`` returns ``self``.

``X`` is always a request sequence of shape ``(n_requests, 2)``.

* ``fit(X)`` starts from the policy's initial state and serves all of ``X``.
* ``partial_fit(X)`` keeps serving from the current state (online use).
* ``predict(X)`` reports, without changing anything, which requests would be
  hits against the current matching.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import pair_frequency, static_matching_greedy
from .bma import MIN_PAIR, BmaState, StepOutcome
from .exceptions import InvariantViolation
from .ledger import CostLedger
from .matching import BMatching
from .oracle import DEFAULT_STATE_CAP, exact_static
from .topology import Pair, make_pair
from .validation import check_positive, check_topology, check_trace


class _SchedulerMixin:
    """Shared fit/partial_fit/predict plumbing; subclasses implement ``_init_state`` and ``_serve``."""

    def _init_state(self, X) -> None:
        raise NotImplementedError

    def _serve(self, tau: Pair) -> StepOutcome:
        raise NotImplementedError

    def current_matching(self) -> BMatching:
        raise NotImplementedError

    def _alpha(self) -> float:
        return float(getattr(self, "alpha", 1.0))

    def _new_ledger(self) -> None:
        self.ledger_ = CostLedger(alpha=self._alpha(), track_steps=self.track_steps)

    def fit(self, X, y=None):
        check_topology(self.topology)
        X = check_trace(X, self.topology.n)
        self._new_ledger()
        self._init_state(X)
        self.n_features_in_ = 2
        return self._serve_all(X)

    def partial_fit(self, X, y=None):
        if not hasattr(self, "ledger_"):
            check_topology(self.topology)
            self._new_ledger()
            self._init_state(np.empty((0, 2), dtype=np.int64))
            self.n_features_in_ = 2
        return self._serve_all(check_trace(X, self.topology.n))

    def _serve_all(self, X: np.ndarray):
        record = self.ledger_.record
        serve = self._serve
        for u, v in X.tolist():
            record(serve((u, v)))
        return self

    def serve(self, pair) -> StepOutcome:
        """Serve a single request and record it in ``ledger_``."""
        if not hasattr(self, "ledger_"):
            self.partial_fit(np.empty((0, 2), dtype=np.int64))
        tau = make_pair(*pair)
        self.topology.check_node(tau[1])
        out = self._serve(tau)
        self.ledger_.record(out)
        return out

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "ledger_")
        X = check_trace(X, self.topology.n)
        edges = self.current_matching().edges
        return np.fromiter(((u, v) in edges for u, v in X.tolist()), dtype=bool, count=len(X))

    def score(self, X, y=None) -> float:
        """Fraction of ``X`` that the current matching would serve for free."""
        pred = self.predict(X)
        return float(pred.mean()) if pred.size else 0.0


class OnlineBMA(_SchedulerMixin, BaseEstimator):
    """Online counter-based b-matching scheduler.

    Parameters
    ----------
    topology : Topology
        Fixed network; requests that miss the matching pay its distance.
    b : int, default=1
        Matching degree cap.
    alpha : float, default=1.0
        Cost per pair added to or removed from the matching.
    eviction : {"min-pair", "lru"}, default="min-pair"
        Choice among evictable matching edges.  ``"lru"`` gives the LRU
        variant: same admission rule, least recently requested victim.
    check : bool, default=False
        Verify all state invariants after every request.
    track_steps : bool, default=False
        Keep per-step cost increments in ``ledger_``.

    Attributes
    ----------
    state_ : BmaState
    ledger_ : CostLedger
    """

    def __init__(self, topology=None, b=1, alpha=1.0, eviction=MIN_PAIR, check=False, track_steps=False):
        self.topology = topology
        self.b = b
        self.alpha = alpha
        self.eviction = eviction
        self.check = check
        self.track_steps = track_steps

    def _init_state(self, X) -> None:
        b = check_positive("b", self.b, integer=True)
        alpha = check_positive("alpha", self.alpha)
        self.state_ = BmaState(self.topology, b, alpha, eviction=self.eviction)

    def _serve(self, tau: Pair) -> StepOutcome:
        out = self.state_.serve(tau)
        if self.check:
            problems = self.state_.check_invariants()
            if problems:
                raise InvariantViolation(f"after request {tau}: " + "; ".join(problems))
        return out

    def current_matching(self) -> BMatching:
        check_is_fitted(self, "state_")
        return self.state_.matching


class ObliviousRouting(_SchedulerMixin, BaseEstimator):
    """Never reconfigures; every request is routed on the fixed network."""

    def __init__(self, topology=None, track_steps=False):
        self.topology = topology
        self.track_steps = track_steps

    def _init_state(self, X) -> None:
        self.matching_ = BMatching(1, self.topology.n)

    def _serve(self, tau: Pair) -> StepOutcome:
        return StepOutcome(hit=False, routing_cost=float(self.topology.dist[tau[0], tau[1]]))

    def current_matching(self) -> BMatching:
        check_is_fitted(self, "matching_")
        return self.matching_


class StaticBMatching(_SchedulerMixin, BaseEstimator):
    """A single b-matching chosen from the request frequencies of ``fit``'s ``X``.

    Parameters
    ----------
    topology : Topology
    b : int, default=1
    alpha : float, default=1.0
        Only used when ``include_setup`` is set.
    method : {"greedy", "exact"}, default="greedy"
        ``"greedy"`` picks pairs by decreasing ``count * distance``;
        ``"exact"`` enumerates all b-matchings (small instances only).
    include_setup : bool, default=False
        Charge ``alpha`` per matched pair before the first request.
    state_cap : int
        Enumeration limit for ``method="exact"``.
    """

    def __init__(self, topology=None, b=1, alpha=1.0, method="greedy", include_setup=False,
                 state_cap=DEFAULT_STATE_CAP, track_steps=False):
        self.topology = topology
        self.b = b
        self.alpha = alpha
        self.method = method
        self.include_setup = include_setup
        self.state_cap = state_cap
        self.track_steps = track_steps

    def _init_state(self, X) -> None:
        b = check_positive("b", self.b, integer=True)
        freq = pair_frequency(map(tuple, X.tolist()))
        if self.method == "greedy":
            self.matching_ = static_matching_greedy(self.topology, freq, b)
        elif self.method == "exact":
            self.matching_, _ = exact_static(self.topology, freq, b, cap=self.state_cap)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        if self.include_setup:
            self.ledger_.add_setup(len(self.matching_))

    def partial_fit(self, X, y=None):
        check_is_fitted(self, "matching_")
        return super().partial_fit(X)

    def _serve(self, tau: Pair) -> StepOutcome:
        if tau in self.matching_.edges:
            return StepOutcome(hit=True)
        return StepOutcome(hit=False, routing_cost=float(self.topology.dist[tau[0], tau[1]]))

    def current_matching(self) -> BMatching:
        check_is_fitted(self, "matching_")
        return self.matching_
