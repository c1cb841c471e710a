"""
Mutation step-size control with Rechenberg's 1/5 success rule.
"""

import logging
from dataclasses import dataclass, replace

from evopref.errors import ParameterError

logger = logging.getLogger(__name__)

INCREASE = 1.2
DECREASE = 1.2 ** -0.25
DEFAULT_WINDOW = 10
SIGMA_MIN = 1e-6
SIGMA_MAX = 1.0


@dataclass(frozen=True)
class SigmaController:
    sigma: float
    window: int = DEFAULT_WINDOW
    successes: int = 0
    trials: int = 0
    sigma_min: float = SIGMA_MIN
    sigma_max: float = SIGMA_MAX

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.sigma_min <= self.sigma_max:
            raise ParameterError(f"Invalid sigma clamp [{self.sigma_min}, {self.sigma_max}]")
        if not 0 <= self.successes <= self.trials:
            raise ParameterError(f"Counters out of order: {self.successes}/{self.trials}")

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


def record_offspring(ctrl: SigmaController, improved: bool) -> SigmaController:
    return replace(ctrl, trials=ctrl.trials + 1, successes=ctrl.successes + int(bool(improved)))


def adapt_sigma(ctrl: SigmaController) -> SigmaController:
    """Grow above a 1/5 success rate, shrink below, hold at exactly 1/5; reset counters"""
    sigma = ctrl.sigma
    if ctrl.trials > 0:
        # integer comparison keeps rate == 0.2 exact
        if 5 * ctrl.successes > ctrl.trials:
            sigma *= INCREASE
        elif 5 * ctrl.successes < ctrl.trials:
            sigma *= DECREASE
    sigma = min(max(sigma, ctrl.sigma_min), ctrl.sigma_max)
    logger.debug(f"sigma {ctrl.sigma:.6g} -> {sigma:.6g} (rate {ctrl.success_rate:.3f} over {ctrl.trials})")
    return replace(ctrl, sigma=sigma, successes=0, trials=0)


def maybe_adapt(ctrl: SigmaController, generation: int) -> SigmaController:
    """Adapt at the end of every `window`-th generation"""
    if generation > 0 and generation % ctrl.window == 0:
        return adapt_sigma(ctrl)
    return ctrl
