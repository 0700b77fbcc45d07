"""
Train/test allocations over a windowed sample sequence.
"""

import enum as __enum__
from dataclasses import dataclass
from logging import Logger as __Logger__
from typing import List as __List__
from typing import Optional as __Optional__
from typing import Tuple as __Tuple__

import numpy as __np__

import bis_rating_bench
from bis_rating_bench.data_panel import SampleSet


class SplitKind(__enum__.Enum):
    RANDOM = "random"
    LEAVE_ONE_YEAR_OUT = "leave_one_year_out"


@dataclass(frozen=True)
class SplitPlan:
    """
    How to allocate samples. A random plan carries ``test_fraction`` and
    ``rng_seed``; a temporal plan carries ``held_out_year`` (None means sweep all years).
    """

    kind: SplitKind
    test_fraction: __Optional__[float] = None
    held_out_year: __Optional__[int] = None
    rng_seed: __Optional__[int] = None

    def __post_init__(self):
        if self.kind is SplitKind.RANDOM:
            if self.test_fraction is None or not 0.0 < float(self.test_fraction) < 1.0:
                raise bis_rating_bench.LoggedValueError(
                    None, "split.test_fraction must lie in (0, 1), got {f}.".format(f=self.test_fraction)
                )
            if self.held_out_year is not None:
                raise bis_rating_bench.LoggedValueError(None, "A random split plan takes no held_out_year.")
        elif self.kind is SplitKind.LEAVE_ONE_YEAR_OUT:
            if self.test_fraction is not None:
                raise bis_rating_bench.LoggedValueError(None, "A temporal split plan takes no test_fraction.")
        else:
            raise bis_rating_bench.LoggedValueError(None, "Unknown split kind {k}.".format(k=self.kind))

    @classmethod
    def random(cls, test_fraction: float, rng_seed: int = 0) -> "SplitPlan":
        return cls(SplitKind.RANDOM, test_fraction=test_fraction, rng_seed=rng_seed)

    @classmethod
    def leave_one_year_out(cls, held_out_year: int = None) -> "SplitPlan":
        return cls(SplitKind.LEAVE_ONE_YEAR_OUT, held_out_year=held_out_year)


@dataclass(frozen=True)
class SplitResult:
    """
    Sorted, disjoint, non-empty train and test index arrays covering every sample.
    """

    train: __np__.ndarray
    test: __np__.ndarray

    def check(self, n_samples: int, logger: __Logger__ = None) -> "SplitResult":
        """
        Verify the partition invariants against ``n_samples``.
        """
        if self.train.size == 0 or self.test.size == 0:
            raise bis_rating_bench.LoggedSplitError(
                logger,
                "Degenerate split: {a} train and {b} test samples.".format(a=self.train.size, b=self.test.size),
            )
        if __np__.intersect1d(self.train, self.test).size:
            raise bis_rating_bench.LoggedSplitError(logger, "Train and test indices overlap.")
        if self.train.size + self.test.size != n_samples:
            raise bis_rating_bench.LoggedSplitError(
                logger, "Split covers {c} of {n} samples.".format(c=self.train.size + self.test.size, n=n_samples)
            )
        return self


def random_split(
    samples: SampleSet, test_fraction: float, seed: int, logger: __Logger__ = None
) -> SplitResult:
    """
    Uniform seeded permutation; the first round(N * test_fraction) samples go to test.

    :param samples: (SampleSet): Samples to allocate (only the count is used).
    :param test_fraction: (float): Test share in (0, 1).
    :param seed: (int): Seed of the permutation.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (SplitResult): Allocation.
    """
    n_samples: int = len(samples)
    if not 0.0 < float(test_fraction) < 1.0:
        raise bis_rating_bench.LoggedValueError(
            logger, "test_fraction must lie in (0, 1), got {f}.".format(f=test_fraction)
        )
    if n_samples < 2:
        raise bis_rating_bench.LoggedSplitError(
            logger, "A random split needs at least 2 samples, got {n}.".format(n=n_samples)
        )
    n_test: int = int(__np__.floor(n_samples * float(test_fraction) + 0.5))
    order: __np__.ndarray = __np__.random.default_rng(int(seed)).permutation(n_samples)
    result = SplitResult(train=__np__.sort(order[n_test:]), test=__np__.sort(order[:n_test]))
    return result.check(n_samples, logger)


def leave_one_year_out(samples: SampleSet, year: int, logger: __Logger__ = None) -> SplitResult:
    """
    Hold out every sample whose target quarter falls in ``year``. Window
    histories may reach into adjacent years.

    :param samples: (SampleSet): Samples to allocate.
    :param year: (int): Held-out year.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (SplitResult): Allocation.
    """
    years: __np__.ndarray = __np__.asarray(samples.years)
    available: list = sorted(set(int(y) for y in years.tolist()))
    if int(year) not in available:
        raise bis_rating_bench.LoggedSplitError(
            logger, "Year {y} is not among the sample years {a}.".format(y=year, a=available)
        )
    held_out: __np__.ndarray = years == int(year)
    result = SplitResult(train=__np__.flatnonzero(~held_out), test=__np__.flatnonzero(held_out))
    return result.check(len(samples), logger)


def year_sweep(samples: SampleSet, logger: __Logger__ = None) -> __List__[__Tuple__[int, SplitResult]]:
    """
    One leave-one-year-out split per distinct target year, ascending.
    """
    available: list = sorted(set(int(y) for y in __np__.asarray(samples.years).tolist()))
    if len(available) < 2:
        raise bis_rating_bench.LoggedSplitError(
            logger, "A year sweep needs at least 2 distinct years, got {a}.".format(a=available)
        )
    return [(year, leave_one_year_out(samples, year, logger)) for year in available]


def apply_plan(samples: SampleSet, plan: SplitPlan, logger: __Logger__ = None) -> __List__[__Tuple__[int, SplitResult]]:
    """
    Allocations described by ``plan`` as (allocation id, split) pairs. Random
    plans give a single allocation with id 0.
    """
    if plan.kind is SplitKind.RANDOM:
        return [(0, random_split(samples, plan.test_fraction, plan.rng_seed or 0, logger))]
    if plan.held_out_year is None:
        return year_sweep(samples, logger)
    return [(int(plan.held_out_year), leave_one_year_out(samples, plan.held_out_year, logger))]
