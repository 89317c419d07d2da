"""Shared fixtures.  BLAS thread pinning must happen before numpy loads:
the performance acceptance criterion is stated single-threaded, and fixed
thread counts keep reductions bit-reproducible."""

import os

for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import pytest

from dhlab.primes import sieve


@pytest.fixture(scope="session")
def table_1e6():
    return sieve(10**6)


@pytest.fixture(scope="session")
def table_1e5():
    return sieve(10**5)
