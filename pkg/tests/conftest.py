import numpy as np
import pytest

from mfsk65.modem import ModulationConfig, SpacingMode


@pytest.fixture(scope="session")
def config():
    return ModulationConfig()


@pytest.fixture(scope="session")
def literal_config():
    return ModulationConfig(spacing_mode=SpacingMode.LITERAL)


def brute_force_dft(samples: np.ndarray, chunk: int = 512) -> np.ndarray:
    """O(N^2) unscaled DFT evaluated directly from the defining sum.

    Independent of both the in-repo radix-2 transform and numpy.fft; used
    as the oracle for transform correctness.  Accepts (N,) or (B, N).
    """
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = x.shape[-1]
    out = np.empty((x.shape[0], n), dtype=np.complex128)
    ks = np.arange(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        kernel = np.exp(-2j * np.pi * np.outer(ks[start:stop], ks) / n)
        out[:, start:stop] = x @ kernel.T
    return out[0] if np.asarray(samples).ndim == 1 else out
