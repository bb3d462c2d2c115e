import numpy as np
import pytest

import varsel.linmodel


@pytest.fixture(autouse=True, scope="session")
def strict_fits():
    """Assert residual orthogonality inside every fit the suite performs."""
    varsel.linmodel.STRICT_RESIDUAL_CHECK = True
    yield
    varsel.linmodel.STRICT_RESIDUAL_CHECK = False


def random_instance(seed: int, n: int, r: int, sparse: int | None = None,
                    noise: float = 0.5):
    """Gaussian feature table with a linear target over a random subset."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, r))
    k = sparse if sparse is not None else r
    support = rng.choice(r, size=k, replace=False)
    beta = rng.normal(size=k) * 2.0
    y = x[:, support] @ beta + rng.normal() + noise * rng.normal(size=n)
    return x, y, np.sort(support + 1)
