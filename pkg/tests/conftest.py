import numpy as np
import pytest

from clcd.data import Dataset
from clcd.synth import BayesNet


def build_dataset(columns, labels=None, arities=None):
    """Assemble a Dataset from an ordered {name: codes} mapping.

    With ``labels=None`` the last column is marked as the label; the
    container insists on having one and most tests do not care which.
    """
    names = tuple(columns)
    if labels is None:
        labels = {names[-1]}
    codes = np.stack([np.asarray(columns[n], dtype=np.int64) for n in names])
    if arities is None:
        arities = codes.max(axis=1) + 1
    is_label = np.array([n in labels for n in names])
    return Dataset(codes=codes, arities=np.asarray(arities),
                   is_label=is_label, names=names)


def bsc(flip):
    """Binary symmetric channel CPT: row per parent value."""
    return np.array([[1 - flip, flip], [flip, 1 - flip]])


@pytest.fixture
def chain_net():
    """X0 -> X1 -> X2 with P(X0=1)=0.3, 10% then 20% flip noise.

    Frozen information values for this net live in the tests that use it.
    """
    return BayesNet(
        parents=((), (0,), (1,)),
        cpts=(np.array([[0.7, 0.3]]), bsc(0.1), bsc(0.2)),
        arities=(2, 2, 2),
        is_label=(False, False, True),
        names=("X0", "X1", "X2"))


@pytest.fixture
def collider_net():
    """X0 -> X2 <- X1; X2 is a noisy OR of its parents."""
    cpt = np.array([[0.9, 0.1], [0.2, 0.8], [0.2, 0.8], [0.05, 0.95]])
    return BayesNet(
        parents=((), (), (0, 1)),
        cpts=(np.array([[0.5, 0.5]]), np.array([[0.6, 0.4]]), cpt),
        arities=(2, 2, 2),
        is_label=(False, False, True),
        names=("A", "B", "C"))


def xor_labels_net(n_noise: int = 2, noise_seed: int = 5):
    """Two identical labels computed as X xor N, plus isolated noise roots.

    X is a fair coin, N is biased (P=0.2), so X is marginally visible in the
    labels while N is not. Each label's PC search keeps only the other label;
    the lost parent X is recoverable from cross-label structure, N is not.
    Node order: X, N, noise..., T1, T2.
    """
    rng = np.random.default_rng(noise_seed)
    xor_cpt = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    parents = [(), ()]
    cpts = [np.array([[0.5, 0.5]]), np.array([[0.8, 0.2]])]
    names = ["X", "N"]
    for i in range(n_noise):
        parents.append(())
        p = 0.3 + 0.4 * rng.random()
        cpts.append(np.array([[1 - p, p]]))
        names.append(f"Z{i}")
    k = len(parents)
    parents += [(0, 1), (0, 1)]
    cpts += [xor_cpt, xor_cpt]
    names += ["T1", "T2"]
    is_label = [False] * k + [True, True]
    return BayesNet(parents=tuple(parents), cpts=tuple(cpts),
                    arities=tuple([2] * (k + 2)), is_label=tuple(is_label),
                    names=tuple(names))
