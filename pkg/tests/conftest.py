"""Shared random-object generators for the test suite."""

import numpy as np

from qcompat.devices import CPMap, Effect, Instrument, KrausSet, Observable, choi_from_kraus


def rand_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def rand_herm(rng, n):
    a = rand_complex(rng, n)
    return (a + a.conj().T) / 2


def rand_psd(rng, n):
    a = rand_complex(rng, n)
    return a @ a.conj().T


def rand_state(rng, n):
    p = rand_psd(rng, n)
    return p / np.trace(p).real


def rand_effect(rng, n):
    h = rand_psd(rng, n)
    top = np.linalg.eigvalsh(h)[-1]
    return Effect(h / (top * (1.0 + rng.uniform(0.05, 1.0))))


def rand_kraus(rng, din, dout, n_ops, scale=1.0):
    """Kraus set with sum K^*K = scale^2 * I (a channel at scale 1)."""
    ops = [rand_complex(rng, dout, din) for _ in range(n_ops)]
    gram = sum(k.conj().T @ k for k in ops)
    evals, evecs = np.linalg.eigh((gram + gram.conj().T) / 2)
    inv_root = (evecs / np.sqrt(evals)) @ evecs.conj().T
    return KrausSet(tuple(scale * k @ inv_root for k in ops))


def rand_cpmap(rng, din=2, dout=2, n_ops=2, channel=False):
    scale = 1.0 if channel else np.sqrt(rng.uniform(0.2, 0.95))
    return choi_from_kraus(rand_kraus(rng, din, dout, n_ops, scale=scale))


def rand_observable(rng, dim, n_out):
    """Observable from normalized random PSD pieces."""
    pieces = [rand_psd(rng, dim) for _ in range(n_out)]
    total = sum(pieces)
    evals, evecs = np.linalg.eigh((total + total.conj().T) / 2)
    inv_root = (evecs / np.sqrt(evals)) @ evecs.conj().T
    labels = tuple(str(i) for i in range(n_out))
    effects = {
        lab: Effect(inv_root @ p @ inv_root) for lab, p in zip(labels, pieces)
    }
    return Observable(labels, effects)


def rand_instrument(rng, din=2, dout=2, n_out=2, ops_per_branch=1):
    """Instrument from a random normalized Kraus set split across outcomes."""
    ks = rand_kraus(rng, din, dout, n_out * ops_per_branch, scale=1.0)
    labels = tuple(str(i) for i in range(n_out))
    branches = {}
    for i, lab in enumerate(labels):
        chunk = ks.ops[i * ops_per_branch : (i + 1) * ops_per_branch]
        branches[lab] = choi_from_kraus(KrausSet(chunk))
    return Instrument(labels, branches)
