"""Counter-based random streams and seed splitting.

Algorithm (fixed so seeds reproduce on every platform):

* word ``i`` of stream ``seed`` is ``finalize(seed + (i + 1) * 0x9E3779B97F4A7C15)``
  modulo 2**64, with ``finalize`` the splitmix64 output mixer;
* a uniform double is ``(word >> 11) * 2**-53``, in [0, 1);
* normals come from Box-Muller on consecutive word pairs
  (``u1 = 1 - uniform(2j)``, ``u2 = uniform(2j + 1)``).

Child seeds are derived with :func:`split_seed`, which folds each index into
the running hash through ``finalize``.
"""
from . import kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x):
    """splitmix64 step: ``finalize(x + GOLDEN)`` on a Python int."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def split_seed(master, *indices):
    """Derive a 64-bit child seed from ``master`` and a path of indices.

    ``h = mix64(master)``, then ``h = mix64(h ^ index)`` for each index.
    """
    h = mix64(int(master) & MASK64)
    for idx in indices:
        if idx < 0:
            raise ValueError("seed indices must be nonnegative")
        h = mix64(h ^ (int(idx) & MASK64))
    return h


class CounterRng:
    """Sequential view over one counter-based stream.

    Draws advance an internal counter, so two instances built from the same
    seed produce the same sequence.
    """

    def __init__(self, seed):
        self.seed = int(seed) & MASK64
        self.counter = 0

    def uniform(self, size=None):
        n = 1 if size is None else int(size)
        u = kernels.uniforms(self.seed, self.counter, n)
        self.counter += n
        return float(u[0]) if size is None else u

    def normal(self, size):
        # normal 2j uses words 2j and 2j + 1: start on an even word
        n = int(size)
        self.counter += self.counter % 2
        npairs = (n + 1) // 2
        z = kernels.standard_normals(self.seed, self.counter, 2 * npairs)[:n]
        self.counter += 2 * npairs
        return z
