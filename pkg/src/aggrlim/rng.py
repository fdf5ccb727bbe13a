"""Counter-based random streams (Philox4x64-10) usable from numba kernels.

Every simulated copy owns its own stream, addressed by the tuple
``(seed, replicate, copy, domain)``.  The seed is the Philox key; the other
three coordinates occupy the upper counter words and the lowest counter word
is the block index.  Two streams with different coordinates therefore never
overlap, and a copy's draws do not depend on how many other copies exist or
on which thread simulates it.

The block function is bit-compatible with :class:`numpy.random.Philox`
(a stream with coordinates ``(c1, c2, c3)`` reproduces
``Philox(key=[seed, 0], counter=[0, c1, c2, c3]).random_raw()``).

A stream state is a ``uint64[11]`` array::

    [k0, k1, c0, c1, c2, c3, out0, out1, out2, out3, pos]
"""

import numpy as np
from llvmlite import ir
from numba import njit, types
from numba.extending import intrinsic

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_SHIFT11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_FOUR = np.uint64(4)
_TWO_M53 = 1.0 / 9007199254740992.0

STATE_SIZE = 11

# stream domains keep unrelated experiments on disjoint counters
DOMAIN_PANEL = 0
DOMAIN_SLOPE = 1
DOMAIN_ALPHA = 2
DOMAIN_PATH = 3
DOMAIN_SIMPLE = 4


@intrinsic
def _mulhilo(typingctx, a, b):
    """(high, low) 64-bit words of the full 128-bit product a * b."""
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        i64 = ir.IntType(64)
        i128 = ir.IntType(128)
        prod = builder.mul(builder.zext(args[0], i128), builder.zext(args[1], i128))
        hi = builder.trunc(builder.lshr(prod, ir.Constant(i128, 64)), i64)
        lo = builder.trunc(prod, i64)
        return context.make_tuple(builder, signature.return_type, (hi, lo))

    return sig, codegen


@njit(cache=True, inline="always")
def philox_block(st):
    """Encrypt the counter in ``st[2:6]`` under key ``st[0:2]`` into ``st[6:10]``."""
    k0 = st[0]
    k1 = st[1]
    c0 = st[2]
    c1 = st[3]
    c2 = st[4]
    c3 = st[5]
    for r in range(10):
        if r > 0:
            k0 += _W0
            k1 += _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    st[6] = c0
    st[7] = c1
    st[8] = c2
    st[9] = c3


@njit(cache=True, inline="always")
def init_state(st, seed, copy, replicate, domain):
    st[0] = np.uint64(seed)
    st[1] = _ZERO
    st[2] = _ZERO
    st[3] = np.uint64(copy)
    st[4] = np.uint64(replicate)
    st[5] = np.uint64(domain)
    st[10] = _FOUR


# inlined at numba IR level: a regular call costs several times the block itself
@njit(cache=True, inline="always")
def next_u64(st):
    pos = np.int64(st[10])
    if pos >= 4:
        st[2] += _ONE
        if st[2] == _ZERO:
            st[3] += _ONE
        philox_block(st)
        pos = 0
    st[10] = np.uint64(pos + 1)
    return st[6 + pos]


@njit(cache=True, inline="always")
def uniform(st):
    """Uniform double on [0, 1) with 53 random bits."""
    return np.int64(next_u64(st) >> _SHIFT11) * _TWO_M53


@njit(cache=True)
def _fill_uniform(st, out):
    for i in range(out.size):
        out[i] = uniform(st)


@njit(cache=True)
def _fill_raw(st, out):
    for i in range(out.size):
        out[i] = next_u64(st)


def _check_u64(name, value):
    value = int(value)
    if not 0 <= value < 2**64:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


class RngStream:
    """A single counter-based stream; cheap to create, never shared between workers.

    Parameters
    ----------
    seed : int
        Master seed (unsigned 64-bit).
    replicate, copy : int
        Coordinates of the stream inside an experiment.
    domain : int
        Experiment family; see the ``DOMAIN_*`` constants.
    """

    def __init__(self, seed, replicate=0, copy=0, domain=DOMAIN_PATH):
        self.seed = _check_u64("seed", seed)
        self.replicate = _check_u64("replicate", replicate)
        self.copy = _check_u64("copy", copy)
        self.domain = _check_u64("domain", domain)
        self.state = np.zeros(STATE_SIZE, dtype=np.uint64)
        init_state(self.state, np.uint64(self.seed), np.uint64(self.copy),
                   np.uint64(self.replicate), np.uint64(self.domain))

    def __repr__(self):
        return (f"RngStream(seed={self.seed}, replicate={self.replicate}, "
                f"copy={self.copy}, domain={self.domain})")

    def spawn(self, copy):
        """Sibling stream for another copy of the same replicate."""
        return RngStream(self.seed, self.replicate, copy, self.domain)

    def raw(self, size):
        out = np.empty(int(size), dtype=np.uint64)
        _fill_raw(self.state, out)
        return out

    def uniform(self, size=None):
        if size is None:
            return float(uniform(self.state))
        out = np.empty(int(size), dtype=np.float64)
        _fill_uniform(self.state, out)
        return out
