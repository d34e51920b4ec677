"""Polar code construction, encoding, and codeword-membership checking.

All indices are 0-based. File formats emitted by the CLI use the same
0-based convention.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PolarCode:
    """Code parameters plus the information/frozen index split.

    Parameters
    ----------
    N : int
        Block length, a power of two.
    info_set : ndarray
        Sorted 0-based indices of the K information positions.
    """

    N: int
    info_set: np.ndarray
    n: int = field(init=False)
    K: int = field(init=False)
    frozen_set: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.N < 1 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two, got {self.N}")
        info = np.unique(np.asarray(self.info_set, dtype=np.int64))
        if info.size and (info[0] < 0 or info[-1] >= self.N):
            raise ValueError("info_set indices out of range")
        if info.size != np.asarray(self.info_set).size:
            raise ValueError("info_set contains duplicates")
        frozen = np.setdiff1d(np.arange(self.N, dtype=np.int64), info)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "n", int(np.log2(self.N)))
        object.__setattr__(self, "K", int(info.size))
        object.__setattr__(self, "frozen_set", frozen)

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_set] = False
        return mask


def bhattacharyya_params(N, rate, design_ebn0_db):
    """Reliability parameters of the N synthesized bit-channels.

    Starts from z = exp(-rate * 10^(design_ebn0_db/10)) for the raw
    BPSK/AWGN channel and splits every channel into a degraded
    (2z - z^2) and an upgraded (z^2) one per polarization level. The
    first split corresponds to the most significant bit of the channel
    index, matching the natural-order (no bit-reversal) encoder below.
    Lower z means more reliable.
    """
    z = np.array([np.exp(-rate * 10.0 ** (design_ebn0_db / 10.0))])
    while z.size < N:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_code(N, K, design_ebn0_db=2.0):
    """Pick the K most reliable bit-channels as the information set.

    Ties in the reliability parameter are broken toward the smaller
    index. Deterministic given (N, K, design_ebn0_db).
    """
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two, got {N}")
    if K < 0 or K > N:
        raise ValueError(f"K must be in [0, {N}], got {K}")
    z = bhattacharyya_params(N, K / N, design_ebn0_db)
    info = np.sort(np.argsort(z, kind="stable")[:K])
    return PolarCode(N=N, info_set=info)


def polar_transform(u):
    """Apply the Kronecker-power butterfly over GF(2), x = u * G.

    Operates on the last axis, so a batch of rows transforms at once.
    The transform is its own inverse. No bit-reversal permutation is
    applied.
    """
    x = np.asarray(u, dtype=np.int8).copy()
    N = x.shape[-1]
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {N}")
    half = N // 2
    while half >= 1:
        v = x.reshape(x.shape[:-1] + (-1, 2, half))
        v[..., 0, :] ^= v[..., 1, :]
        half //= 2
    return x


def encode(code: PolarCode, u):
    """Encode a full length-N input vector (frozen positions already 0)."""
    u = np.asarray(u)
    if u.shape[-1] != code.N:
        raise ValueError(f"expected length {code.N}, got {u.shape[-1]}")
    return polar_transform(u)


def place_info_bits(code: PolarCode, info):
    """Scatter K information bits into their positions, zeros elsewhere."""
    info = np.asarray(info, dtype=np.int8)
    if info.shape != (code.K,):
        raise ValueError(f"expected {code.K} information bits, got {info.shape}")
    u = np.zeros(code.N, dtype=np.int8)
    u[code.info_set] = info
    return u


def extract_info_bits(code: PolarCode, u):
    """Inverse of place_info_bits: read the information positions."""
    u = np.asarray(u)
    if u.shape[-1] != code.N:
        raise ValueError(f"expected length {code.N}, got {u.shape[-1]}")
    return u[..., code.info_set]


def is_consistent(code: PolarCode, u_hat, x_hat) -> bool:
    """True iff u_hat re-encodes exactly to x_hat."""
    u_hat = np.asarray(u_hat)
    x_hat = np.asarray(x_hat)
    if u_hat.shape[-1] != code.N or x_hat.shape[-1] != code.N:
        raise ValueError("u_hat and x_hat must have length N")
    return bool(np.array_equal(polar_transform(u_hat), np.asarray(x_hat, dtype=np.int8)))


def save_frozen_set(code: PolarCode, design_ebn0_db, path):
    """Write 'N K design_ebn0_db' then the 0-based info-set indices."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{code.N} {code.K} {design_ebn0_db!r}\n")
        fh.write(" ".join(str(int(j)) for j in code.info_set) + "\n")


def load_frozen_set(path):
    """Read a file written by save_frozen_set; returns (code, design_ebn0_db)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed header, expected 'N K design_ebn0_db'")
        N, K, design = int(header[0]), int(header[1]), float(header[2])
        info = np.array([int(tok) for tok in fh.readline().split()], dtype=np.int64)
    if info.size != K:
        raise ValueError(f"{path}: header says K={K} but {info.size} indices found")
    return PolarCode(N=N, info_set=info), design
