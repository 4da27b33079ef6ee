"""Dense statevector storage and local plane rotations for l sites of n levels.

Flat indexing is little-endian: site 0 is the least significant digit,
so a basis label with digits (d_0, ..., d_{l-1}) sits at flat index
sum_i d_i * n**i. All file formats and tests rely on this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce as _fold

import numpy as np

from .errors import CapacityError, InvalidIndexError, InvalidRotationError

#: A basis label: one digit in [0, n) per site, site 0 first.
MultiIndex = tuple[int, ...]

#: Default cap on the number of amplitudes a state may hold.
DEFAULT_SIZE_CAP = 2**26

#: Allowed deviation of the squared norm from 1 at construction time.
NORM_ATOL = 1e-10

#: Allowed max-entry deviation of rot @ rot^dagger from the identity.
UNITARITY_ATOL = 1e-10


def index_encode(digits, n: int) -> int:
    """Map a digit tuple to its little-endian flat index.

    Raises InvalidIndexError if any digit falls outside [0, n).
    """
    flat = 0
    weight = 1
    for pos, d in enumerate(digits):
        d = int(d)
        if not 0 <= d < n:
            raise InvalidIndexError(
                f"digit {d} at site {pos} outside [0, {n})"
            )
        flat += d * weight
        weight *= n
    return flat


def index_decode(flat: int, n: int, l: int) -> MultiIndex:
    """Inverse of index_encode: flat index to per-site digits."""
    flat = int(flat)
    if not 0 <= flat < n**l:
        raise InvalidIndexError(f"flat index {flat} outside [0, {n}**{l})")
    digits = []
    for _ in range(l):
        flat, d = divmod(flat, n)
        digits.append(d)
    return tuple(digits)


@dataclass
class PureState:
    """Normalized pure state of ``l`` subsystems with ``n`` levels each.

    ``amplitudes`` is a length ``n**l`` complex vector in little-endian
    flat order. Construction validates the shape and that the squared
    norm is within 1e-10 of one; operations in this package return new
    states and never mutate their inputs.
    """

    n: int
    l: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2 levels per site, got {self.n}")
        if self.l < 1:
            raise ValueError(f"need l >= 1 sites, got {self.l}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        dim = self.n**self.l
        if self.amplitudes.shape != (dim,):
            raise ValueError(
                f"expected {dim} amplitudes for n={self.n}, l={self.l}, "
                f"got shape {self.amplitudes.shape}"
            )
        norm_sq = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(
                f"state not normalized: squared norm {norm_sq!r} "
                f"deviates from 1 by more than {NORM_ATOL}"
            )

    @property
    def dim(self) -> int:
        return self.n**self.l

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "PureState":
        return PureState(self.n, self.l, self.amplitudes.copy())


def amplitude_at(state: PureState, digits) -> complex:
    """Amplitude of the basis term labelled by ``digits``."""
    digits = tuple(int(d) for d in digits)
    if len(digits) != state.l:
        raise InvalidIndexError(
            f"expected {state.l} digits, got {len(digits)}"
        )
    return complex(state.amplitudes[index_encode(digits, state.n)])


def rotate_pair_inplace(amps: np.ndarray, n: int, l: int, site: int,
                        level_a: int, level_b: int, rot: np.ndarray) -> None:
    """Mix levels (level_a, level_b) of ``site`` by ``rot``, in place.

    Kernel shared by apply_plane_rotation and the elimination loops; no
    argument validation here. ``amps`` must be a contiguous length n**l
    complex vector.
    """
    arr = amps.reshape((n,) * l)
    axis = l - 1 - site  # little-endian flat order: site 0 varies fastest
    sl = [slice(None)] * l
    sl[axis] = level_a
    sl_a = tuple(sl)
    sl[axis] = level_b
    sl_b = tuple(sl)
    va = arr[sl_a].copy()
    vb = arr[sl_b].copy()
    arr[sl_a] = rot[0, 0] * va + rot[0, 1] * vb
    arr[sl_b] = rot[1, 0] * va + rot[1, 1] * vb


def apply_plane_rotation(state: PureState, site: int, level_a: int,
                         level_b: int, rot) -> PureState:
    """Apply a 2x2 unitary to span{|level_a>, |level_b>} of one site.

    Acts as ``rot`` on every flat-index pair differing only in the
    digit at ``site`` (value level_a vs level_b), with the level_a
    component first; all other amplitudes are untouched. Returns a new
    state.

    Raises InvalidRotationError when ``rot`` deviates from unitarity by
    more than 1e-10 (max-entry norm of rot @ rot^dagger - I).
    """
    if not 0 <= site < state.l:
        raise ValueError(f"site {site} outside [0, {state.l})")
    if not 0 <= level_a < level_b < state.n:
        raise ValueError(
            f"need 0 <= level_a < level_b < {state.n}, "
            f"got ({level_a}, {level_b})"
        )
    rot = np.asarray(rot, dtype=np.complex128)
    if rot.shape != (2, 2):
        raise ValueError(f"rotation must be 2x2, got shape {rot.shape}")
    defect = np.max(np.abs(rot @ rot.conj().T - np.eye(2)))
    if defect > UNITARITY_ATOL:
        raise InvalidRotationError(
            f"matrix is not unitary: ||rot rot^dagger - I||_max = {defect:.3e}"
        )
    work = state.amplitudes.copy()
    rotate_pair_inplace(work, state.n, state.l, site, level_a, level_b, rot)
    return PureState(state.n, state.l, work)


def random_state(n: int, l: int, seed: int, *,
                 size_cap: int = DEFAULT_SIZE_CAP) -> PureState:
    """Seeded Haar-like random state: iid standard-normal real and
    imaginary parts, then normalized.

    Uses numpy's default_rng (PCG64), so a given seed reproduces the
    same amplitudes on every run. Raises CapacityError when n**l
    exceeds ``size_cap``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    dim = n**l
    if dim > size_cap:
        raise CapacityError(
            f"n**l = {n}**{l} = {dim} exceeds the amplitude cap {size_cap}"
        )
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    amps /= np.linalg.norm(amps)
    return PureState(n, l, amps)


def product_state(factors) -> PureState:
    """Tensor product of one normalized length-n vector per site.

    The amplitude at digits (d_0, ..., d_{l-1}) is the product of
    factors[i][d_i]; each factor must have squared norm within 1e-10
    of one.
    """
    factors = [np.asarray(f, dtype=np.complex128) for f in factors]
    if not factors:
        raise ValueError("need at least one site factor")
    n = factors[0].shape[0] if factors[0].ndim == 1 else 0
    if n < 2:
        raise ValueError("each factor must be a vector of length >= 2")
    for i, f in enumerate(factors):
        if f.shape != (n,):
            raise ValueError(
                f"factor {i} has shape {f.shape}, expected ({n},)"
            )
        norm_sq = float(np.sum(np.abs(f) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(f"factor {i} is not normalized: |f|^2 = {norm_sq!r}")
    # kron puts its first argument's index in the most significant slot,
    # so fold over factors in reverse to keep site 0 least significant.
    amps = _fold(np.kron, reversed(factors))
    return PureState(n, len(factors), amps)
