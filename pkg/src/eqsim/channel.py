"""Rational ISI channels, state-space realizations and AWGN transmission."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

IMPULSE_TAPS = 200


class InvalidChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    """Transfer function ``H(z) = b(z^-1) / a(z^-1)`` with ``a[0] == 1``.

    A trivial denominator ``a = (1,)`` gives an FIR channel with taps ``b``.
    """

    b: tuple[float, ...]
    a: tuple[float, ...] = (1.0,)
    name: str = ""

    def __post_init__(self):
        b = tuple(float(v) for v in np.atleast_1d(self.b))
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        if not b or not a:
            raise InvalidChannelError("empty coefficient list")
        if not np.all(np.isfinite(b + a)):
            raise InvalidChannelError("non-finite channel coefficient")
        if a[0] != 1.0:
            raise InvalidChannelError(f"a[0] must be 1, got {a[0]!r}")
        # trailing zeros in the denominator change the state dimension only
        while len(a) > 1 and a[-1] == 0.0:
            a = a[:-1]
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        if self.is_iir:
            poles = np.roots(a)
            if np.any(np.abs(poles) >= 1.0):
                raise InvalidChannelError(f"unstable denominator, poles {poles}")

    @property
    def is_iir(self) -> bool:
        return len(self.a) > 1

    @property
    def memory(self) -> int:
        """FIR memory ``M`` (number of taps minus one)."""
        if self.is_iir:
            raise InvalidChannelError("IIR channel has infinite memory")
        return len(self.b) - 1

    def impulse_response(self, n: int = IMPULSE_TAPS) -> np.ndarray:
        x = np.zeros(n)
        x[0] = 1.0
        return _kernels.ss_output(*_realize(self.b, self.a), x)

    def energy(self) -> float:
        return float(np.sum(self.impulse_response() ** 2))


PRESETS = {
    "proakis5": ChannelSpec((0.227, 0.46, 0.688, 0.46, 0.227), name="proakis5"),
    "iir09": ChannelSpec((1.0,), (1.0, -0.9), name="iir09"),
}


def _floats(csv: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in csv.split(",") if v.strip())
    except ValueError as exc:
        raise InvalidChannelError(f"bad coefficient list {csv!r}") from exc


def parse_channel(text: str) -> ChannelSpec:
    """Parse a preset name, ``fir:<csv>`` or ``iir:<b csv>/<a csv>``."""
    if text in PRESETS:
        return PRESETS[text]
    kind, _, rest = text.partition(":")
    if kind == "fir" and rest:
        return ChannelSpec(_floats(rest), name=text)
    if kind == "iir" and "/" in rest:
        b, a = rest.split("/", 1)
        return ChannelSpec(_floats(b), _floats(a), name=text)
    raise InvalidChannelError(f"unknown channel {text!r}")


@dataclass(frozen=True)
class StateSpaceModel:
    """``s_k = A s_{k-1} + B x_k``, ``y_k = C s_k + w_k`` with zero initial state."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    spec: ChannelSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_1d(np.asarray(self.B, dtype=float)).ravel()
        C = np.atleast_1d(np.asarray(self.C, dtype=float)).ravel()
        d = A.shape[0]
        if A.shape != (d, d) or B.size != d or C.size != d:
            raise InvalidChannelError(f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape}")
        for name, v in (("A", A), ("B", B), ("C", C)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def impulse_response(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[0] = 1.0
        return _kernels.ss_output(self.A, self.B, self.C, x)


def _realize(b, a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = len(a) - 1
    q = len(b) - 1
    d = max(p, q + 1)
    A = np.zeros((d, d))
    A[0, :p] = -np.asarray(a[1:])
    A[np.arange(1, d), np.arange(d - 1)] = 1.0
    B = np.zeros(d)
    B[0] = 1.0
    C = np.zeros(d)
    C[: q + 1] = b
    return A, B, C


def realize_state_space(spec: ChannelSpec) -> StateSpaceModel:
    """Controllable-canonical realization.

    The state holds the most recent outputs of the all-pole part ``1/a``;
    for an FIR channel this is the shift register ``(x_k, ..., x_{k-M})``
    and ``C`` equals the taps.
    """
    return StateSpaceModel(*_realize(spec.b, spec.a), spec=spec)


@dataclass(frozen=True)
class TransmissionRecord:
    symbols: np.ndarray
    observations: np.ndarray
    noise_var: float
    seed: int | None = None

    def __post_init__(self):
        if len(self.symbols) != len(self.observations):
            raise ValueError("symbols and observations differ in length")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be positive, got {self.noise_var!r}")


def simulate(model: StateSpaceModel, symbols, noise_var: float, seed=None) -> TransmissionRecord:
    """Send ``symbols`` (values +-1) through ``model`` and add white Gaussian noise.

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`.
    """
    symbols = np.asarray(symbols, dtype=float)
    if not np.all(np.abs(symbols) == 1.0):
        raise ValueError("symbols must be +1 or -1")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var!r}")
    rng = np.random.default_rng(seed)
    clean = _kernels.ss_output(model.A, model.B, model.C, symbols)
    obs = clean + np.sqrt(noise_var) * rng.standard_normal(symbols.size)
    return TransmissionRecord(symbols, obs, float(noise_var), seed)


def snr_to_noise_var(snr_db: float, spec: ChannelSpec, code_rate: float = 1.0) -> float:
    """Noise variance for ``Eb/N0 = snr_db`` with unit symbol energy.

    ``noise_var = E_h / (2 R 10**(snr_db / 10))`` where ``E_h`` is the
    energy of the first 200 impulse-response taps.
    """
    if not 0.0 < code_rate <= 1.0:
        raise ValueError(f"code rate must be in (0, 1], got {code_rate!r}")
    return spec.energy() / (2.0 * code_rate * 10.0 ** (snr_db / 10.0))
