"""
Feed-forward actor-critic network with hand-written backpropagation.

Layout (shared trunk, the default):

    obs -> [Linear -> LeakyReLU] x len(hidden) -> mean head  (act_dim)
                                               -> value head (1)
    log_std: free parameter vector (act_dim), state independent

With ``shared_trunk=False`` the actor and critic each get their own trunk of
the same shape. Weights are stored (in, out) so a batch forward is x @ W + b.
All arithmetic is float64.
"""

import io
import json
import math
import zipfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..errors import CheckpointMismatch, NonFiniteActivation

LEAKY_SLOPE = 0.01
LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
LOG_2PI = math.log(2.0 * math.pi)

CHECKPOINT_FORMAT = 1
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class Architecture:
    obs_dim: int = 8
    act_dim: int = 5
    hidden: Tuple[int, ...] = (512, 256, 128)
    shared_trunk: bool = True
    log_std_init: float = 0.0

    def trunk_prefixes(self) -> Tuple[str, ...]:
        return ("trunk",) if self.shared_trunk else ("pi", "vf")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hidden"] = list(self.hidden)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Architecture":
        return cls(**{**data, "hidden": tuple(data["hidden"])})


class ArraySet:
    """Ordered name -> ndarray mapping shared by parameters and gradients"""

    def __init__(self, arrays: Dict[str, np.ndarray]):
        self.arrays = arrays

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.arrays)

    def __len__(self) -> int:
        return len(self.arrays)

    def items(self):
        return self.arrays.items()

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: value.shape for name, value in self.arrays.items()}

    def global_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(v * v)) for v in self.arrays.values()))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.arrays.values())

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.arrays.values()])


class MlpParams(ArraySet):
    def __init__(self, arrays: Dict[str, np.ndarray], architecture: Architecture):
        super().__init__(arrays)
        self.architecture = architecture

    def copy(self) -> "MlpParams":
        return MlpParams({k: v.copy() for k, v in self.arrays.items()}, self.architecture)

    def replace(self, arrays: Dict[str, np.ndarray]) -> "MlpParams":
        return MlpParams(arrays, self.architecture)


class GradientSet(ArraySet):
    def scale(self, factor: float) -> "GradientSet":
        return GradientSet({k: v * factor for k, v in self.arrays.items()})

    def __add__(self, other: "GradientSet") -> "GradientSet":
        return GradientSet({k: v + other[k] for k, v in self.arrays.items()})

    @classmethod
    def zeros_like(cls, params: ArraySet) -> "GradientSet":
        return cls({k: np.zeros_like(v) for k, v in params.items()})


class ForwardOutput(NamedTuple):
    mean: np.ndarray  # (B, act_dim) or (act_dim,)
    log_std: np.ndarray  # (act_dim,), clamped
    value: np.ndarray  # (B,) or scalar
    cache: Dict[str, Any]


def orthogonal_init(rows: int, cols: int, gain: float, rng: np.random.Generator) -> np.ndarray:
    """
    QR-based orthogonal matrix scaled by gain

    Rows are orthonormal when rows <= cols, columns otherwise.
    """
    if rows < 1 or cols < 1:
        raise ValueError("orthogonal_init needs positive dimensions")
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def leaky_relu(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, x, LEAKY_SLOPE * x)


def leaky_relu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, 1.0, LEAKY_SLOPE)


def init_params(architecture: Architecture, rng: np.random.Generator) -> MlpParams:
    """Trunk gain sqrt(2), mean head 0.01, value head 1.0, zero biases"""
    arrays: Dict[str, np.ndarray] = {}
    for prefix in architecture.trunk_prefixes():
        fan_in = architecture.obs_dim
        for index, width in enumerate(architecture.hidden):
            arrays[f"{prefix}.{index}.W"] = orthogonal_init(fan_in, width, math.sqrt(2.0), rng)
            arrays[f"{prefix}.{index}.b"] = np.zeros(width)
            fan_in = width

    features = architecture.hidden[-1] if architecture.hidden else architecture.obs_dim
    arrays["mean.W"] = orthogonal_init(features, architecture.act_dim, 0.01, rng)
    arrays["mean.b"] = np.zeros(architecture.act_dim)
    arrays["log_std"] = np.full(architecture.act_dim, architecture.log_std_init)
    arrays["value.W"] = orthogonal_init(features, 1, 1.0, rng)
    arrays["value.b"] = np.zeros(1)
    return MlpParams(arrays, architecture)


def _trunk_forward(params: MlpParams, prefix: str, x: np.ndarray) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]:
    layers = []
    h = x
    for index in range(len(params.architecture.hidden)):
        z = h @ params[f"{prefix}.{index}.W"] + params[f"{prefix}.{index}.b"]
        layers.append((h, z))
        h = leaky_relu(z)
    return h, layers


def _trunk_backward(params: MlpParams, prefix: str, layers, d_h: np.ndarray, grads: Dict[str, np.ndarray]) -> None:
    for index in reversed(range(len(layers))):
        h_in, z = layers[index]
        d_z = d_h * leaky_relu_grad(z)
        grads[f"{prefix}.{index}.W"] = h_in.T @ d_z
        grads[f"{prefix}.{index}.b"] = d_z.sum(axis=0)
        d_h = d_z @ params[f"{prefix}.{index}.W"].T


def clamp_log_std(raw: np.ndarray) -> np.ndarray:
    return np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)


def forward(params: MlpParams, obs: np.ndarray) -> ForwardOutput:
    """
    Evaluate both heads

    Args:
        params: Network parameters
        obs: One observation (obs_dim,) or a batch (B, obs_dim)

    Raises:
        NonFiniteActivation: Input or any output is NaN/Inf
    """
    single = np.ndim(obs) == 1
    x = np.atleast_2d(np.asarray(obs, dtype=float))
    if not np.all(np.isfinite(x)):
        raise NonFiniteActivation("non-finite network input")

    if params.architecture.shared_trunk:
        features, layers = _trunk_forward(params, "trunk", x)
        cache = {"x": x, "trunk": layers, "pi_features": features, "vf_features": features, "single": single}
    else:
        pi_features, pi_layers = _trunk_forward(params, "pi", x)
        vf_features, vf_layers = _trunk_forward(params, "vf", x)
        cache = {
            "x": x, "pi": pi_layers, "vf": vf_layers,
            "pi_features": pi_features, "vf_features": vf_features, "single": single,
        }

    mean = cache["pi_features"] @ params["mean.W"] + params["mean.b"]
    value = (cache["vf_features"] @ params["value.W"] + params["value.b"])[:, 0]
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(value))):
        raise NonFiniteActivation("non-finite network output", details={"batch": len(x)})

    log_std = clamp_log_std(params["log_std"])
    if single:
        return ForwardOutput(mean[0], log_std, value[0], cache)
    return ForwardOutput(mean, log_std, value, cache)


def backward(
    params: MlpParams,
    cache: Dict[str, Any],
    d_mean: np.ndarray,
    d_log_std: np.ndarray,
    d_value: np.ndarray,
) -> GradientSet:
    """
    Gradients of a scalar loss given its partials w.r.t. the three outputs

    d_log_std is taken w.r.t. the clamped log-std; entries whose raw value
    sits outside [LOG_STD_MIN, LOG_STD_MAX] receive zero gradient.
    """
    batch = len(cache["x"])
    act_dim = params.architecture.act_dim
    d_mean = np.reshape(np.asarray(d_mean, dtype=float), (batch, act_dim))
    d_value = np.reshape(np.asarray(d_value, dtype=float), (batch, 1))

    grads: Dict[str, np.ndarray] = {}
    grads["mean.W"] = cache["pi_features"].T @ d_mean
    grads["mean.b"] = d_mean.sum(axis=0)
    grads["value.W"] = cache["vf_features"].T @ d_value
    grads["value.b"] = d_value.sum(axis=0)

    raw = params["log_std"]
    inside = (raw >= LOG_STD_MIN) & (raw <= LOG_STD_MAX)
    grads["log_std"] = np.where(inside, np.asarray(d_log_std, dtype=float), 0.0)

    d_pi = d_mean @ params["mean.W"].T
    d_vf = d_value @ params["value.W"].T
    if params.architecture.shared_trunk:
        _trunk_backward(params, "trunk", cache["trunk"], d_pi + d_vf, grads)
    else:
        _trunk_backward(params, "pi", cache["pi"], d_pi, grads)
        _trunk_backward(params, "vf", cache["vf"], d_vf, grads)

    return GradientSet({name: grads[name] for name in params})


def gaussian_log_prob(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Diagonal Gaussian log-density summed over the last axis"""
    z = (np.asarray(action) - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z * z - log_std - 0.5 * LOG_2PI, axis=-1)


def gaussian_log_prob_grads(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-sample partials of the log-density w.r.t. mean and log_std"""
    inv_std = np.exp(-log_std)
    z = (np.asarray(action) - mean) * inv_std
    return z * inv_std, z * z - 1.0


def entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std + 0.5 * (1.0 + LOG_2PI)))


def clip_grad_norm(grads: GradientSet, max_norm: float) -> GradientSet:
    """Rescale all gradients together when their global L2 norm exceeds max_norm"""
    if not max_norm > 0:
        raise ValueError("max_norm must be positive")
    norm = grads.global_norm()
    if norm > max_norm:
        return grads.scale(max_norm / norm)
    return grads


@dataclass
class RmsPropState:
    square_avg: Dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "RmsPropState":
        return RmsPropState({k: v.copy() for k, v in self.square_avg.items()})


@dataclass
class AdamState:
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    def copy(self) -> "AdamState":
        return AdamState({k: a.copy() for k, a in self.m.items()}, {k: a.copy() for k, a in self.v.items()}, self.t)


def rmsprop_step(
    params: MlpParams,
    grads: GradientSet,
    lr: float,
    alpha: float = 0.99,
    eps: float = 1e-5,
    state: Optional[RmsPropState] = None,
) -> Tuple[MlpParams, RmsPropState]:
    """v <- alpha v + (1 - alpha) g^2 ; p <- p - lr g / (sqrt(v) + eps); inputs are not mutated"""
    state = state or RmsPropState()
    new_avg, new_params = {}, {}
    for name, p in params.items():
        g = grads[name]
        v = alpha * state.square_avg.get(name, np.zeros_like(p)) + (1.0 - alpha) * g * g
        new_avg[name] = v
        new_params[name] = p - lr * g / (np.sqrt(v) + eps)
    return params.replace(new_params), RmsPropState(new_avg)


def adam_step(
    params: MlpParams,
    grads: GradientSet,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    state: Optional[AdamState] = None,
) -> Tuple[MlpParams, AdamState]:
    """Bias-corrected Adam; inputs are not mutated"""
    state = state or AdamState()
    beta1, beta2 = betas
    t = state.t + 1
    new_m, new_v, new_params = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m = beta1 * state.m.get(name, np.zeros_like(p)) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, np.zeros_like(p)) + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_m[name], new_v[name] = m, v
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
    return params.replace(new_params), AdamState(new_m, new_v, t)


# Checkpoint container


def _write_member(archive: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    archive.writestr(info, payload)


def save_checkpoint(
    path: Union[str, Path],
    params: MlpParams,
    rng_state: Optional[Dict[str, Any]] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write parameters to a zip of .npy members plus a JSON header

    Member timestamps are fixed, so identical inputs give identical bytes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": CHECKPOINT_FORMAT,
        "architecture": params.architecture.to_dict(),
        "shapes": {name: list(shape) for name, shape in params.shapes().items()},
        "rng_state": rng_state,
        "metadata": metadata or {},
    }
    with zipfile.ZipFile(path, "w") as archive:
        _write_member(archive, "header.json", json.dumps(header, sort_keys=True, indent=2).encode("utf-8"))
        for name, value in params.items():
            buffer = io.BytesIO()
            np.lib.format.write_array(buffer, np.ascontiguousarray(value, dtype=np.float64), allow_pickle=False)
            _write_member(archive, f"{name}.npy", buffer.getvalue())
    return path


def load_checkpoint(
    path: Union[str, Path],
    expected: Optional[Architecture] = None,
) -> Tuple[MlpParams, Dict[str, Any]]:
    """
    Read a checkpoint written by save_checkpoint

    Raises:
        CheckpointMismatch: Unreadable file, unknown format, architecture or shape mismatch
    """
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as archive:
            header = json.loads(archive.read("header.json"))
            if header.get("format") != CHECKPOINT_FORMAT:
                raise CheckpointMismatch(f"unsupported checkpoint format {header.get('format')!r} in {path}")
            architecture = Architecture.from_dict(header["architecture"])
            arrays = {}
            for name, shape in header["shapes"].items():
                value = np.lib.format.read_array(io.BytesIO(archive.read(f"{name}.npy")), allow_pickle=False)
                if list(value.shape) != shape:
                    raise CheckpointMismatch(f"{path}: {name} has shape {value.shape}, header says {tuple(shape)}")
                arrays[name] = value
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointMismatch(f"cannot read checkpoint {path}: {exc}") from None

    if expected is not None and (expected.obs_dim, expected.act_dim) != (architecture.obs_dim, architecture.act_dim):
        raise CheckpointMismatch(
            f"checkpoint {path} expects obs/act dims {architecture.obs_dim}/{architecture.act_dim}, "
            f"environment has {expected.obs_dim}/{expected.act_dim}",
            details={"checkpoint": architecture.to_dict(), "expected": expected.to_dict()},
        )
    return MlpParams(arrays, architecture), header
