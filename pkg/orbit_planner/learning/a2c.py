"""
Synchronous advantage actor-critic update: one RMSProp step per rollout
"""

from typing import Dict, Tuple

import numpy as np

from ..errors import NonFiniteLoss
from ..schemas.training import TrainerConfig
from .buffer import Transitions, normalize_advantages
from .nn import (
    GradientSet,
    MlpParams,
    RmsPropState,
    backward,
    clip_grad_norm,
    entropy,
    forward,
    gaussian_log_prob,
    gaussian_log_prob_grads,
    rmsprop_step,
)


def a2c_loss_and_grads(
    params: MlpParams,
    batch: Transitions,
    config: TrainerConfig,
) -> Tuple[Dict[str, float], GradientSet]:
    """
    loss = -mean(log_prob * A) + vf_coef * mean((V - R)^2) - ent_coef * entropy

    Advantages are used exactly as given; normalization happens in a2c_update.
    """
    out = forward(params, batch.observations)
    size = batch.size
    log_prob = gaussian_log_prob(out.mean, out.log_std, batch.actions)
    policy_loss = -float(np.mean(log_prob * batch.advantages))
    value_error = out.value - batch.returns
    value_loss = float(np.mean(value_error**2))
    ent = entropy(out.log_std)
    loss = policy_loss + config.vf_coef * value_loss - config.ent_coef * ent

    terms = {"loss": loss, "policy_loss": policy_loss, "value_loss": value_loss, "entropy": ent}
    if not np.isfinite(loss):
        raise NonFiniteLoss("non-finite A2C loss", details=terms)

    d_logp = -batch.advantages / size
    d_mean_logp, d_log_std_logp = gaussian_log_prob_grads(out.mean, out.log_std, batch.actions)
    d_mean = d_logp[:, None] * d_mean_logp
    d_log_std = np.sum(d_logp[:, None] * d_log_std_logp, axis=0) - config.ent_coef
    d_value = config.vf_coef * 2.0 * value_error / size
    return terms, backward(params, out.cache, d_mean, d_log_std, d_value)


def a2c_update(
    params: MlpParams,
    batch: Transitions,
    config: TrainerConfig,
    state: RmsPropState = None,
) -> Tuple[MlpParams, RmsPropState, Dict[str, float]]:
    """
    One gradient step over the whole rollout

    Returns:
        (new_params, optimizer_state, metrics) with metrics policy_loss,
        value_loss, entropy, grad_norm (after clipping) and loss
    """
    if config.normalize_advantage:
        batch = batch._replace(advantages=normalize_advantages(batch.advantages))

    terms, grads = a2c_loss_and_grads(params, batch, config)
    grads = clip_grad_norm(grads, config.max_grad_norm)
    new_params, state = rmsprop_step(
        params, grads, config.learning_rate, config.rms_prop_alpha, config.rms_prop_eps, state
    )
    if not new_params.all_finite():
        raise NonFiniteLoss("non-finite parameters after A2C update", details=terms)
    return new_params, state, {**terms, "grad_norm": grads.global_norm()}
