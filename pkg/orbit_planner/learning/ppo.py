"""
Proximal policy optimization update with a clipped surrogate and KL early stop
"""

from typing import Any, Dict, Tuple

import numpy as np

from ..errors import NonFiniteLoss
from ..schemas.training import TrainerConfig
from .buffer import RolloutBuffer, Transitions, normalize_advantages
from .nn import (
    AdamState,
    GradientSet,
    MlpParams,
    adam_step,
    backward,
    clip_grad_norm,
    entropy,
    forward,
    gaussian_log_prob,
    gaussian_log_prob_grads,
)


def approx_kl(ratio: np.ndarray) -> float:
    """mean((r - 1) - log r), non-negative"""
    return float(np.mean((ratio - 1.0) - np.log(ratio)))


def ppo_loss_and_grads(
    params: MlpParams,
    batch: Transitions,
    config: TrainerConfig,
) -> Tuple[Dict[str, float], GradientSet]:
    out = forward(params, batch.observations)
    size = batch.size
    advantages = batch.advantages

    log_prob = gaussian_log_prob(out.mean, out.log_std, batch.actions)
    ratio = np.exp(log_prob - batch.log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * advantages
    policy_loss = -float(np.mean(np.minimum(unclipped, clipped)))

    value_error = out.value - batch.returns
    value_loss = float(np.mean(value_error**2))
    ent = entropy(out.log_std)
    loss = policy_loss + config.vf_coef * value_loss - config.ent_coef * ent

    terms = {
        "loss": loss,
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": ent,
        "approx_kl": approx_kl(ratio),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > config.clip_epsilon)),
    }
    if not np.isfinite(loss):
        raise NonFiniteLoss("non-finite PPO loss", details=terms)

    # min() picks the clipped branch only where it is strictly smaller; its gradient is 0 there
    d_logp = -np.where(unclipped <= clipped, advantages * ratio, 0.0) / size
    d_mean_logp, d_log_std_logp = gaussian_log_prob_grads(out.mean, out.log_std, batch.actions)
    d_mean = d_logp[:, None] * d_mean_logp
    d_log_std = np.sum(d_logp[:, None] * d_log_std_logp, axis=0) - config.ent_coef
    d_value = config.vf_coef * 2.0 * value_error / size
    return terms, backward(params, out.cache, d_mean, d_log_std, d_value)


def ppo_update(
    params: MlpParams,
    buffer: RolloutBuffer,
    config: TrainerConfig,
    rng: np.random.Generator,
    state: AdamState = None,
) -> Tuple[MlpParams, AdamState, Dict[str, Any]]:
    """
    Up to n_epochs passes of shuffled minibatches

    Before each minibatch step the KL between the rollout policy and the
    current parameters is estimated on that minibatch; once it exceeds
    target_kl no further steps are taken in any epoch.

    Returns:
        (new_params, optimizer_state, metrics)
    """
    metrics: Dict[str, Any] = {
        "policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "grad_norm": 0.0,
        "approx_kl": 0.0, "clip_fraction": 0.0, "early_stopped": False,
        "epochs_applied": 0, "n_updates": 0,
    }

    for _ in range(config.n_epochs):
        applied_this_epoch = False
        for batch in buffer.minibatches(config.batch_size, rng):
            if config.normalize_advantage:
                batch = batch._replace(advantages=normalize_advantages(batch.advantages))

            terms, grads = ppo_loss_and_grads(params, batch, config)
            metrics["approx_kl"] = terms["approx_kl"]
            if config.target_kl is not None and terms["approx_kl"] > config.target_kl:
                metrics["early_stopped"] = True
                break

            grads = clip_grad_norm(grads, config.max_grad_norm)
            params, state = adam_step(params, grads, config.learning_rate, config.adam_betas, config.adam_eps, state)
            if not params.all_finite():
                raise NonFiniteLoss("non-finite parameters after PPO update", details=terms)

            applied_this_epoch = True
            metrics["n_updates"] += 1
            metrics["grad_norm"] = grads.global_norm()
            for key in ("policy_loss", "value_loss", "entropy", "clip_fraction"):
                metrics[key] = terms[key]

        if applied_this_epoch:
            metrics["epochs_applied"] += 1
        if metrics["early_stopped"]:
            break

    return params, state, metrics
