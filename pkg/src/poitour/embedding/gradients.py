"""Loss and gradient kernels for negative-sampling objectives.

These functions are the exact math used by the trainer; the test suite
checks them against central finite differences, so any change here is
covered by the gradient tests.

Conventions: ``labels`` is 1 for the true context/center target and 0 for
noise targets. Returned gradients are of the loss (callers subtract
``lr * grad``). Dtype follows the inputs.
"""

from __future__ import annotations

import numpy as np

# exp(60) is far below float32 max; sigmoid saturates to machine precision
# well before |x| = 60, so clipping changes nothing measurable.
_MAX_SCORE = 60.0


def sigmoid(x: np.ndarray) -> np.ndarray:
    z = np.clip(x, -_MAX_SCORE, _MAX_SCORE)
    return 1.0 / (1.0 + np.exp(-z))


def sgns_gradients(
    center: np.ndarray, targets: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """Skip-gram negative-sampling step for one (center, targets) group.

    ``center`` is the input vector (d,), ``targets`` the output vectors
    (m, d) of the true context followed by noise tokens.

    Returns (grad_center, grad_targets, loss).
    """
    x = targets @ center
    coef = sigmoid(x) - labels
    grad_center = coef @ targets
    grad_targets = coef[:, None] * center
    # -log sigmoid(x) for positives, -log sigmoid(-x) for negatives
    loss = float(np.logaddexp(0.0, (1.0 - 2.0 * labels) * x).sum())
    return grad_center, grad_targets, loss


def cbow_gradients(
    contexts: np.ndarray, targets: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """CBOW negative-sampling step for one window.

    The center token is predicted from ``h``, the mean of the context input
    vectors (n, d). Every context vector receives the same gradient
    ``grad_context`` (the chain rule divides the hidden gradient by n).

    Returns (grad_context, grad_targets, loss).
    """
    h = contexts.mean(axis=0)
    grad_h, grad_targets, loss = sgns_gradients(h, targets, labels)
    return grad_h / len(contexts), grad_targets, loss
