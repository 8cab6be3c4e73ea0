"""Gaussian-process camera model.

Maps believed joint angles to expected (distorted) camera readings with a
squared-exponential kernel, fit once per scenario family.  The analytic
Jacobian with respect to the beliefs is what the estimation flow needs.
"""

from dataclasses import dataclass

import numpy as np

from .accel import maybe_njit
from .errors import IllConditionedKernelError


@dataclass(frozen=True)
class GprHyperParams:
    lengthscale: float = 0.5   # rad
    signal_var: float = 1.0    # m^2
    noise_var: float = 1e-4    # m^2, matches camera noise variance


@dataclass
class GprModel:
    """Fitted model: training data, hyperparameters, dual weights.

    dual weights = (K + noise_var I)^-1 Y, one column per output dim.
    Immutable after fit; concurrent reads are safe.
    """

    X: np.ndarray       # (N, 2)
    Y: np.ndarray       # (N, 2)
    hyper: GprHyperParams
    dual: np.ndarray    # (N, 2)


def _kernel_matrix(Xa, Xb, hyper):
    d2 = np.sum((Xa[:, None, :] - Xb[None, :, :]) ** 2, axis=-1)
    return hyper.signal_var * np.exp(-d2 / (2.0 * hyper.lengthscale ** 2))


def fit(X, Y, hyper=GprHyperParams()):
    """Fit the camera model; each output dimension independently."""
    X = np.ascontiguousarray(X, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    K = _kernel_matrix(X, X, hyper) + hyper.noise_var * np.eye(X.shape[0])
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedKernelError(
            "kernel matrix not positive definite; try raising noise_var"
        ) from exc
    dual = np.linalg.solve(L.T, np.linalg.solve(L, Y))
    return GprModel(X=X, Y=Y, hyper=hyper, dual=np.ascontiguousarray(dual))


@maybe_njit
def gpr_eval_kernel(X, dual, mu, ell2, sf2):
    """Posterior mean and Jacobian at one test input.

    Returns (g, J) with J[j, i] = d g_j / d mu_i.
    """
    n = X.shape[0]
    g = np.zeros(2)
    J = np.zeros((2, 2))
    for m in range(n):
        d0 = mu[0] - X[m, 0]
        d1 = mu[1] - X[m, 1]
        k = sf2 * np.exp(-(d0 * d0 + d1 * d1) / (2.0 * ell2))
        w0 = -k * d0 / ell2
        w1 = -k * d1 / ell2
        g[0] += k * dual[m, 0]
        g[1] += k * dual[m, 1]
        J[0, 0] += w0 * dual[m, 0]
        J[0, 1] += w1 * dual[m, 0]
        J[1, 0] += w0 * dual[m, 1]
        J[1, 1] += w1 * dual[m, 1]
    return g, J


def predict(model, mu):
    """Expected camera reading for believed joint angles mu."""
    g, _ = gpr_eval_kernel(
        model.X, model.dual, np.asarray(mu, dtype=float),
        model.hyper.lengthscale ** 2, model.hyper.signal_var,
    )
    return g


def gradient(model, mu):
    """Jacobian of the prediction w.r.t. mu, shape (2, 2)."""
    _, J = gpr_eval_kernel(
        model.X, model.dual, np.asarray(mu, dtype=float),
        model.hyper.lengthscale ** 2, model.hyper.signal_var,
    )
    return J


def predict_with_gradient(model, mu):
    return gpr_eval_kernel(
        model.X, model.dual, np.asarray(mu, dtype=float),
        model.hyper.lengthscale ** 2, model.hyper.signal_var,
    )


def save(model, path):
    """Persist a fitted model losslessly."""
    np.savez(
        path,
        X=model.X, Y=model.Y, dual=model.dual,
        hyper=np.array([model.hyper.lengthscale, model.hyper.signal_var,
                        model.hyper.noise_var]),
    )


def load(path):
    data = np.load(path)
    hyper = GprHyperParams(
        lengthscale=float(data["hyper"][0]),
        signal_var=float(data["hyper"][1]),
        noise_var=float(data["hyper"][2]),
    )
    return GprModel(
        X=np.ascontiguousarray(data["X"]),
        Y=np.ascontiguousarray(data["Y"]),
        hyper=hyper,
        dual=np.ascontiguousarray(data["dual"]),
    )
