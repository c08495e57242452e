"""Linear-chain CRF over the B/I/O label set.

Weights live in one flat vector: slot(obs, label) = obs_id * 3 + label,
followed by the 9 label-bigram transition slots.  All probability math is
done in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence as Seq

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .corpus import LABELS
from .features import Template, TEMPLATES

MODEL_FORMAT_VERSION = "tempex-crf-1"

N_LABELS = len(LABELS)
LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}


class CrfError(ValueError):
    pass


@dataclass
class MarginalTable:
    """Per-position label distributions plus the log-partition."""
    probs: np.ndarray  # (n, 3)
    log_z: float

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.probs) and not np.allclose(
                self.probs.sum(axis=1), 1.0, atol=1e-9):
            raise CrfError("marginal rows do not sum to 1")

    def __len__(self):
        return len(self.probs)

    def row(self, i: int) -> dict[str, float]:
        return {lab: float(self.probs[i, j]) for j, lab in enumerate(LABELS)}


@dataclass
class CrfModel:
    obs_index: dict[str, int]          # observation string -> obs id
    weights: np.ndarray                # len = n_obs * 3 + 9
    templates: tuple[Template, ...] = TEMPLATES
    c: float = 1.0
    eta: float = 1e-4
    profile: str = "model1"
    version: str = MODEL_FORMAT_VERSION
    training_log: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        expected = len(self.obs_index) * N_LABELS + N_LABELS * N_LABELS
        if self.weights.shape != (expected,):
            raise CrfError(
                f"weight vector has {self.weights.shape[0]} slots, "
                f"index requires {expected}")

    @property
    def n_obs(self) -> int:
        return len(self.obs_index)

    def unary_weights(self) -> np.ndarray:
        return self.weights[: self.n_obs * N_LABELS].reshape(-1, N_LABELS)

    def transition_weights(self) -> np.ndarray:
        return self.weights[self.n_obs * N_LABELS:].reshape(N_LABELS, N_LABELS)

    def encode(self, position_features: Seq[Iterable[str]]) -> list[np.ndarray]:
        """Observation ids per position; unknown feature strings dropped."""
        idx = self.obs_index
        return [
            np.fromiter((idx[f] for f in feats if f in idx), dtype=np.int64)
            for feats in position_features
        ]


def build_feature_index(sequences_features: Seq[Seq[Iterable[str]]],
                        cutoff: int = 1) -> dict[str, int]:
    """Intern every observation string seen at least `cutoff` times.

    Slot order is first-occurrence order, so the index is deterministic
    for a fixed corpus.
    """
    if not sequences_features:
        raise CrfError("empty corpus")
    counts: dict[str, int] = {}
    order: list[str] = []
    for seq_feats in sequences_features:
        for feats in seq_feats:
            for f in feats:
                if f not in counts:
                    counts[f] = 0
                    order.append(f)
                counts[f] += 1
    return {f: i for i, f in
            enumerate(f for f in order if counts[f] >= cutoff)}


def _unary_scores(model: CrfModel, obs_ids: list[np.ndarray]) -> np.ndarray:
    w = model.unary_weights()
    n = len(obs_ids)
    scores = np.zeros((n, N_LABELS))
    for p, ids in enumerate(obs_ids):
        if len(ids):
            scores[p] = w[ids].sum(axis=0)
    return scores


def _forward_backward_scores(unary: np.ndarray, trans: np.ndarray):
    n = len(unary)
    alpha = np.zeros((n, N_LABELS))
    beta = np.zeros((n, N_LABELS))
    alpha[0] = unary[0]
    for t in range(1, n):
        alpha[t] = unary[t] + logsumexp(alpha[t - 1][:, None] + trans, axis=0)
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(trans + (unary[t + 1] + beta[t + 1])[None, :],
                            axis=1)
    log_z = float(logsumexp(alpha[-1]))
    return alpha, beta, log_z


def forward_backward(model: CrfModel,
                     position_features: Seq[Iterable[str]]) -> MarginalTable:
    """Exact per-position marginals and logZ."""
    if not position_features:
        return MarginalTable(np.zeros((0, N_LABELS)), 0.0)
    obs_ids = model.encode(position_features)
    unary = _unary_scores(model, obs_ids)
    alpha, beta, log_z = _forward_backward_scores(
        unary, model.transition_weights())
    probs = np.exp(alpha + beta - log_z)
    probs /= probs.sum(axis=1, keepdims=True)
    return MarginalTable(probs, log_z)


def viterbi(model: CrfModel,
            position_features: Seq[Iterable[str]]) -> list[str]:
    """Maximum-probability label sequence; argmax ties break by B < I < O."""
    if not position_features:
        return []
    obs_ids = model.encode(position_features)
    unary = _unary_scores(model, obs_ids)
    trans = model.transition_weights()
    n = len(unary)
    delta = unary[0].copy()
    back = np.zeros((n, N_LABELS), dtype=np.int64)
    for t in range(1, n):
        scores = delta[:, None] + trans
        back[t] = np.argmax(scores, axis=0)  # first max wins: B < I < O
        delta = unary[t] + np.max(scores, axis=0)
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t][path[-1]]))
    path.reverse()
    return [LABELS[i] for i in path]


def sequence_score(model: CrfModel, obs_ids: list[np.ndarray],
                   label_ids: Seq[int]) -> float:
    unary = _unary_scores(model, obs_ids)
    trans = model.transition_weights()
    score = sum(unary[t, y] for t, y in enumerate(label_ids))
    score += sum(trans[a, b] for a, b in zip(label_ids, label_ids[1:]))
    return float(score)


def log_likelihood_and_gradient(model: CrfModel, batch):
    """Regularized conditional log-likelihood and its gradient.

    `batch` is a list of (position_features, labels) pairs.  Value is
    sum log p(y|x) - ||w||^2 / (2C); the gradient is empirical minus
    expected feature counts minus w/C.
    """
    encoded = []
    for position_features, labels in batch:
        if len(position_features) != len(labels):
            raise CrfError("feature/label length mismatch")
        try:
            label_ids = [LABEL_INDEX[l] for l in labels]
        except KeyError as exc:
            raise CrfError(f"unknown label {exc.args[0]!r}") from exc
        encoded.append((model.encode(position_features), label_ids))
    return _ll_grad_encoded(model, encoded)


@dataclass
class TrainConfig:
    c: float = 1.0
    eta: float = 1e-4
    max_iter: int = 300
    cutoff: int = 1
    history: int = 5


def train(sequences_features: Seq[Seq[Iterable[str]]],
          labels: Seq[Seq[str]],
          config: Optional[TrainConfig] = None,
          templates: tuple[Template, ...] = TEMPLATES,
          profile: str = "model1") -> CrfModel:
    """L2-regularized maximum likelihood via limited-memory quasi-Newton.

    Stops when the relative objective change falls below `eta` or after
    `max_iter` iterations.  Deterministic: same corpus and config yield
    identical weights.
    """
    config = config or TrainConfig()
    if not sequences_features:
        raise CrfError("empty corpus")
    obs_index = build_feature_index(sequences_features, config.cutoff)
    model = CrfModel(
        obs_index,
        np.zeros(len(obs_index) * N_LABELS + N_LABELS * N_LABELS),
        templates=templates, c=config.c, eta=config.eta, profile=profile)
    batch = [
        (model.encode(feats), [LABEL_INDEX[l] for l in labs])
        for feats, labs in zip(sequences_features, labels, strict=True)
    ]

    # pre-encoded fast path for the optimizer
    def objective(w):
        model.weights = w
        value, grad = _ll_grad_encoded(model, batch)
        if not np.isfinite(value):
            raise CrfError("non-finite training objective")
        return -value, -grad

    iterations = [0]
    result = minimize(
        objective, model.weights, jac=True, method="L-BFGS-B",
        callback=lambda _: iterations.__setitem__(0, iterations[0] + 1),
        options={"maxiter": config.max_iter, "maxcor": config.history,
                 "ftol": config.eta, "gtol": 1e-10})
    model.weights = np.asarray(result.x, dtype=float)
    model.training_log = {
        "iterations": iterations[0],
        "final_objective": -float(result.fun),
        "n_features": len(obs_index),
        "converged": bool(result.success),
        "message": str(result.message),
    }
    return model


def _ll_grad_encoded(model: CrfModel, batch):
    grad = np.zeros_like(model.weights)
    value = 0.0
    t_base = model.n_obs * N_LABELS
    trans = model.transition_weights()
    w_unary = model.unary_weights()
    for obs_ids, label_ids in batch:
        if not label_ids:
            continue
        n = len(obs_ids)
        unary = np.zeros((n, N_LABELS))
        for p, ids in enumerate(obs_ids):
            if len(ids):
                unary[p] = w_unary[ids].sum(axis=0)
        alpha, beta, log_z = _forward_backward_scores(unary, trans)
        marg = np.exp(alpha + beta - log_z)
        score = sum(unary[t, y] for t, y in enumerate(label_ids))
        score += sum(trans[a, b] for a, b in zip(label_ids, label_ids[1:]))
        value += score - log_z
        for t, (ids, y) in enumerate(zip(obs_ids, label_ids)):
            if not len(ids):
                continue
            np.add.at(grad, ids * N_LABELS + y, 1.0)
            np.subtract.at(
                grad,
                (ids[:, None] * N_LABELS + np.arange(N_LABELS)).ravel(),
                np.tile(marg[t], len(ids)))
        if n > 1:
            pair_total = np.zeros((N_LABELS, N_LABELS))
            for t in range(n - 1):
                pair_total += np.exp(
                    alpha[t][:, None] + trans
                    + (unary[t + 1] + beta[t + 1])[None, :] - log_z)
            grad[t_base:] -= pair_total.ravel()
            for a, b in zip(label_ids, label_ids[1:]):
                grad[t_base + a * N_LABELS + b] += 1.0
    value -= float(model.weights @ model.weights) / (2.0 * model.c)
    grad -= model.weights / model.c
    return value, grad


def save_model(model: CrfModel, path) -> None:
    lines = [
        f"#version\t{model.version}",
        f"#labels\t{','.join(LABELS)}",
        "#templates\t" + ";".join(
            f"{t.tid}:{','.join(map(str, t.offsets))}"
            for t in model.templates),
        f"#hyperparams\tC={model.c!r},eta={model.eta!r}",
        f"#profile\t{model.profile}",
        f"#n_features\t{model.n_obs}",
    ]
    unary = model.unary_weights()
    for feat, oid in model.obs_index.items():
        for li, lab in enumerate(LABELS):
            lines.append(f"{feat}\t{lab}\t{float(unary[oid, li])!r}")
    trans = model.transition_weights()
    for a, la in enumerate(LABELS):
        for b, lb in enumerate(LABELS):
            lines.append(f"__T__\t{la}:{lb}\t{float(trans[a, b])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> CrfModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, val = lines[i][1:].partition("\t")
        header[key] = val
        i += 1
    version = header.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise CrfError(
            f"model format {version!r} not supported "
            f"(expected {MODEL_FORMAT_VERSION!r})")
    if header.get("labels") != ",".join(LABELS):
        raise CrfError(f"unexpected label set {header.get('labels')!r}")
    templates = tuple(
        Template(part.split(":")[0],
                 tuple(int(x) for x in part.split(":")[1].split(",")))
        for part in header["templates"].split(";"))
    hp = dict(kv.split("=") for kv in header["hyperparams"].split(","))
    n_features = int(header["n_features"])

    obs_index: dict[str, int] = {}
    weights = np.zeros(n_features * N_LABELS + N_LABELS * N_LABELS)
    for line in lines[i:]:
        if not line.strip():
            continue
        feat, lab, w = line.rsplit("\t", 2)
        if feat == "__T__":
            a, b = lab.split(":")
            slot = (n_features * N_LABELS
                    + LABEL_INDEX[a] * N_LABELS + LABEL_INDEX[b])
        else:
            if feat not in obs_index:
                obs_index[feat] = len(obs_index)
            slot = obs_index[feat] * N_LABELS + LABEL_INDEX[lab]
        weights[slot] = float(w)
    if len(obs_index) != n_features:
        raise CrfError(
            f"model declares {n_features} features, file has "
            f"{len(obs_index)}")
    return CrfModel(obs_index, weights, templates=templates,
                    c=float(hp["C"]), eta=float(hp["eta"]),
                    profile=header.get("profile", "model1"))
