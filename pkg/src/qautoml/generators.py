"""Seeded synthetic datasets shaped like the four desk-benchmark use cases.

Every generator is a pure function of its seed. Each returns a
:class:`Dataset` holding train and test frames plus the task metadata the CLI
needs. Forecasting sets store the raw series; the test frame starts with the
last ``FORECAST_LAGS`` training points so every test target has a full lag
window, and those context rows are not scored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from .pipeline.templates import FORECAST_LAGS

TILE_BANDS = 7
TILE_STEPS = 30
TILE_CLASSES = 7


@dataclass
class Dataset:
    name: str
    task: str
    target: str
    train: pd.DataFrame
    test: pd.DataFrame
    categorical: tuple = ()
    metric: str = ""
    context_rows: int = 0
    info: dict = field(default_factory=dict)

    def features(self, part: str):
        df = self.train if part == "train" else self.test
        if self.task == "ts_forecasting":
            return df[self.target].to_numpy()
        return df.drop(columns=[self.target])

    def targets(self, part: str):
        df = self.train if part == "train" else self.test
        y = df[self.target].to_numpy()
        if self.task == "ts_forecasting" and part == "test":
            return y[self.context_rows:]
        return y

    def write(self, directory) -> tuple[Path, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = d / f"{self.name}_train.csv", d / f"{self.name}_test.csv"
        self.train.to_csv(paths[0], index=False, lineterminator="\n")
        self.test.to_csv(paths[1], index=False, lineterminator="\n")
        return paths


def _stratified_labels(n, n_classes, rng):
    labels = np.arange(n) % n_classes
    return rng.permutation(labels)


def _tile(label, rng, noise):
    # band-energy envelope over time: each class has its own dominant bands
    # and modulation frequency; phases and amplitudes jitter per sample
    t = np.arange(TILE_STEPS)
    bands = np.arange(TILE_BANDS)
    centre = label % TILE_BANDS
    profile = np.exp(-0.5 * ((bands - centre) / 1.2) ** 2)
    freq = 1.0 + 0.5 * label
    phase = rng.uniform(0, 2 * np.pi)
    amp = rng.uniform(0.8, 1.2)
    mod = 1.0 + 0.5 * np.sin(2 * np.pi * freq * t / TILE_STEPS + phase)
    tile = amp * profile[:, None] * mod[None, :]
    tile += 0.15 * np.sin(2 * np.pi * rng.uniform(0.5, 4.0) * t / TILE_STEPS + rng.uniform(0, 2 * np.pi))[None, :]
    return tile + noise * rng.normal(size=tile.shape)


def gen_tiles(seed: int = 0, fast: bool = False, noise: float = 0.6) -> Dataset:
    """Seven-class flattened spectrogram tiles, d = 7 x 30 = 210."""
    rng = np.random.default_rng(seed)
    n_train, n_test = (758, 2533) if not fast else (758 // 4, 2533 // 4)
    frames = []
    for n in (n_train, n_test):
        y = _stratified_labels(n, TILE_CLASSES, rng)
        X = np.stack([_tile(c, rng, noise).ravel() for c in y])
        df = pd.DataFrame(X, columns=[f"b{b}_t{t}" for b in range(TILE_BANDS) for t in range(TILE_STEPS)])
        df["label"] = y
        frames.append(df)
    return Dataset("tiles", "ts_classification", "label", frames[0], frames[1], metric="balanced_accuracy")


def gen_latent(seed: int = 0, separation: float = 3.6) -> Dataset:
    """Two 8-D Gaussian classes whose means are ``separation`` apart."""
    rng = np.random.default_rng(seed)
    d = 8
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    A = rng.normal(size=(d, d)) / np.sqrt(d)
    cov = 0.5 * np.eye(d) + 0.5 * A @ A.T
    # rescale so the Mahalanobis distance between the means is ``separation``
    m = float(direction @ np.linalg.solve(cov, direction))
    delta = direction * separation / np.sqrt(m)
    L = np.linalg.cholesky(cov)
    frames = []
    for n in (400, 100):
        y = _stratified_labels(n, 2, rng)
        X = rng.normal(size=(n, d)) @ L.T + np.where(y[:, None] == 1, delta / 2, -delta / 2)
        df = pd.DataFrame(X, columns=[f"z{i}" for i in range(d)])
        df["label"] = y
        frames.append(df)
    return Dataset("latent", "tabular_classification", "label", frames[0], frames[1], metric="accuracy")


LOCATIONS = tuple(f"site_{c}" for c in "ABCDEFGHI")
EXTENSIONS = ("none", "short", "long")


def gen_price(seed: int = 0, noise: float = 0.08) -> Dataset:
    """Used-machine prices: six raw columns (two categorical), 16 after one-hot."""
    rng = np.random.default_rng(seed)
    n = 165
    year = rng.integers(2008, 2023, size=n)
    hours = np.round(rng.uniform(200, 16000, size=n) * (1 + (2023 - year) / 15) / 2)
    power = np.round(rng.uniform(60, 250, size=n), 1)
    weight = np.round(rng.uniform(8, 40, size=n), 2)
    loc = rng.choice(LOCATIONS, size=n)
    ext = rng.choice(EXTENSIONS, size=n)
    loc_offset = dict(zip(LOCATIONS, np.linspace(-0.15, 0.15, len(LOCATIONS))))
    ext_offset = {"none": 0.0, "short": 0.08, "long": 0.15}
    age = 2023 - year
    log_price = (
        np.log(180_000)
        - 0.07 * age
        - 0.25 * np.log1p(hours / 2000)
        + 0.002 * (power - 150)
        + 0.01 * (weight - 24)
        + np.array([loc_offset[v] for v in loc])
        + np.array([ext_offset[v] for v in ext])
        + noise * rng.normal(size=n)
    )
    df = pd.DataFrame(
        {
            "year": year,
            "hours": hours,
            "power": power,
            "weight": weight,
            "location": loc,
            "extension": ext,
            "price": np.round(np.exp(log_price), 2),
        }
    )
    return Dataset(
        "price", "tabular_regression", "price", df.iloc[:132].reset_index(drop=True),
        df.iloc[132:].reset_index(drop=True), ("location", "extension"), "mape",
    )


def engine_series(seed: int = 0, n: int = 700, noise: float = 0.02) -> np.ndarray:
    """Damped, driven Duffing oscillator sampled at ``n`` evenly spaced times."""
    rng = np.random.default_rng(seed)
    delta, alpha, beta, gamma, omega = 0.3, -1.0, 1.0, 0.37, 1.2
    dt = 0.5

    def rhs(t, s):
        x, v = s
        return [v, -delta * v - alpha * x - beta * x**3 + gamma * np.cos(omega * t)]

    t = np.arange(n) * dt
    x0 = rng.uniform(-1, 1, size=2)
    sol = solve_ivp(rhs, (0, t[-1]), x0, t_eval=t, rtol=1e-9, atol=1e-9, method="DOP853")
    return sol.y[0] + noise * rng.normal(size=n)


def gen_engine(seed: int = 0, noise: float = 0.02) -> Dataset:
    """700-point oscillator trace: 696 lag-4 windows split 556/140 by time."""
    s = engine_series(seed, 700, noise)
    n_fit = 556 + FORECAST_LAGS
    train = pd.DataFrame({"value": s[:n_fit]})
    test = pd.DataFrame({"value": s[n_fit - FORECAST_LAGS:]})
    return Dataset("engine", "ts_forecasting", "value", train, test, metric="mase", context_rows=FORECAST_LAGS)


GENERATORS = {"tiles": gen_tiles, "latent": gen_latent, "price": gen_price, "engine": gen_engine}


def generate(name: str, seed: int = 0, fast: bool = False) -> Dataset:
    if name not in GENERATORS:
        raise KeyError(f"unknown generator {name!r}; expected one of {tuple(GENERATORS)}")
    if name == "tiles":
        return gen_tiles(seed, fast)
    return GENERATORS[name](seed)
