"""Built-in closed-form test functions addressable by id from the CLI.

Each descriptor has ``evaluate(coords, h)`` where ``coords`` is the meshgrid
list and ``h`` the grid spacing; log-type functions clamp the last coordinate
at h/2 off the singular plane so arrays stay finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    fn: Callable[..., np.ndarray]
    params: dict = field(default_factory=dict)

    def evaluate(self, coords, h):
        return self.fn(coords, h, **self.params)


def _last(coords):
    return coords[-1]


def _const1(coords, h):
    return np.ones_like(_last(coords))


def _log_even(coords, h):
    z = np.maximum(np.abs(_last(coords)), h / 2)
    return np.log(z)


def _log_half(coords, h):
    z = _last(coords)
    za = np.maximum(np.abs(z), h / 2)
    return np.where(z > 0, np.log(za), 0.0)


def _sign(coords, h):
    return np.sign(_last(coords) + 1e-300)

def _gauss_bump(coords, h, width=1.0):
    r2 = sum(c * c for c in coords)
    return np.exp(-r2 / (2 * width * width))


def _cosine(coords, h, freq=4.0):
    return np.cos(freq * _last(coords))


def _square_wave(coords, h, period=1.0):
    return np.sign(np.sin(2 * np.pi * _last(coords) / period) + 1e-12)


def _log_chirp(coords, h, rate=8.0):
    z = np.maximum(np.abs(_last(coords)), h / 2)
    return np.cos(rate * np.log(z))


def _step_bump(coords, h, lo=0.0, hi=1.0):
    # half-weight at nodes landing exactly on a cut, so piecewise-linear
    # quadrature of the sampled data reproduces the indicator's mass
    z = _last(coords)
    out = np.where((z >= lo) & (z <= hi), 1.0, 0.0)
    edge = np.isclose(z, lo, rtol=0.0, atol=1e-12) | np.isclose(z, hi, rtol=0.0, atol=1e-12)
    return np.where(edge, 0.5, out)


def _counterexample(coords, h, alpha=0.5):
    z = _last(coords)
    out = np.zeros_like(z, dtype=float)
    m = (z > 0) & (z <= 0.5)
    zm = z[m]
    out[m] = -1.0 / (zm**alpha * np.log(zm))
    return out


CATALOG: dict[str, Callable[..., FunctionSpec]] = {
    "const1": lambda **kw: FunctionSpec("const1", _const1),
    # even logarithm log|x_n|: finite classical oscillation at every scale
    "log_e": lambda **kw: FunctionSpec("log_e", _log_even),
    # one-sided logarithm H(x_n) log|x_n|
    "Log": lambda **kw: FunctionSpec("Log", _log_half),
    "sign": lambda **kw: FunctionSpec("sign", _sign),
    "bump": lambda width=1.0, **kw: FunctionSpec("bump", _gauss_bump, {"width": width}),
    "cos": lambda freq=4.0, **kw: FunctionSpec("cos", _cosine, {"freq": freq}),
    "square": lambda period=1.0, **kw: FunctionSpec("square", _square_wave, {"period": period}),
    "chirp": lambda rate=8.0, **kw: FunctionSpec("chirp", _log_chirp, {"rate": rate}),
    "indicator": lambda lo=0.0, hi=1.0, **kw: FunctionSpec("indicator", _step_bump, {"lo": lo, "hi": hi}),
    "counterexample": lambda alpha=0.5, **kw: FunctionSpec("counterexample", _counterexample, {"alpha": alpha}),
}


def get_function(name: str, **params) -> FunctionSpec:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown function id {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    return factory(**params)


def random_bounded(seed: int, count: int, kinds=("trig",)) -> list[FunctionSpec]:
    """Deterministic family of bounded functions with sup norm exactly 1.

    Random trigonometric polynomials rescaled to peak 1; used by the bound
    and sweep checks.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(count):
        deg = int(rng.integers(2, 6))
        amps = rng.standard_normal(deg)
        freqs = rng.uniform(0.5, 6.0, deg)
        phases = rng.uniform(0, 2 * np.pi, deg)

        def fn(coords, h, amps=amps, freqs=freqs, phases=phases):
            z = _last(coords)
            v = np.zeros_like(z, dtype=float)
            for a, w, p in zip(amps, freqs, phases):
                v = v + a * np.cos(w * z + p)
            peak = np.max(np.abs(v))
            return v / peak if peak > 0 else v

        specs.append(FunctionSpec(f"rand{i}", fn))
    return specs
