"""Rates, DoF slopes and alignment Monte Carlo.

Rates come from the exact transfer report (each decoded stream sees a
scalar AWGN channel with interference treated as noise).  A sample-level
run of the same scheme, with its own noise and symbol draws, cross-checks
those SINRs by regression.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .condense import build_condensed
from .netmodel import LayeredNetwork
from .programs import Scheme, SchemeError, TransferReport, evaluate
from .schemes import IaParameters

DEFAULT_GRID = (1e4, 1e6, 1e8, 1e10)
CSV_COLUMNS = ("P", "R1", "R2", "sum", "mode_count", "slope", "residual")


@dataclass(frozen=True)
class SimConfig:
    P: float = 1e6
    n_symbols: int = 100_000
    seed: int = 0
    P_grid: tuple = DEFAULT_GRID

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("P must be positive")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be positive")
        grid = tuple(float(p) for p in self.P_grid)
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
            raise ValueError("P grid must be positive, strictly increasing, with at least 3 points")
        object.__setattr__(self, "P_grid", grid)


@dataclass
class SimResult:
    rates: tuple  # (R1, R2) at cfg.P, bits per channel use
    rows: list = field(default_factory=list)  # (P, R1, R2, sum) per grid point
    dof_slope: float | None = None
    residual: float | None = None
    empirical_rates: tuple | None = None
    mode_count: int = 1
    stream_sinr: dict = field(default_factory=dict)  # stream index -> (analytic, empirical)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        rows = self.rows or [(None, *self.rates, sum(self.rates))]
        for P, r1, r2, s in rows:
            w.writerow([
                "" if P is None else repr(P), repr(r1), repr(r2), repr(s), self.mode_count,
                "" if self.dof_slope is None else repr(self.dof_slope),
                "" if self.residual is None else repr(self.residual),
            ])
        return buf.getvalue()


def _verified(net: LayeredNetwork, scheme: Scheme) -> TransferReport:
    rep = evaluate(net, scheme)
    if not rep.passed:
        raise SchemeError("scheme does not pass verification")
    return rep


def _stream(seed: int, kind: int, idx: int, mode: int) -> np.random.Generator:
    """Independent substream per (kind, index, mode) of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(kind, idx, mode)))


def run_samples(net: LayeredNetwork, scheme: Scheme, alpha: float, P: float, n: int, seed: int):
    """Sample-level execution of every mode.  Returns the symbol draws and
    the received samples at every (node, mode)."""
    symbols = []
    for k in range(1, scheme.modes + 1):
        for s in net.sources:
            for sym, _ in scheme.program(k, s).streams:
                if sym not in symbols:
                    symbols.append(sym)
    draws = {s: _stream(seed, 0, i, 0).standard_normal(n) for i, s in enumerate(symbols)}
    amp = math.sqrt(alpha * P)
    received, stored = {}, {}
    for k in range(1, scheme.modes + 1):
        tx = {}
        for layer in net.layers:
            for v in layer:
                y = np.zeros(n)
                for u in net.pred[v]:
                    if u in tx:
                        y += net.edges[(u, v)] * tx[u]
                if v not in net.sources:
                    y += _stream(seed, 1, net.index[v], k).standard_normal(n)
                received[(v, k)] = y
                p = scheme.program(k, v)
                if p.kind == "send":
                    tx[v] = amp * sum(c * draws[s] for s, c in p.streams)
                elif p.kind == "forward":
                    tx[v] = p.x * y
                elif p.kind == "store":
                    stored[(v, k)] = y
                elif p.kind == "replay":
                    tx[v] = p.x * stored[(v, p.source_mode)]
                elif p.kind == "cancel":
                    tx[v] = p.x * (y - p.kappa * stored[(v, p.source_mode)])
    return draws, received


def _regression_sinr(y: np.ndarray, s: np.ndarray) -> float:
    c = float(np.dot(y, s) / np.dot(s, s))
    resid = y - c * s
    return c * c * float(np.dot(s, s)) / float(np.dot(resid, resid))


def simulate_rates(net: LayeredNetwork, scheme: Scheme, cfg: SimConfig = SimConfig(),
                   empirical: bool = True) -> SimResult:
    rep = _verified(net, scheme)
    R = rep.rates(cfg.P)
    result = SimResult(R, mode_count=scheme.modes)
    for i, sr in enumerate(rep.streams):
        result.stream_sinr[i] = (sr.sinr(rep.alpha, cfg.P), None)
    if empirical:
        draws, received = run_samples(net, scheme, rep.alpha, cfg.P, cfg.n_symbols, cfg.seed)
        emp = [[], []]
        for i, sr in enumerate(rep.streams):
            st = sr.stream
            # received samples are in absolute units; the symbol enters with amplitude sqrt(alpha P)
            sinr = _regression_sinr(received[(st.node, st.mode)], draws[st.symbol])
            result.stream_sinr[i] = (result.stream_sinr[i][0], sinr)
            emp[st.user - 1].append(0.5 * math.log2(1 + sinr))
        result.empirical_rates = tuple(math.fsum(r) / scheme.modes for r in emp)
    return result


def estimate_dof(net: LayeredNetwork, scheme: Scheme, cfg: SimConfig = SimConfig()) -> SimResult:
    """Least-squares slope of the sum rate against (1/2)·log2 P over the grid."""
    rep = _verified(net, scheme)
    rows = []
    for P in cfg.P_grid:
        r1, r2 = rep.rates(P)
        rows.append((P, r1, r2, r1 + r2))
    x = np.array([0.5 * math.log2(P) for P in cfg.P_grid])
    y = np.array([r[3] for r in rows])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.sqrt(np.mean((A @ np.array([slope, icept]) - y) ** 2)))
    return SimResult(rep.rates(cfg.P), rows, float(slope), residual, None, scheme.modes)


# -- alignment Monte Carlo -------------------------------------------------------------
def _decode(z: np.ndarray, m: float, t: float, h1: int, h2: int):
    """Nearest point of {m·x1 + t·x2 : |x1| ≤ h1, |x2| ≤ h2} to each entry of z."""
    best = np.full(z.shape, np.inf)
    x1_hat = np.zeros(z.shape, dtype=np.int64)
    x2_hat = np.zeros(z.shape, dtype=np.int64)
    for x2 in range(-h2, h2 + 1):
        x1 = np.clip(np.rint((z - t * x2) / m), -h1, h1)
        d = np.abs(z - m * x1 - t * x2)
        better = d < best
        best = np.where(better, d, best)
        x1_hat = np.where(better, x1.astype(np.int64), x1_hat)
        x2_hat = np.where(better, x2, x2_hat)
    return x1_hat, x2_hat


def _min_distance(m: float, t: float, h1: int, h2: int) -> float:
    x1 = np.arange(-h1, h1 + 1, dtype=float)
    pts = np.sort((m * x1[None, :] + t * np.arange(-h2, h2 + 1, dtype=float)[:, None]).ravel())
    gaps = np.diff(pts)
    return float(gaps.min()) if gaps.size else math.inf


def ia_dmin(ia: IaParameters, P: float) -> dict:
    """Minimum distance of the noise-free constellation seen by each hard
    decoder at power P, in received-signal units."""
    q = ia.halfwidth(P)
    G = ia.G(P)
    out = {}
    for role, (scale, m, t, w1, w2, _) in ia.decoders.items():
        unit = G if role == "u2" else ia.alpha_relay * G
        out[role] = abs(unit * scale) * _min_distance(m, t, w1 * q, w2 * q)
    return out


def dmin_slopes(ia: IaParameters, grid: Sequence[float]) -> dict:
    """Log-log slope of each decoder's d_min against P."""
    vals = [ia_dmin(ia, P) for P in grid]
    lx = np.log(np.array(grid, dtype=float))
    return {
        role: float(np.polyfit(lx, np.log([v[role] for v in vals]), 1)[0]) for role in vals[0]
    }


@dataclass(frozen=True)
class IaErrorReport:
    P: float
    trials: int
    node_errors: dict  # decoder role -> error rate of its integer pair
    symbol_error: float  # fraction of trials with any desired symbol wrong
    dmin: dict


def ia_symbol_error(net: LayeredNetwork, ia: IaParameters, P: float, trials: int = 10_000,
                    seed: int = 0, noise_scale: float = 1.0) -> IaErrorReport:
    """Hard-decoding Monte Carlo on the condensed network.  Effective noises
    at the relay layer and at the destinations use the exact condensed
    covariances (scaled by ``noise_scale``; 0 gives the noiseless run)."""
    g = net.swapped() if ia.swapped else net
    cond = build_condensed(g, [ia.key_layer], forwarders=ia.forwarders)
    mids = list(ia.nodes)
    names = {"u1": mids[0], "u2": mids[1], "u3": mids[2]}
    q = ia.halfwidth(P)
    G, aG = ia.G(P), ia.alpha_relay * ia.G(P)
    if q * G * 4 > 2**52:
        raise ValueError("constellation exceeds double precision at this P")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    syms = sorted({s for coefs in ia.source_coefs.values() for s, _ in coefs})
    x = {s: rng.integers(-q, q + 1, trials) for s in syms}

    def noise(layer_idx, nodes):
        order = list(cond.layers[layer_idx])
        C = cond.noise_cov[layer_idx]
        L = np.linalg.cholesky(C)
        z = L @ rng.standard_normal((len(order), trials))
        return {v: noise_scale * z[order.index(v)] for v in nodes}

    n_mid = noise(1, mids)
    n_dst = noise(2, [g.d1, g.d2])
    h = ia.gains
    tx_s = {s: G * sum(c * x[sym] for sym, c in coefs) for s, coefs in ia.source_coefs.items()}
    y = {u: sum(h[(s, u)] * tx_s[s] for s in tx_s) + n_mid[names[u]] for u in ("u1", "u2", "u3")}
    scale, m, t, w1, w2, labels = ia.decoders["u2"]
    u2_x1, u2_x2 = _decode(y["u2"] / (G * scale), m, t, w1 * q, w2 * q)
    truth = _decoder_truth(ia, x)
    errors = {"u2": float(np.mean((u2_x1 != truth["u2"][0]) | (u2_x2 != truth["u2"][1])))}
    tx_u = {
        "u1": ia.alpha_relay * ia.relay_coefs["u1"] * y["u1"],
        "u3": ia.alpha_relay * ia.relay_coefs["u3"] * y["u3"],
        # u2 forwards its decoded combination: the aligned sum in case 1, b1 in case 2
        "u2": aG * ia.relay_coefs["u2"] * (u2_x1 if ia.case == 1 else u2_x2),
    }
    got = {}
    for d, dn in (("d1", g.d1), ("d2", g.d2)):
        yd = sum(h[(u, d)] * tx_u[u] for u in tx_u) + n_dst[dn]
        scale, m, t, w1, w2, labels = ia.decoders[d]
        got[d] = _decode(yd / (aG * scale), m, t, w1 * q, w2 * q)
        errors[d] = float(np.mean((got[d][0] != truth[d][0]) | (got[d][1] != truth[d][1])))
    if ia.case == 1:
        wrong = (got["d1"][0] != x["a1"]) | (got["d1"][1] != x["a2"]) | (got["d2"][1] != x["b"])
    else:
        wrong = (got["d1"][0] != x["a"]) | (got["d2"][0] != x["b1"]) | (got["d2"][1] != x["b2"])
    return IaErrorReport(P, trials, errors, float(np.mean(wrong)), ia_dmin(ia, P))


def _decoder_truth(ia: IaParameters, x: dict) -> dict:
    if ia.case == 1:
        return {
            "u2": (x["a1"] + x["b"], x["a2"]),
            "d1": (x["a1"], x["a2"]),
            "d2": (x["a1"] + x["b"], x["b"]),
        }
    return {
        "u2": (x["a"] + x["b2"], x["b1"]),
        "d1": (x["a"], x["b2"]),
        "d2": (x["b1"], x["b2"]),
    }


__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_GRID",
    "IaErrorReport",
    "SimConfig",
    "SimResult",
    "dmin_slopes",
    "estimate_dof",
    "ia_dmin",
    "ia_symbol_error",
    "run_samples",
    "simulate_rates",
]
