"""Relay programs, multi-mode schemes, their text format and exact linear
evaluation.

A scheme runs the network in one or more equal-length modes.  In each mode
every node follows one program.  Signals are tracked exactly as coefficient
vectors over the transmitted symbols (in units of sqrt(alpha * P)) and over
the unit-variance receiver noises, one noise variable per (node, mode), so
buffered signals replayed in a later mode carry their original noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .netmodel import LayeredNetwork

KINDS = ("silent", "forward", "store", "replay", "cancel", "send")
OFFDIAG_TOL = 1e-8
DIAG_MIN = 1e-6


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class Program:
    """One node's behaviour in one mode.

    forward: X = x·Y.  store: silent, keeps Y.  replay: X = x·Y_stored.
    cancel: X = x·(Y − kappa·Y_stored).  send: X = Σ coef·symbol.
    ``source_mode`` names the mode whose stored signal replay/cancel use.
    """

    kind: str = "silent"
    x: float = 1.0
    kappa: float = 0.0
    source_mode: int | None = None
    streams: tuple = ()  # ((symbol, coef), ...) for send

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemeError(f"unknown program {self.kind!r}")
        if not math.isfinite(self.x) or not math.isfinite(self.kappa):
            raise SchemeError("scale factors must be finite")
        if self.kind in ("replay", "cancel") and self.source_mode is None:
            raise SchemeError(f"{self.kind} needs the mode it reads from")


SILENT = Program()


def forward(x: float = 1.0) -> Program:
    return Program("forward", x=float(x))


def send(*streams) -> Program:
    return Program("send", streams=tuple((s, float(c)) for s, c in streams))


@dataclass(frozen=True)
class Stream:
    """Symbol ``symbol`` of user ``user`` decoded at ``node`` in ``mode``."""

    symbol: str
    user: int
    mode: int
    node: str


@dataclass
class Scheme:
    modes: int
    programs: dict  # (mode, node) -> Program
    streams: tuple
    predicted_dof: tuple = (Fraction(0), Fraction(0))
    label: str = ""
    notes: dict = field(default_factory=dict)

    def program(self, mode: int, node: str) -> Program:
        return self.programs.get((mode, node), SILENT)

    def complete(self, net: LayeredNetwork) -> "Scheme":
        """Give every node an explicit program in every mode."""
        for k in range(1, self.modes + 1):
            for v in net.nodes:
                self.programs.setdefault((k, v), SILENT)
        return self

    def active(self, mode: int) -> set:
        return {v for (k, v), p in self.programs.items() if k == mode and p.kind != "silent"}


def check_scheme(net: LayeredNetwork, scheme: Scheme, mode_lengths=None) -> None:
    """Structural contract: equal mode lengths, programs on known nodes,
    replay only after a store, sends only at sources."""
    if scheme.modes not in (1, 2):
        raise SchemeError("a scheme has one or two modes")
    if mode_lengths is not None and len(set(mode_lengths)) > 1:
        raise SchemeError("modes must last for the same number of time steps")
    stored = set()
    for k in range(1, scheme.modes + 1):
        for v in net.nodes:
            p = scheme.program(k, v)
            if p.kind == "send" and v not in net.sources:
                raise SchemeError(f"{v} sends but is not a source")
            if p.kind in ("replay", "cancel"):
                if (v, p.source_mode) not in stored or p.source_mode >= k:
                    raise SchemeError(f"{v} reads mode {p.source_mode} without storing it earlier")
            if p.kind == "store":
                stored.add((v, k))
    for (k, v) in scheme.programs:
        if v not in net.index or not 1 <= k <= scheme.modes:
            raise SchemeError(f"program for unknown node or mode ({k}, {v})")
    for s in scheme.streams:
        if s.node not in net.index or not 1 <= s.mode <= scheme.modes:
            raise SchemeError(f"stream {s.symbol} decoded at unknown node or mode")


# -- text format -------------------------------------------------------------------------
def _num(x: float) -> str:
    return repr(float(x))


def serialize_scheme(scheme: Scheme) -> str:
    d1, d2 = scheme.predicted_dof
    lines = [f"modes {scheme.modes}", f"predicted {d1} {d2}"]
    if scheme.label:
        lines.append(f"label {scheme.label}")
    for s in scheme.streams:
        lines.append(f"stream {s.symbol} user {s.user} mode {s.mode} at {s.node}")
    for (k, v), p in sorted(scheme.programs.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        head = f"mode {k} node {v} {p.kind}"
        if p.kind in ("forward", "replay", "cancel"):
            head += f" x={_num(p.x)}"
        if p.kind == "cancel":
            head += f" kappa={_num(p.kappa)}"
        if p.kind in ("replay", "cancel"):
            head += f" from={p.source_mode}"
        if p.kind == "send":
            head += "".join(f" {s}={_num(c)}" for s, c in p.streams)
        lines.append(head)
    return "\n".join(lines) + "\n"


def parse_scheme(text: str) -> Scheme:
    modes, predicted, label = None, (Fraction(0), Fraction(0)), ""
    streams, programs = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "modes":
                modes = int(tok[1])
            elif tok[0] == "predicted":
                predicted = (Fraction(tok[1]), Fraction(tok[2]))
            elif tok[0] == "label":
                label = tok[1]
            elif tok[0] == "stream":
                _, sym, _, user, _, mode, _, node = tok
                streams.append(Stream(sym, int(user), int(mode), node))
            elif tok[0] == "mode":
                k, v, kind = int(tok[1]), tok[3], tok[4]
                if tok[2] != "node":
                    raise ValueError("expected 'node'")
                kw = dict(t.split("=", 1) for t in tok[5:])
                if kind == "send":
                    prog = Program("send", streams=tuple((s, float(c)) for s, c in kw.items()))
                else:
                    prog = Program(
                        kind,
                        x=float(kw.pop("x", 1.0)),
                        kappa=float(kw.pop("kappa", 0.0)),
                        source_mode=int(kw["from"]) if "from" in kw else None,
                    )
                if (k, v) in programs:
                    raise ValueError(f"second program for {v} in mode {k}")
                programs[(k, v)] = prog
            else:
                raise ValueError(f"unknown directive {tok[0]!r}")
        except (ValueError, IndexError, SchemeError) as exc:
            raise SchemeError(f"line {lineno}: {exc}") from None
    if modes is None:
        raise SchemeError("missing 'modes' line")
    return Scheme(modes, programs, tuple(streams), predicted, label)


# -- exact linear evaluation ---------------------------------------------------------------
@dataclass(frozen=True)
class StreamReport:
    stream: Stream
    desired: float
    interference: float  # norm of the other symbols' coefficients
    noise_var: float

    def sinr(self, alpha: float, P: float) -> float:
        return alpha * P * self.desired**2 / (alpha * P * self.interference**2 + self.noise_var)


@dataclass(frozen=True)
class TransferReport:
    symbols: tuple
    streams: tuple  # StreamReport per declared stream
    matrix: np.ndarray  # decoded streams x symbols
    alpha: float
    p0: float
    max_symbol_power: float
    off_diagonal: float
    min_diagonal: float
    passed: bool
    received: dict  # (node, mode) -> (symbol coeffs, noise coeffs)
    modes: int = 1

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def rates(self, P: float) -> tuple[float, float]:
        """(R1, R2) in bits per channel use, averaged over the modes."""
        r = [0.0, 0.0]
        for s in self.streams:
            r[s.stream.user - 1] += 0.5 * math.log2(1 + s.sinr(self.alpha, P))
        return r[0] / self.modes, r[1] / self.modes


def _noise_index(net: LayeredNetwork, modes: int) -> dict:
    idx = {}
    for k in range(1, modes + 1):
        for v in net.nodes:
            if v not in net.sources:
                idx[(v, k)] = len(idx)
    return idx


def evaluate(net: LayeredNetwork, scheme: Scheme) -> TransferReport:
    """Propagate every mode exactly and report stream coefficients, noise
    variances and a power margin that works for every P ≥ p0."""
    check_scheme(net, scheme)
    symbols = []
    for k in range(1, scheme.modes + 1):
        for s in net.sources:
            for sym, _ in scheme.program(k, s).streams:
                if sym not in symbols:
                    symbols.append(sym)
    sym_idx = {s: i for i, s in enumerate(symbols)}
    noise_idx = _noise_index(net, scheme.modes)
    ns, nn = len(symbols), len(noise_idx)
    received, stored = {}, {}
    max_a, worst = 0.0, []
    for k in range(1, scheme.modes + 1):
        tx = {}
        for layer in net.layers:
            for v in layer:
                ys, yn = np.zeros(ns), np.zeros(nn)
                for u in net.pred[v]:
                    if u in tx:
                        g = net.edges[(u, v)]
                        ys += g * tx[u][0]
                        yn += g * tx[u][1]
                if (v, k) in noise_idx:
                    yn[noise_idx[(v, k)]] += 1.0
                received[(v, k)] = (ys, yn)
                p = scheme.program(k, v)
                if p.kind == "send":
                    xs = np.zeros(ns)
                    for sym, c in p.streams:
                        xs[sym_idx[sym]] += c
                    xn = np.zeros(nn)
                elif p.kind == "forward":
                    xs, xn = p.x * ys, p.x * yn
                elif p.kind == "store":
                    stored[(v, k)] = (ys, yn)
                    continue
                elif p.kind == "replay":
                    ss, sn = stored[(v, p.source_mode)]
                    xs, xn = p.x * ss, p.x * sn
                elif p.kind == "cancel":
                    ss, sn = stored[(v, p.source_mode)]
                    xs, xn = p.x * (ys - p.kappa * ss), p.x * (yn - p.kappa * sn)
                else:
                    continue
                tx[v] = (xs, xn)
                a = float(xs @ xs)
                max_a = max(max_a, a)
                worst.append((a, float(xn @ xn)))
    alpha = 0.5 / max(1.0, max_a)
    p0 = max([n / (1.0 - alpha * a) for a, n in worst] + [1.0])
    reports, rows = [], []
    for st in scheme.streams:
        ys, yn = received[(st.node, st.mode)]
        if st.symbol not in sym_idx:
            raise SchemeError(f"stream {st.symbol} is never sent")
        j = sym_idx[st.symbol]
        other = np.delete(ys, j)
        reports.append(StreamReport(st, float(ys[j]), float(np.linalg.norm(other)), float(yn @ yn)))
        rows.append(ys)
    M = np.array(rows) if rows else np.zeros((0, ns))
    fro = float(np.linalg.norm(M))
    order = [sym_idx[s.symbol] for s in scheme.streams]
    diag = [abs(M[i, j]) for i, j in enumerate(order)]
    off = 0.0
    for i, j in enumerate(order):
        row = np.abs(M[i]).copy()
        row[j] = 0.0
        off = max(off, float(row.max()) if row.size else 0.0)
    min_diag = min(diag) if diag else 0.0
    passed = bool(diag) and off <= OFFDIAG_TOL * fro and min_diag >= DIAG_MIN
    return TransferReport(
        tuple(symbols), tuple(reports), M, alpha, p0, max_a, off, min_diag, passed,
        received, scheme.modes,
    )
