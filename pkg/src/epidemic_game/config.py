"""Scenario configuration: JSON parsing, validation, canonical form and digest.

A config is a JSON object with the sections ``graph``, ``profile``,
``utility``, ``strategy``, ``monitoring`` and ``analysis``.  Scalars may stand
for per-node or per-edge values; probabilities may be numbers or decimal
strings.  ``canonicalize`` expands everything into one explicit form so that
equal scenarios hash equally.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np

from .epidemic import ForwardProfile
from .errors import ConfigError, EpidemicGameError, UnpunishableNode
from .game import Scenario, UtilityParams
from .graph import INF, SOURCE, DelayModelConfig, OverlayGraph, build_graph, compute_delays
from .strategy import GRIM, PRIVATE, PUBLIC, DurationPolicy, ReactionSetConfig, coordinated_durations

SECTIONS = ("graph", "profile", "utility", "strategy", "monitoring", "analysis")
ANALYSIS_DEFAULTS = {"history_depth": 2, "max_lag": 5, "trials": 10000, "seed": 0,
                     "tolerance": 1e-9, "targets": None}
U64 = 2 ** 64


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _obj(x, path) -> dict:
    if not isinstance(x, dict):
        _fail(path, "expected an object")
    return x


def _int(x, path, lo=None, hi=None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        _fail(path, f"expected an integer, got {x!r}")
    if lo is not None and x < lo or hi is not None and x >= hi:
        _fail(path, f"{x} out of range")
    return x


def _num(x, path) -> float:
    if isinstance(x, bool):
        _fail(path, f"expected a number, got {x!r}")
    if isinstance(x, str):
        try:
            v = float(x)
        except ValueError:
            _fail(path, f"expected a decimal string, got {x!r}")
    elif isinstance(x, (int, float)):
        v = float(x)
    else:
        _fail(path, f"expected a number, got {x!r}")
    if not math.isfinite(v):
        _fail(path, "must be finite")
    return v


def _per_node(x, n, path) -> list[float]:
    if isinstance(x, list):
        if len(x) != n:
            _fail(path, f"expected {n} values, got {len(x)}")
        return [_num(v, f"{path}[{k}]") for k, v in enumerate(x)]
    return [_num(x, path)] * n


def _node(x, n, path, allow_source=False) -> int:
    if allow_source and x == "s":
        return SOURCE
    return _int(x, path, -1 if allow_source else 0, n)


def _unknown(section: dict, allowed, path):
    extra = sorted(set(section) - set(allowed))
    if extra:
        _fail(path, f"unknown field(s) {extra}")


def canonicalize(raw: Any) -> dict:
    """Validate a parsed JSON tree and expand it into the canonical form."""
    raw = _obj(raw, "$")
    _unknown(raw, SECTIONS, "$")
    gsec = _obj(raw.get("graph"), "graph")
    _unknown(gsec, ("nodes", "edges", "source_targets", "delay_overrides"), "graph")
    n = _int(gsec.get("nodes"), "graph.nodes", 1)
    edges_raw = gsec.get("edges", [])
    if not isinstance(edges_raw, list):
        _fail("graph.edges", "expected a list")
    edges = []
    for k, e in enumerate(edges_raw):
        if not isinstance(e, list) or len(e) != 2:
            _fail(f"graph.edges[{k}]", "expected [u, v]")
        edges.append([_node(e[0], n, f"graph.edges[{k}][0]"), _node(e[1], n, f"graph.edges[{k}][1]")])
    st = gsec.get("source_targets")
    if not isinstance(st, list) or not st:
        _fail("graph.source_targets", "expected a non-empty list")
    targets = sorted(_node(t, n, f"graph.source_targets[{k}]") for k, t in enumerate(st))
    overrides = []
    msec = _obj(raw.get("monitoring", {}), "monitoring")
    _unknown(msec, ("mode", "delay_model", "overrides"), "monitoring")
    for where, lst in (("graph.delay_overrides", gsec.get("delay_overrides", [])),
                       ("monitoring.overrides", msec.get("overrides", []))):
        if not isinstance(lst, list):
            _fail(where, "expected a list")
        for k, o in enumerate(lst):
            p = f"{where}[{k}]"
            o = _obj(o, p)
            _unknown(o, ("observer", "accused", "victim", "delay"), p)
            d = o.get("delay")
            d = "inf" if d == "inf" else _int(d, f"{p}.delay", 0)
            overrides.append({"observer": _node(o.get("observer"), n, f"{p}.observer", True),
                              "accused": _node(o.get("accused"), n, f"{p}.accused"),
                              "victim": _node(o.get("victim"), n, f"{p}.victim"),
                              "delay": d})
    overrides.sort(key=lambda o: (o["observer"], o["accused"], o["victim"]))

    psec = _obj(raw.get("profile"), "profile")
    _unknown(psec, ("source_probs", "node_probs"), "profile")
    sp = psec.get("source_probs")
    if isinstance(sp, list):
        sp_vals = _per_node(sp, n, "profile.source_probs")
    else:
        v = _num(sp, "profile.source_probs")
        sp_vals = [v if i in targets else 0.0 for i in range(n)]
    npr = psec.get("node_probs")
    probs = {}
    if isinstance(npr, list):
        for k, e in enumerate(npr):
            if not isinstance(e, list) or len(e) != 3:
                _fail(f"profile.node_probs[{k}]", "expected [u, v, p]")
            u = _node(e[0], n, f"profile.node_probs[{k}][0]")
            w = _node(e[1], n, f"profile.node_probs[{k}][1]")
            probs[(u, w)] = _num(e[2], f"profile.node_probs[{k}][2]")
        for u, w in edges:
            if (u, w) not in probs:
                _fail("profile.node_probs", f"missing probability for edge ({u},{w})")
    else:
        v = _num(npr, "profile.node_probs")
        probs = {(u, w): v for u, w in edges}

    usec = _obj(raw.get("utility"), "utility")
    _unknown(usec, ("beta", "gamma", "omega"), "utility")
    util = {k: _per_node(usec.get(k, 1.0 if k == "gamma" else None), n, f"utility.{k}")
            for k in ("beta", "gamma", "omega")}

    ssec = _obj(raw.get("strategy", {}), "strategy")
    _unknown(ssec, ("reaction_mode", "tau", "coordinated", "custom_reaction_sets"), "strategy")
    mode = ssec.get("reaction_mode", "full_indirect")
    if mode not in ("direct", "full_indirect", "custom"):
        _fail("strategy.reaction_mode", f"unknown mode {mode!r}")
    tau = ssec.get("tau", 3)
    if tau != "grim":
        tau = _int(tau, "strategy.tau", 1)
    coordinated = ssec.get("coordinated", False)
    if not isinstance(coordinated, bool):
        _fail("strategy.coordinated", "expected true or false")
    custom = []
    for k, c in enumerate(ssec.get("custom_reaction_sets", [])):
        p = f"strategy.custom_reaction_sets[{k}]"
        c = _obj(c, p)
        _unknown(c, ("accused", "victim", "members"), p)
        members = c.get("members")
        if not isinstance(members, list):
            _fail(f"{p}.members", "expected a list")
        custom.append({"accused": _node(c.get("accused"), n, f"{p}.accused"),
                       "victim": _node(c.get("victim"), n, f"{p}.victim"),
                       "members": sorted({_node(m, n, f"{p}.members", True) for m in members})})
    custom.sort(key=lambda c: (c["accused"], c["victim"]))

    mon = msec.get("mode", PUBLIC)
    if mon not in (PUBLIC, PRIVATE):
        _fail("monitoring.mode", f"unknown mode {mon!r}")
    dmodel = msec.get("delay_model", "hops")
    if dmodel not in ("hops", "zero"):
        _fail("monitoring.delay_model", f"unknown delay model {dmodel!r}")

    asec = _obj(raw.get("analysis", {}), "analysis")
    _unknown(asec, ANALYSIS_DEFAULTS, "analysis")
    analysis = dict(ANALYSIS_DEFAULTS)
    analysis.update(asec)
    analysis["history_depth"] = _int(analysis["history_depth"], "analysis.history_depth", 0, 3)
    analysis["max_lag"] = _int(analysis["max_lag"], "analysis.max_lag", 1)
    analysis["trials"] = _int(analysis["trials"], "analysis.trials", 1)
    analysis["seed"] = _int(analysis["seed"], "analysis.seed", 0, U64)
    analysis["tolerance"] = _num(analysis["tolerance"], "analysis.tolerance")
    if analysis["targets"] is not None:
        if not isinstance(analysis["targets"], list):
            _fail("analysis.targets", "expected a list")
        analysis["targets"] = sorted({_node(t, n, "analysis.targets") for t in analysis["targets"]})

    return {
        "graph": {"nodes": n, "edges": sorted(edges), "source_targets": targets},
        "profile": {"source_probs": sp_vals,
                    "node_probs": [[u, w, probs[(u, w)]] for u, w in sorted(probs)]},
        "utility": util,
        "strategy": {"reaction_mode": mode, "tau": tau, "coordinated": coordinated,
                     "custom_reaction_sets": custom},
        "monitoring": {"mode": mon, "delay_model": dmodel, "overrides": overrides},
        "analysis": analysis,
    }


def serialize(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


def parse(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})") from exc
    return canonicalize(raw)


def load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def digest(cfg: dict) -> str:
    blob = json.dumps(canonicalize(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def build_reliability_inputs(cfg: dict) -> tuple[OverlayGraph, ForwardProfile]:
    """Graph and baseline profile only; p_s = 1 is admitted for reliability queries."""
    g_sec = cfg["graph"]
    n = g_sec["nodes"]
    try:
        g = build_graph([tuple(e) for e in g_sec["edges"]], g_sec["source_targets"], n)
        npr = np.zeros((n, n))
        for u, w, p in cfg["profile"]["node_probs"]:
            npr[u, w] = p
        profile = ForwardProfile(np.array(cfg["profile"]["source_probs"]), npr)
        profile.validate(g, certain_source=True)
    except EpidemicGameError as exc:
        raise ConfigError(f"scenario: {exc}") from exc
    return g, profile


def build_scenario(cfg: dict) -> Scenario:
    """Turn a canonical config into a Scenario; model errors surface as ConfigError."""
    g_sec, m_sec, s_sec = cfg["graph"], cfg["monitoring"], cfg["strategy"]
    n = g_sec["nodes"]
    try:
        g = build_graph([tuple(e) for e in g_sec["edges"]], g_sec["source_targets"], n)
        npr = np.zeros((n, n))
        for u, w, p in cfg["profile"]["node_probs"]:
            npr[u, w] = p
        profile = ForwardProfile(np.array(cfg["profile"]["source_probs"]), npr)
        u = cfg["utility"]
        params = UtilityParams(u["beta"], u["gamma"], u["omega"])
        custom = {(c["accused"], c["victim"]): frozenset(c["members"]) for c in s_sec["custom_reaction_sets"]}
        rs = ReactionSetConfig(s_sec["reaction_mode"], custom)
        tau = GRIM if s_sec["tau"] == "grim" else s_sec["tau"]
        delays = None
        if m_sec["mode"] == PRIVATE:
            ov = {(o["observer"], o["accused"], o["victim"]): INF if o["delay"] == "inf" else o["delay"]
                  for o in m_sec["overrides"]}
            delays = compute_delays(g, DelayModelConfig(m_sec["delay_model"], ov))
        coordinated = s_sec["coordinated"] and m_sec["mode"] == PRIVATE
        durations = coordinated_durations(g, delays, tau) if coordinated else DurationPolicy(tau)
        return Scenario(g, profile, params, m_sec["mode"], rs, durations, delays, coordinated)
    except (ConfigError, UnpunishableNode):
        raise
    except EpidemicGameError as exc:
        raise ConfigError(f"scenario: {exc}") from exc
