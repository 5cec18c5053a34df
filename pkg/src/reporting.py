"""
Report structures and renderers.

Every command result is first turned into a plain dict; the text table and
the JSON document are both rendered from that dict.
"""

import json
from fractions import Fraction

from src import __version__
from src.model import FORMAT_VERSION, format_number


def _number(value):
    if isinstance(value, Fraction):
        return format_number(value)
    return value


def _estimate_dict(est):
    return {
        "verdict": est.kind.value,
        "degree": est.degree,
        "estimate": est.describe(),
        "provenance": est.provenance,
    }


def _header(kind, digest=None):
    data = {"tool": "vassclass", "version": __version__, "format_version": FORMAT_VERSION, "kind": kind}
    if digest is not None:
        data["model_sha256"] = digest
    return data


def report_to_dict(report):
    """EstimateReport or McVerdict -> dict."""
    data = _header(report.kind, report.model_digest)
    data["length"] = _estimate_dict(report.length) if report.length is not None else None
    data["counters"] = {c: _estimate_dict(est) for c, est in report.counters.items()}
    data["transitions"] = {t: _estimate_dict(est) for t, est in report.transitions.items()}
    if report.kind == "mdp":
        data["trace"] = report.trace
        data["notes"] = list(report.notes)
        data["solver"] = report.stats
        data["cap"] = report.cap
        data["zb_mode"] = report.zb_mode
    else:
        data["witnesses"] = [
            {
                "mec": w["mec"],
                "center": w["center"],
                "flow": {tid: _number(v) for tid, v in w["flow"].items()},
                "c_plus": w["c_plus"],
            }
            for w in report.witnesses
        ]
    data["exit_status"] = report.exit_status
    return data


def estimate_to_dict(observable, est):
    data = _header("observable")
    data["target"] = observable.label
    data["estimate"] = _estimate_dict(est)
    return data


def simulation_to_dict(fp):
    data = _header("simulation")
    data.update(fp.as_dict())
    return data


def mec_to_dict(m, decomposition):
    data = _header("mec")
    data["mecs"] = [
        {"states": list(mec.states), "transitions": list(mec.transitions)} for mec in decomposition.mecs
    ]
    data["transient_states"] = [s for s in m.state_names if decomposition.membership.get(s) is None]
    return data


def decomposition_to_dict(x, terms):
    data = _header("decomposition")
    data["x"] = {tid: _number(v) for tid, v in zip(x.model.transition_ids, x.flow)}
    data["terms"] = [
        {
            "coefficient": _number(a),
            "center": y.center,
            "selection": dict(y.selection),
            "flow": {tid: _number(y.flow[tid]) for tid in y.support},
        }
        for a, y in terms
    ]
    return data


def validation_to_dict(results):
    data = _header("validation")
    data["items"] = [
        {
            "target": item.label,
            "estimate": item.verdict,
            "status": item.status,
            "slope": item.slope,
            "strategy": item.strategy,
            "detail": item.detail,
            "fits": item.estimates,
        }
        for item in results
    ]
    return data


def model_check_to_dict(result, path):
    data = _header("validate")
    data["path"] = path
    data["violations"] = result["violations"]
    data["summary"] = result["summary"]
    return data


def render_json(data):
    if not isinstance(data, dict):
        data = report_to_dict(data)
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _estimate_rows(data):
    rows = []
    if data.get("length") is not None:
        rows.append(("length", data["length"]))
    rows.extend((f"counter:{c}", est) for c, est in data["counters"].items())
    rows.extend((f"transition:{t}", est) for t, est in data["transitions"].items())
    return rows


def _table(rows):
    if not rows:
        return []
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    return ["  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]


def _render_estimates(data):
    lines = [f"vassclass {data['version']} ({data['kind']})", f"model sha256: {data['model_sha256']}", ""]
    rows = [("target", "estimate", "provenance")]
    rows += [(label, est["estimate"], est["provenance"]) for label, est in _estimate_rows(data)]
    lines += _table(rows)
    if data["kind"] == "mdp":
        lines.append("")
        for step in data["trace"]:
            if "k" in step:
                lines.append(
                    f"k={step['k']}: A={step['A']} B={step['B']} X={step['X']} "
                    f"T'={step['T_prime']} t*={step['t_star']}"
                )
            else:
                lines.append(f"exponential phase on layer {step['layer']}: scheme={step['scheme']} ({step['zb_mode']})")
        for note in data["notes"]:
            lines.append(f"note: {note}")
        solver = data["solver"]
        lines.append(f"solver: {solver['lp_solves']} LP solve(s), {solver['pivots']} pivot(s)")
    else:
        for w in data["witnesses"]:
            lines.append("")
            lines.append(f"component on {w['mec']} centered at {w['center']}, C+ = {w['c_plus']}")
    return lines


def render_text(data):
    if not isinstance(data, dict):
        data = report_to_dict(data)
    kind = data["kind"]
    if kind in ("mdp", "markov-chain"):
        lines = _render_estimates(data)
    elif kind == "observable":
        lines = [f"{data['target']}: {data['estimate']['estimate']} ({data['estimate']['provenance']})"]
    elif kind == "simulation":
        lines = [f"{data['observable']} under {data['strategy']}, p={data['p']}, {data['trials']} trials"]
        rows = [("n", "quantile", "censored")]
        rows += [(p["n"], "inf" if p["quantile"] is None else f"{p['quantile']:g}", p["censored"]) for p in data["points"]]
        lines += _table(rows)
        if data["slope"] is not None:
            lines.append(f"slope {data['slope']:.3f} ± {data['stderr']:.3f}")
    elif kind == "mec":
        lines = []
        for i, mec in enumerate(data["mecs"], start=1):
            lines.append(f"MEC {i}: states {' '.join(mec['states'])}; transitions {' '.join(mec['transitions'])}")
        if data["transient_states"]:
            lines.append(f"transient: {' '.join(data['transient_states'])}")
    elif kind == "decomposition":
        lines = [f"x = {data['x']}"]
        for term in data["terms"]:
            lines.append(f"  {term['coefficient']} * component at {term['center']} {term['flow']}")
    elif kind == "validation":
        rows = [("target", "estimate", "status", "slope", "detail")]
        rows += [
            (item["target"], item["estimate"], item["status"],
             "" if item["slope"] is None else f"{item['slope']:.3f}", item["detail"])
            for item in data["items"]
        ]
        lines = _table(rows)
    elif kind == "validate":
        lines = [f"{data['path']}: {data['summary']}"]
        for v in data["violations"]:
            where = f"line {v['line']}: " if v.get("line") else ""
            lines.append(f"  {where}{v['message']} [{v['code']}]")
    else:
        raise ValueError(f"unknown report kind {kind!r}")
    return "\n".join(lines) + "\n"
