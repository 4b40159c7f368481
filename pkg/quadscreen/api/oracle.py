import argparse
from typing import List

from ..services.data_io_service import read_model_json
from ..services.oracle_service import (
    check_usp, enumerate_values, gamma_measure_check, population_correlation, usp_holds,
)
from .routing import CommandRouter, argument, emit_json

router = CommandRouter()


@router.command("oracle", help="exact population quantities of a model by enumeration")
@argument("--model", required=True, help="model JSON")
@argument("--var", type=int, required=True, help="variable index k")
@argument("--gamma-scan", type=int, help="grid size for the good-gamma measure check")
@argument("--out", help="JSON report (stdout when omitted)")
def oracle(args: argparse.Namespace) -> List[str]:
    model = read_model_json(args.model)
    profile = enumerate_values(model, args.var)
    report = {
        "var": args.var,
        "values": profile.values.tolist(),
        "probs": profile.probs.tolist(),
        "has_zero": profile.has_zero,
        "influences": profile.influences.tolist() if profile.influences is not None else None,
        "zero_influence": profile.zero_influence,
        "correlation": population_correlation(model, args.var),
        "usp": None,
        "measure_check": None,
    }
    warnings = []
    if model.is_binary:
        usp = check_usp(model.poly)
        report["usp"] = {
            "entries": [e.model_dump() for e in usp.entries],
            "holds": usp_holds(model.poly, args.var) if args.var in model.relevant_variables() else None,
        }
    if args.gamma_scan is not None:
        check = gamma_measure_check(model, args.var, args.gamma_scan)
        report["measure_check"] = {**check.model_dump(), "satisfied": check.satisfied}
        if not check.satisfied:
            warnings.append(f"good-gamma measure {check.measure:.3g} below {check.required_measure:.3g}")
    emit_json(report, args.out)
    return warnings
