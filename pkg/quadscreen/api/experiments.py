import argparse
from typing import List

from ..models import BenchConfig, HashAggregate, Nonlinearity, Table2Config, WeakRecoveryConfig
from ..services.experiment_service import run_bench, run_fig1_surface, run_table2, run_weak_recovery_sweep
from .routing import CommandRouter, argument, emit_table, int_list, load_config

router = CommandRouter()


@router.command("fig1", help="exact correlation surface of f = C (x1 - mu1)(x2 - mu2) over bias pairs")
@argument("--grid", type=int, default=101)
@argument("--C", dest="C", type=float, default=20.0)
@argument("--gamma", type=float, default=1.0)
@argument("--sigma", choices=[s.value for s in Nonlinearity], default=Nonlinearity.SIGMOID.value)
@argument("--out", help="CSV (stdout when omitted)")
def fig1(args: argparse.Namespace) -> List[str]:
    emit_table(run_fig1_surface(args.grid, args.C, args.gamma, Nonlinearity(args.sigma)), args.out)
    return []


@router.command("sweep-weak", help="binary weak-support recovery versus sample size")
@argument("--config", help="WeakRecoveryConfig JSON")
@argument("--sizes", type=int_list, help="comma-separated sample sizes")
@argument("--polys", type=int, help="number of random polynomials")
@argument("--draws", type=int, help="(gamma, bias) draws per polynomial")
@argument("--out", help="CSV (stdout when omitted)")
def sweep_weak(args: argparse.Namespace) -> List[str]:
    cfg = load_config(
        args, WeakRecoveryConfig, sample_sizes=args.sizes, num_polys=args.polys, draws_per_poly=args.draws
    )
    emit_table(run_weak_recovery_sweep(cfg, threads=cfg.threads), args.out)
    return []


@router.command("table2", help="finite-alphabet recovery rate of the hashed test versus sample size")
@argument("--config", help="Table2Config JSON")
@argument("--sizes", type=int_list, help="comma-separated sample sizes")
@argument("--functions", type=int, help="number of random functions")
@argument("--aggregate", choices=[a.value for a in HashAggregate], help="hash aggregation")
@argument("--out", help="CSV (stdout when omitted)")
def table2(args: argparse.Namespace) -> List[str]:
    cfg = load_config(
        args, Table2Config, sample_sizes=args.sizes, num_functions=args.functions, aggregate=args.aggregate
    )
    emit_table(run_table2(cfg, threads=cfg.threads), args.out)
    return []


@router.command("bench", help="wall time of both screening tests as p and n double")
@argument("--config", help="BenchConfig JSON")
@argument("--p-list", type=int_list, help="comma-separated feature counts")
@argument("--sizes", type=int_list, help="comma-separated sample sizes")
@argument("--trials", type=int, help="timed repetitions per point")
@argument("--out", help="CSV (stdout when omitted)")
def bench(args: argparse.Namespace) -> List[str]:
    cfg = load_config(args, BenchConfig, p_list=args.p_list, sample_sizes=args.sizes, trials=args.trials)
    frame = run_bench(cfg)
    emit_table(frame, args.out)
    ratios = frame[frame["kind"] == "ratio"]
    if ratios.empty:
        return []
    outside = ratios[~ratios["within_band"].astype(bool)]
    return [f"{len(outside)} doubling ratios outside the linear-scaling band"] if len(outside) else []
