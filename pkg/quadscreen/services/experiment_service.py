"""Scripted experiment runners. Each returns a DataFrame of raw per-trial rows
plus aggregate rows; every trial owns a seed derived from (master seed, trial)."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np
import pandas as pd

from ..config.settings import SCALING_BAND, THREADS
from ..models import (
    Alphabet, BenchConfig, Dataset, GenerativeModel, HashAggregate, LinTerm, Nonlinearity, QuadPoly,
    QuadTerm, ScreenConfig, Table2Config, WeakRecoveryConfig,
)
from .generative_service import (
    binary_model, finite_model, random_biases, random_quad_poly, random_simplex_pmfs, sample_dataset,
)
from .linear_screen_service import correlation_scores, select_weak_support
from .nonlinear_screen_service import make_hash_family, nonlinear_scores, select_weak_support_nl
from .oracle_service import population_correlation

logger = logging.getLogger(__name__)


def trial_seed(master: int, *keys: int) -> int:
    return int(np.random.SeedSequence([master, *keys]).generate_state(1)[0])


def fig1_model(
    p1: float, p2: float, C: float = 20.0, gamma: float = 1.0, sigma: Nonlinearity = Nonlinearity.SIGMOID
) -> GenerativeModel:
    """f = C (x1 - mu1)(x2 - mu2) over two +-1 variables with biases (p1, p2)."""
    mu1, mu2 = 2.0 * p1 - 1.0, 2.0 * p2 - 1.0
    poly = QuadPoly(
        quad_terms=(QuadTerm(i=0, j=1, beta=C),),
        lin_terms=tuple(t for t in (LinTerm(j=0, alpha=-C * mu2), LinTerm(j=1, alpha=-C * mu1)) if t.alpha != 0.0),
        constant=C * mu1 * mu2,
    )
    return binary_model(poly, 2, [p1, p2], gamma, sigma)


def run_fig1_surface(
    grid: int = 101, C: float = 20.0, gamma: float = 1.0, sigma: Nonlinearity = Nonlinearity.SIGMOID
) -> pd.DataFrame:
    """Exact E[Y (X_k - mu_k)] for k = 1, 2 at the cell midpoints of a
    ``grid`` x ``grid`` partition of [0, 1]^2; an odd grid puts a row on 1/2."""
    axis = (np.arange(grid) + 0.5) / grid
    rows = []
    for p1 in axis:
        for p2 in axis:
            model = fig1_model(float(p1), float(p2), C, gamma, sigma)
            rows.append((p1, p2, population_correlation(model, 0), population_correlation(model, 1)))
    logger.info(f"fig1 surface: {grid} x {grid} grid, C={C}, gamma={gamma}")
    return pd.DataFrame(rows, columns=["p1", "p2", "corr_x1", "corr_x2"])


def run_weak_recovery_sweep(cfg: WeakRecoveryConfig, threads: int = THREADS) -> pd.DataFrame:
    """Binary weak-support recovery with the linear test and TopK(k = r)."""
    trials = [(q, d) for q in range(cfg.num_polys) for d in range(cfg.draws_per_poly)]
    polys = {
        q: random_quad_poly(cfg.p, cfg.num_lin, cfg.num_quad, cfg.r, cfg.coeff_range, trial_seed(cfg.seed, q))
        for q in range(cfg.num_polys)
    }
    select = ScreenConfig.top_k(cfg.r, normalize=cfg.normalize)

    def run_trial(trial: Tuple[int, int]) -> List[Dict]:
        q, d = trial
        seed = trial_seed(cfg.seed, q, d)
        rng = np.random.default_rng(seed)
        gamma = float(rng.uniform(*cfg.gamma_range))
        biases = random_biases(cfg.p, cfg.bias_ranges, seed)
        model = binary_model(polys[q], cfg.p, biases, gamma, seed=seed)
        truth = set(polys[q].variables())
        full = sample_dataset(model, max(cfg.sample_sizes), seed, threads=1)
        out = []
        for n in cfg.sample_sizes:
            data = full.subset_rows(np.arange(n))
            weak = set(select_weak_support(correlation_scores(data, cfg.normalize, threads=1), select))
            hit = len(weak & truth)
            out.append(dict(
                row="trial", poly=q, draw=d, n=n, k=cfg.r, gamma=gamma, recovered=hit, true_size=len(truth),
                fraction=hit / len(truth), all_but_two=hit >= len(truth) - 2,
            ))
        return out

    rows = _run_pool(run_trial, trials, threads)
    trials_frame = pd.DataFrame(rows)
    aggregate = (
        trials_frame.groupby("n", sort=True)
        .agg(fraction=("fraction", "mean"), all_but_two=("all_but_two", "mean"), trials=("fraction", "size"))
        .reset_index()
        .assign(row="aggregate", k=cfg.r)
    )
    for _, agg in aggregate.iterrows():
        logger.info(f"n={agg.n}: mean fraction {agg.fraction:.3f}, Pr[all but 2] {agg.all_but_two:.3f}")
    return pd.concat([trials_frame, aggregate], ignore_index=True)


def table2_model(cfg: Table2Config, seed: int) -> GenerativeModel:
    """Every quadratic term (squares included) over a random support, pmfs
    uniform on the simplex, sigmoid with unit scaling."""
    s = cfg.support_size
    num_quad = s * (s + 1) // 2 if cfg.include_squares else s * (s - 1) // 2
    poly = random_quad_poly(cfg.p, 0, num_quad, s, cfg.coeff_range, seed, include_squares=cfg.include_squares)
    alphabet = Alphabet(values=cfg.alphabet)
    pmfs = random_simplex_pmfs(cfg.p, alphabet.size, seed)
    return finite_model(poly, [alphabet] * cfg.p, pmfs, gamma=1.0, seed=seed)


def run_table2(cfg: Table2Config, threads: int = THREADS) -> pd.DataFrame:
    select = ScreenConfig.top_k(cfg.top_k)
    alphabet = Alphabet(values=cfg.alphabet)

    def run_trial(t: int) -> List[Dict]:
        seed = trial_seed(cfg.seed, t)
        model = table2_model(cfg, seed)
        truth = set(model.relevant_variables())
        family = make_hash_family(alphabet, cfg.hashes, cfg.hash_range, seed)
        full = sample_dataset(model, max(cfg.sample_sizes), seed, threads=1)
        out = []
        for n in cfg.sample_sizes:
            scores = nonlinear_scores(full.subset_rows(np.arange(n)), family, cfg.aggregate)
            hit = len(set(select_weak_support_nl(scores, select)) & truth)
            out.append(dict(
                row="trial", function=t, n=n, k=cfg.top_k, recovered=hit, true_size=len(truth),
                rate=hit / len(truth), aggregate=cfg.aggregate.value,
            ))
        return out

    trials_frame = pd.DataFrame(_run_pool(run_trial, range(cfg.num_functions), threads))
    aggregate = (
        trials_frame.groupby("n", sort=True)
        .agg(rate=("rate", "mean"), trials=("rate", "size"))
        .reset_index()
        .assign(row="aggregate", k=cfg.top_k, aggregate=cfg.aggregate.value)
    )
    for _, agg in aggregate.iterrows():
        logger.info(f"n={agg.n}: mean recovery rate {agg.rate:.3f} over {agg.trials} functions")
    return pd.concat([trials_frame, aggregate], ignore_index=True)


def padded_model(model: GenerativeModel, irrelevant: int, seed: int) -> GenerativeModel:
    """``model`` plus ``irrelevant`` extra variables on the first variable's
    alphabet with random simplex pmfs."""
    alphabet = model.alphabets[0]
    pmfs = random_simplex_pmfs(irrelevant, alphabet.size, seed)
    return model.with_updates(
        p=model.p + irrelevant,
        alphabets=tuple(model.alphabets) + (alphabet,) * irrelevant,
        marginals=tuple(model.marginals) + tuple(tuple(m) for m in pmfs),
    )


def run_nonlinear_example(
    model: GenerativeModel,
    n: int,
    trials: int,
    seed: int,
    target: int = 0,
    irrelevant: int = 50,
    hashes: int = 10,
    hash_range: int = 1000,
    aggregate: HashAggregate = HashAggregate.ABSOLUTE,
    threads: int = THREADS,
) -> pd.DataFrame:
    """Per trial: the hashed score of ``target`` against the best irrelevant variable.

    Aggregation defaults to ABSOLUTE: over random hash tables the signed
    per-hash correlations of one column average to zero."""
    padded = padded_model(model, irrelevant, seed)
    relevant = set(model.relevant_variables())
    noise = [v for v in range(padded.p) if v not in relevant]

    def run_trial(t: int) -> List[Dict]:
        s = trial_seed(seed, t)
        data = sample_dataset(padded, n, s, threads=1)
        family = make_hash_family(padded.alphabets[target], hashes, hash_range, s)
        c = nonlinear_scores(data, family, aggregate).c
        best_noise = float(c[noise].max())
        return [dict(
            trial=t, n=n, target_score=float(c[target]), max_irrelevant=best_noise,
            beats_irrelevant=bool(c[target] > best_noise), rank=int((c > c[target]).sum()) + 1,
        )]

    frame = pd.DataFrame(_run_pool(run_trial, range(trials), threads))
    logger.info(f"x{target} beats every irrelevant variable in {int(frame.beats_irrelevant.sum())}/{trials} trials")
    return frame


def run_bench(cfg: BenchConfig) -> pd.DataFrame:
    """Median wall time of both screening tests per (p, n), then doubling
    ratios checked against the linear-scaling band."""
    alphabet = Alphabet(values=tuple(float(v) for v in range(1, cfg.alphabet_size + 1)))
    family = make_hash_family(alphabet, cfg.hashes, seed=cfg.seed)
    rows = []
    for p in cfg.p_list:
        for n in cfg.sample_sizes:
            rng = np.random.default_rng([cfg.seed, p, n])
            binary = Dataset(x=rng.choice((-1, 1), size=(n, p)).astype(np.int8), y=rng.integers(0, 2, n))
            finite = Dataset(
                x=rng.choice(alphabet.as_array(), size=(n, p)), y=rng.integers(0, 2, n),
                alphabets=(alphabet,) * p,
            )
            timings = {
                "linear": _median_time(lambda: correlation_scores(binary, normalize=True, threads=1), cfg.trials),
                "nonlinear": _median_time(lambda: nonlinear_scores(finite, family), cfg.trials),
            }
            for method, seconds in timings.items():
                rows.append(dict(kind="time", method=method, p=p, n=n, seconds=seconds))
    times = pd.DataFrame(rows)
    ratios = _doubling_ratios(times, "p", cfg.p_list) + _doubling_ratios(times, "n", cfg.sample_sizes)
    for ratio in ratios:
        if not ratio["within_band"]:
            logger.warning(
                f"{ratio['method']} time ratio {ratio['ratio']:.2f} for {ratio['axis']} doubling "
                f"outside {SCALING_BAND}"
            )
    return pd.concat([times, pd.DataFrame(ratios)], ignore_index=True)


def _doubling_ratios(times: pd.DataFrame, axis: str, values: List[int]) -> List[Dict]:
    other = "n" if axis == "p" else "p"
    ratios = []
    for small, large in zip(values, values[1:]):
        if large != 2 * small:
            continue
        for (method, fixed), group in times.groupby(["method", other]):
            lookup = group.set_index(axis)["seconds"]
            ratio = float(lookup[large] / lookup[small]) if lookup[small] > 0 else float("inf")
            ratios.append(dict(
                kind="ratio", method=method, axis=axis, **{other: fixed, axis: large}, ratio=ratio,
                within_band=bool(SCALING_BAND[0] <= ratio <= SCALING_BAND[1]),
            ))
    return ratios


def _median_time(fn: Callable[[], object], trials: int) -> float:
    fn()  # warm-up
    samples = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def _run_pool(fn: Callable[..., List[Dict]], items: Iterable, threads: int) -> List[Dict]:
    items = list(items)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, items))
    else:
        results = [fn(item) for item in items]
    return [row for rows in results for row in rows]
