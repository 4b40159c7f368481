"""Exact population computations by enumerating assignments of the relevant
variables. Irrelevant variables never change f, so they are marginalized
analytically; the enumeration runs in bounded assignment blocks."""
import logging
import math
from itertools import combinations
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import ENUMERATION_BLOCK, ENUMERATION_MAX_ASSIGNMENTS, GAMMA_GRID, VALUE_TOL
from ..exceptions import EnumerationBudgetError, HypothesisViolation, ModelError
from ..models import (
    GenerativeModel, MeasureCheck, Nonlinearity, PairCheck, QuadPoly, UspEntry, UspReport, ValueProfile,
)
from .generative_service import apply_sigma, eval_poly_batch, min_signed_sum

logger = logging.getLogger(__name__)

_CURVE_CHUNK = 4096


def enumerate_values(model: GenerativeModel, k: int) -> ValueProfile:
    """Distinct nonzero values of f with their probabilities; for a binary
    variable k also the conditionals given x_k = +-1 and the influences."""
    _check_index(model, k)
    variables = list(model.relevant_variables())
    f, codes = _enumerate_f(model, variables)
    weights = _weights(model, variables, codes)
    groups, reps = _group_values(f)
    num_groups = reps.shape[0]
    probs = np.bincount(groups, weights=weights, minlength=num_groups)
    zero = np.abs(reps) < VALUE_TOL
    nonzero = np.flatnonzero(~zero)
    order = nonzero[np.argsort(np.abs(reps[nonzero]), kind="stable")]
    zero_group = np.flatnonzero(zero)

    def split(dist: np.ndarray) -> Tuple[np.ndarray, float]:
        return dist[order], float(dist[zero_group].sum())

    values = reps[order]
    marginal, zero_prob = split(probs)
    fields = dict(k=k, values=values, has_zero=bool(zero_group.size), probs=marginal, zero_prob=zero_prob)

    if model.alphabets[k].is_binary:
        if k in variables:
            q = variables.index(k)
            partial = _weights(model, variables, codes, skip=q)
            plus = np.bincount(groups, weights=partial * (codes[:, q] == 1), minlength=num_groups)
            minus = np.bincount(groups, weights=partial * (codes[:, q] == 0), minlength=num_groups)
        else:
            plus = minus = probs
        probs_plus, zero_plus = split(plus)
        probs_minus, zero_minus = split(minus)
        fields.update(
            probs_plus=probs_plus, probs_minus=probs_minus, zero_plus=zero_plus, zero_minus=zero_minus,
            influences=probs_plus - probs_minus, zero_influence=zero_plus - zero_minus,
        )
    logger.debug(f"value profile for x{k}: m={values.shape[0]} over r={len(variables)} variables")
    return ValueProfile(**fields)


def population_correlation(model: GenerativeModel, k: int) -> float:
    """E[Y (X_k - mu_k)]; through the influence expansion
    2 p (1 - p) [sigma(0) g(0) + sum_i sigma(gamma v_i) g(v_i)] for binary k,
    by direct expectation otherwise."""
    _check_index(model, k)
    if not model.alphabets[k].is_binary:
        return direct_correlation(model, k)
    return float(population_correlation_curve(model, k, [model.gamma])[0])


def population_correlation_curve(model: GenerativeModel, k: int, gammas: Sequence[float]) -> np.ndarray:
    """The influence expansion of the exact correlation at every gamma."""
    _check_index(model, k)
    if not model.alphabets[k].is_binary:
        raise ModelError("NON_BINARY", f"variable {k} is not +-1; the influence expansion needs a binary variable")
    profile = enumerate_values(model, k)
    bias = float(model.marginals[k][1])
    scale = 2.0 * bias * (1.0 - bias)
    zero_term = float(apply_sigma(model.sigma, 0.0)) * profile.zero_influence
    gammas = np.asarray(gammas, dtype=float)
    out = np.empty(gammas.shape[0])
    for start in range(0, gammas.shape[0], _CURVE_CHUNK):
        chunk = gammas[start : start + _CURVE_CHUNK]
        sig = apply_sigma(model.sigma, np.outer(chunk, profile.values))
        out[start : start + chunk.shape[0]] = scale * (zero_term + np.asarray(sig) @ profile.influences)
    return out


def direct_correlation(model: GenerativeModel, k: int) -> float:
    """E[sigma(gamma f) (X_k - mu_k)] by raw enumeration."""
    _check_index(model, k)
    variables = list(model.relevant_variables())
    if k not in variables:
        # X_k independent of f
        return 0.0
    q = variables.index(k)
    mu = float(model.means()[k])
    total = 0.0
    for codes, values in _blocks(model, variables):
        f = eval_poly_batch(model.poly.restrict(variables), values)
        w = _weights(model, variables, codes)
        total += float(np.sum(w * apply_sigma(model.sigma, model.gamma * f) * (values[:, q] - mu)))
    return total


def correlation_breakpoints(profile: ValueProfile) -> np.ndarray:
    """Kinks 1 / |v_i| of the correlation as a function of gamma under the
    piecewise-linear nonlinearity."""
    return np.unique(1.0 / np.abs(profile.values))


def check_usp(poly: QuadPoly) -> UspReport:
    """For every distinct nonzero value v: whether |f| = |v| fixes the sign of
    every parity, and whether -v is also a value."""
    variables = list(poly.variables())
    r = len(variables)
    _check_budget(2 ** r)
    restricted = poly.restrict(variables)
    codes = _index_codes(np.arange(2 ** r), [2] * r)
    x = 2.0 * codes - 1.0
    f = eval_poly_batch(restricted, x)
    qi, qj, _ = restricted.quad_arrays()
    lj, _ = restricted.lin_arrays()
    parity = np.hstack([x[:, qi] * x[:, qj], x[:, lj]]) > 0
    packed = np.packbits(parity, axis=1) if parity.shape[1] else np.zeros((f.shape[0], 1), dtype=np.uint8)

    magnitude_groups, magnitude_reps = _group_values(np.abs(f))
    _, first = np.unique(magnitude_groups, return_index=True)
    mismatch = (packed != packed[first[magnitude_groups]]).any(axis=1)
    unique_sign = np.bincount(magnitude_groups, weights=mismatch, minlength=magnitude_reps.shape[0]) == 0

    _, value_reps = _group_values(f)
    entries = []
    for v in value_reps[np.argsort(np.abs(value_reps), kind="stable")]:
        if abs(v) < VALUE_TOL:
            continue
        g = int(np.argmin(np.abs(magnitude_reps - abs(v))))
        partner = bool(np.any(np.abs(value_reps + v) < VALUE_TOL))
        entries.append(UspEntry(value=float(v), unique_sign=bool(unique_sign[g]), has_negation_partner=partner))
    return UspReport(entries=tuple(entries))


def theorem_case(poly: QuadPoly, k: int) -> int:
    """1 if the interaction component of x_k carries a linear term, else 2."""
    components = poly.interaction_components()
    if k not in components:
        raise ModelError("IRRELEVANT_VARIABLE", f"variable {k} does not appear in the polynomial")
    linear = {t.j for t in poly.lin_terms}
    return 1 if components[k] & linear else 2


def usp_holds(poly: QuadPoly, k: int) -> bool:
    """Case 1 needs one value with the unique sign property, Case 2 needs all."""
    report = check_usp(poly)
    if theorem_case(poly, k) == 1:
        return report.any_satisfied
    return bool(report.entries) and report.all_satisfied


def population_pair_checks(model: GenerativeModel, weak: Iterable[int]) -> List[PairCheck]:
    """Exact E[sigma(gamma f) | X_i = a, X_j = b] for every weak-support pair."""
    weak = sorted(set(weak))
    if len(weak) < 2:
        raise ModelError("WEAK_SUPPORT_TOO_SMALL", f"need at least two weak-support variables, got {weak}")
    for v in weak:
        _check_index(model, v)
        if not model.alphabets[v].is_binary:
            raise ModelError("NON_BINARY", f"variable {v} is not +-1")
    checks = []
    for i, j in combinations(weak, 2):
        variables = sorted(set(model.relevant_variables()) | {i, j})
        qi, qj = variables.index(i), variables.index(j)
        sums = np.zeros(4)
        mass = np.zeros(4)
        restricted = model.poly.restrict(variables)
        for codes, values in _blocks(model, variables):
            w = _weights(model, variables, codes, skip=(qi, qj))
            sig = apply_sigma(model.sigma, model.gamma * eval_poly_batch(restricted, values))
            # (pp, mm, pm, mp)
            cell = np.select(
                [(codes[:, qi] == 1) & (codes[:, qj] == 1), (codes[:, qi] == 0) & (codes[:, qj] == 0),
                 (codes[:, qi] == 1) & (codes[:, qj] == 0)],
                [0, 1, 2], 3,
            )
            sums += np.bincount(cell, weights=w * sig, minlength=4)
            mass += np.bincount(cell, weights=w, minlength=4)
        u = np.clip(sums / mass, 0.0, 1.0)
        checks.append(PairCheck(i=i, j=j, u_pp=u[0], u_mm=u[1], u_pm=u[2], u_mp=u[3]))
    return checks


def gamma_measure_check(
    model: GenerativeModel,
    k: int,
    grid: int = GAMMA_GRID,
    eps: Optional[float] = None,
    delta: Optional[float] = None,
) -> MeasureCheck:
    """Estimate the measure of {gamma in (0, 1/|v_m|) : |corr| > bound} on a
    midpoint grid, with the bound constants of the matching case."""
    if model.sigma is not Nonlinearity.PIECEWISE_LINEAR:
        raise ModelError("WRONG_NONLINEARITY", "the measure check needs the piecewise-linear nonlinearity")
    if not model.is_binary:
        raise ModelError("NON_BINARY", "the measure check needs a binary model")
    if grid < 1:
        raise ModelError("INVALID_GRID", f"grid must be >= 1, got {grid}")
    poly = model.poly
    min_sum, signs = min_signed_sum(poly)
    if eps is None:
        eps = min_sum
    if min_sum == 0.0 or min_sum < eps:
        raise HypothesisViolation(
            f"signed coefficient combination {signs} has magnitude {min_sum} <= eps={eps}",
            signs=signs, min_sum=min_sum, eps=eps,
        )
    variables = model.relevant_variables()
    if delta is None:
        delta = model.delta if model.delta is not None else _bias_margin(model.biases()[list(variables)])
    case = theorem_case(poly, k)
    profile = enumerate_values(model, k)
    if profile.m == 0:
        raise ModelError("CONSTANT_POLYNOMIAL", "f takes no nonzero value")

    r, s, m = len(variables), poly.num_terms, profile.m
    b = float(np.max(np.abs(np.append(poly.coefficients(), poly.constant))))
    scale = b ** 2 * s ** 2
    c1 = 1.0 / 32.0
    if case == 1:
        c2 = 3.0 / 8.0
        bound = c1 * eps ** 2 * delta ** (r + 2) / scale
    else:
        c2 = 3.0 / 32.0
        spread = abs(math.log(2.0 / (1.0 - 2.0 * delta)))
        floor = delta ** (2 * r) * min(2.0 ** (spread / 2) - 1.0, 1.0 - 2.0 ** (-spread / 2))
        bound = c1 * eps ** 2 * delta ** 2 * floor / scale

    interval_end = 1.0 / float(np.max(np.abs(profile.values)))
    gammas = (np.arange(grid) + 0.5) / grid * interval_end
    magnitude = np.abs(population_correlation_curve(model, k, gammas))
    good = magnitude > bound
    fraction = float(good.mean())
    check = MeasureCheck(
        k=k, case=case, grid=grid, interval_end=interval_end,
        measure_fraction=fraction, measure=fraction * interval_end,
        required_measure=c2 * m * eps / scale,
        magnitude_bound=bound,
        min_magnitude_on_good_set=float(magnitude[good].min()) if good.any() else None,
        c1=c1, c2=c2, eps=eps, delta=delta, b=b, s=s, m=m, r=r,
    )
    if not check.satisfied:
        note = " (the case-2 constant hides an unspecified factor)" if case == 2 else ""
        logger.warning(f"x{k}: good-gamma measure {check.measure:.3g} below {check.required_measure:.3g}{note}")
    return check


def _bias_margin(biases: np.ndarray) -> float:
    """Largest delta with every bias in (delta, 1/2 - delta) or (1/2 + delta, 1 - delta)."""
    return float(np.min(np.minimum(np.minimum(biases, 1.0 - biases), np.abs(biases - 0.5))))


def _check_index(model: GenerativeModel, k: int) -> None:
    if not 0 <= k < model.p:
        raise ModelError("INDEX_OUT_OF_RANGE", f"variable {k} out of range for p={model.p}")


def _check_budget(total: int) -> None:
    if total > ENUMERATION_MAX_ASSIGNMENTS:
        raise EnumerationBudgetError(total, ENUMERATION_MAX_ASSIGNMENTS)


def _index_codes(index: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """Mixed-radix digits of ``index``, first variable least significant."""
    codes = np.empty((index.shape[0], len(sizes)), dtype=np.intp)
    rest = index
    for q, size in enumerate(sizes):
        rest, codes[:, q] = np.divmod(rest, size)
    return codes


def _blocks(model: GenerativeModel, variables: Sequence[int]) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """(codes, values) for every assignment of ``variables``, in blocks."""
    sizes = [model.alphabets[v].size for v in variables]
    total = math.prod(sizes)
    _check_budget(total)
    alphabets = [model.alphabets[v].as_array() for v in variables]
    for start in range(0, total, ENUMERATION_BLOCK):
        codes = _index_codes(np.arange(start, min(start + ENUMERATION_BLOCK, total)), sizes)
        values = np.empty(codes.shape, dtype=float)
        for q, alphabet in enumerate(alphabets):
            values[:, q] = alphabet[codes[:, q]]
        yield codes, values


def _enumerate_f(model: GenerativeModel, variables: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    restricted = model.poly.restrict(variables)
    fs, all_codes = [], []
    for codes, values in _blocks(model, variables):
        fs.append(eval_poly_batch(restricted, values))
        all_codes.append(codes)
    return np.concatenate(fs), np.concatenate(all_codes)


def _weights(
    model: GenerativeModel, variables: Sequence[int], codes: np.ndarray, skip: Union[int, Tuple[int, ...]] = ()
) -> np.ndarray:
    """Product of marginal probabilities over the enumerated variables, except
    the positions in ``skip``."""
    skip = (skip,) if isinstance(skip, int) else skip
    w = np.ones(codes.shape[0])
    for q, v in enumerate(variables):
        if q not in skip:
            w *= np.asarray(model.marginals[v])[codes[:, q]]
    return w


def _group_values(f: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Group ids per entry and one representative per group; sorted neighbours
    closer than the value tolerance share a group."""
    if f.shape[0] == 0:
        return np.zeros(0, dtype=np.intp), np.zeros(0)
    order = np.argsort(f, kind="stable")
    ordered = f[order]
    starts = np.concatenate([[True], np.diff(ordered) >= VALUE_TOL])
    sorted_ids = np.cumsum(starts) - 1
    groups = np.empty(f.shape[0], dtype=np.intp)
    groups[order] = sorted_ids
    counts = np.bincount(sorted_ids)
    reps = np.bincount(sorted_ids, weights=ordered) / counts
    return groups, reps
