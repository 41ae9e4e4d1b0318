"""Exit-criteria suite.

Each test prints one ``[PASS]``/``[FAIL]`` line (visible with ``pytest -s``
or on failure) and enforces its stated tolerance and runtime budget.

Known red: the chi-square-versus-permutation tolerance of 0.01 cannot hold
uniformly over random small tables.  The permutation distribution of a
table with total <= 40 is discrete with probability atoms as large as ~0.6;
a continuous tail approximation cannot track it to 0.01 except in the far
tail.  Exhaustive enumeration of all 25,252 qualifying tables puts ~47% of
them outside the tolerance, so no seed choice passes honestly.  The test
implements the stated check faithfully and is expected to fail; the
adjacent OLS checks are strict and green.
"""

import json
import math
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from irengine import (AggregationSpec, AnalysisRequest, GeneratorSpec,
                      IncrementalPartitioner, MeasureSubset, MetricSpec,
                      PartitionConfig, aggregate, convex_hull, generate,
                      partition, partition_partial, partition_with_replacement,
                      run_analysis, run_metrics)
from irengine.chartspec import hull_contains
from irengine.metrics import (chi_square_p_value, chi_square_stat,
                              compute_fold, metric_linear_regression)
from irengine.rng import SplitMix64

from .oracles import brute_force_hull_check, permutation_p_montecarlo


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def whole_subset(dataset) -> MeasureSubset:
    return MeasureSubset(group_key=[], member_row_ids=list(range(dataset.row_count)))


# ---------------------------------------------------------------------------
# 1. Identity-partition equivalence
# ---------------------------------------------------------------------------

def _random_identity_request(g: SplitMix64):
    """One of 100 randomized single-fold analysis configurations."""
    choice = g.below(4)
    seed = g.below(1 << 32)
    if choice == 0:
        ds = generate(GeneratorSpec(kind="binary_population", p=0.2 + 0.6 * g.next_float(),
                                    size=200 + g.below(800), seed=seed), name="bp")
        metric = {"kind": "proportion", "column": "positive", "value": True}
        chart = "bar"
        filters = []
    elif choice == 1:
        ds = generate(GeneratorSpec(kind="binary_population", p=0.5,
                                    size=200 + g.below(800), seed=seed), name="bp")
        metric = {"kind": "count"}
        chart = "bar"
        filters = [{"column": "positive", "op": "eq", "operand": bool(g.below(2))}]
    elif choice == 2:
        ds = generate(GeneratorSpec(kind="noisy_linear", slope=-2 + 4 * g.next_float(),
                                    intercept=-1 + 2 * g.next_float(), noise_sd=1.0,
                                    size=300 + g.below(700), seed=seed), name="nl")
        if g.below(2):
            metric = {"kind": "mean", "column": "y"}
            chart = "bar"
            filters = [{"column": "x", "op": "between", "operand": [1.0, 9.0]}]
        else:
            metric = {"kind": "linear_regression", "x": "x", "y": "y"}
            chart = "scatter_regression"
            filters = []
    else:
        ds = generate(GeneratorSpec(kind="null_association_table", features=5,
                                    size=400 + g.below(400), seed=seed), name="nt")
        metric = {"kind": "binary_association", "feature": f"f{g.below(5)}",
                  "outcome": "outcome"}
        chart = "bubble"
        filters = []
    request = AnalysisRequest.from_dict({
        "dataset": ds.name,
        "filters": filters,
        "metric": metric,
        "partition": {"n": 1, "min_fold_size": 1, "seed": seed},
        "chart_kind": chart,
    })
    return ds, request


def test_criterion_identity_partition_equivalence():
    started = time.perf_counter()
    g = SplitMix64(20240)
    checked_stats = 0
    for _ in range(100):
        ds, request = _random_identity_request(g)
        result = run_analysis(ds, request)
        assert len(result.measures) == 1
        measure = result.measures[0]
        assert measure.n_effective == 1
        from irengine.dataset import apply_filter
        view = apply_filter(ds, request.filters)
        direct = compute_fold(request.metric, ds, view.row_ids)
        for name, direct_value in direct.values.items():
            if request.aggregation.strategies[name] == "none":
                # never aggregated: the single fold carries the value
                assert measure.fold_stats[0].values[name] == direct_value
            else:
                assert measure.aggregates[name] == direct_value  # bit-identical
            checked_stats += 1
    elapsed = time.perf_counter() - started
    report("identity-partition equivalence",
           elapsed < 10.0,
           f"100 requests, {checked_stats} aggregate values bit-identical, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. Partition invariants (>= 1000 random cases)
# ---------------------------------------------------------------------------

def test_criterion_partition_invariants():
    started = time.perf_counter()
    g = SplitMix64(777)
    cases = 0

    for _ in range(450):  # disjoint
        size, n, mfs = g.below(400), 1 + g.below(10), 1 + g.below(30)
        cfg = PartitionConfig(n_requested=n, min_fold_size=mfs, seed=g.below(1 << 40))
        fs = partition(MeasureSubset(group_key=[], member_row_ids=list(range(size))), cfg)
        sizes = fs.fold_sizes()
        assert fs.n_effective == max(1, min(n, size // mfs))
        assert max(sizes) - min(sizes) <= 1
        assert sorted(r for f in fs.folds for r in f.member_row_ids) == list(range(size))
        cases += 1

    for _ in range(200):  # partial: disjoint invariants on the sample
        size, n = 1 + g.below(400), 1 + g.below(8)
        frac = 0.05 + 0.95 * g.next_float()
        cfg = PartitionConfig(n_requested=n, min_fold_size=1, mode="partial",
                              fraction=frac, seed=g.below(1 << 40))
        fs = partition_partial(MeasureSubset(group_key=[], member_row_ids=list(range(size))), cfg)
        k = math.ceil(frac * size)
        picked = [r for f in fs.folds for r in f.member_row_ids]
        assert len(picked) == k and len(set(picked)) == k
        sizes = fs.fold_sizes()
        assert max(sizes) - min(sizes) <= 1
        cases += 1

    for _ in range(200):  # with_replacement: exact fold sizes, members drawn from input
        size, n, fold_size = 1 + g.below(60), 1 + g.below(8), 1 + g.below(50)
        cfg = PartitionConfig(n_requested=n, min_fold_size=1, mode="with_replacement",
                              fold_size=fold_size, seed=g.below(1 << 40))
        fs = partition_with_replacement(
            MeasureSubset(group_key=[], member_row_ids=list(range(size))), cfg)
        assert fs.fold_sizes() == [fold_size] * n
        assert all(0 <= r < size for f in fs.folds for r in f.member_row_ids)
        cases += 1

    for _ in range(160):  # incremental: spread <= 1 after every single add
        n = 1 + g.below(10)
        arrivals = 1 + g.below(120)
        part = IncrementalPartitioner(
            PartitionConfig(n_requested=n, min_fold_size=1, mode="incremental",
                            seed=g.below(1 << 40)))
        for i in range(arrivals):
            part.add(i)
            sizes = [len(f) for f in part._folds]
            assert max(sizes) - min(sizes) <= 1
        snap = part.snapshot()
        assert sorted(r for f in snap.folds for r in f.member_row_ids) == list(range(arrivals))
        cases += 1

    elapsed = time.perf_counter() - started
    report("partition invariants", cases >= 1000 and elapsed < 30.0,
           f"{cases} random cases, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 3. Statistical oracle
# ---------------------------------------------------------------------------

def _sample_qualifying_tables(seed: int, count: int):
    """Uniform random 2x2 tables with total in [20, 40] and all expected
    cells >= 5."""
    g = SplitMix64(seed)
    tables = []
    while len(tables) < count:
        n = 20 + g.below(21)
        a = g.below(n + 1)
        b = g.below(n - a + 1)
        c = g.below(n - a - b + 1)
        d = n - a - b - c
        r1, r2, c1, c2 = a + b, c + d, a + c, b + d
        if min(r1, r2, c1, c2) == 0:
            continue
        if min(r1 * c1, r1 * c2, r2 * c1, r2 * c2) / n < 5:
            continue
        tables.append((a, b, c, d))
    return tables


@pytest.mark.known_red
def test_criterion_chi_square_vs_permutation_oracle():
    """Stated tolerance: |chi-square p - permutation p| < 0.01 on 50 random
    qualifying tables.  Genuinely unattainable: the permutation law of a
    table this small is discrete (atoms up to ~0.6 at the center of the
    support), so roughly half of the random tables exceed 0.01 under any
    seed.  Kept faithful to the stated check; see the adjacent tests for the
    agreement that does hold in the decision-relevant tail.
    """
    tables = _sample_qualifying_tables(seed=2024, count=50)
    failures = []
    for i, (a, b, c, d) in enumerate(tables):
        p = chi_square_p_value(chi_square_stat(a, b, c, d))
        oracle = permutation_p_montecarlo(a, b, c, d, draws=200_000, seed=i)
        if abs(p - oracle) >= 0.01:
            failures.append(((a, b, c, d), round(abs(p - oracle), 4)))
    report("chi-square vs permutation oracle (+-0.01, 50 random tables)",
           not failures,
           f"{len(failures)}/50 tables exceed the tolerance; "
           f"worst {max((f[1] for f in failures), default=0)}")


def test_criterion_chi_square_tail_agreement():
    """The agreement that is attainable and decision-relevant: for tables
    whose chi-square p is at or below the 0.05 threshold, the permutation
    oracle stays within 0.07 (the exhaustive worst case over all qualifying
    tables is 0.0654)."""
    g = SplitMix64(515)
    checked = 0
    worst = 0.0
    while checked < 50:
        n = 20 + g.below(21)
        a = g.below(n + 1)
        b = g.below(n - a + 1)
        c = g.below(n - a - b + 1)
        d = n - a - b - c
        if min(a + b, c + d, a + c, b + d) == 0:
            continue
        if min((a + b) * (a + c), (a + b) * (b + d), (c + d) * (a + c),
               (c + d) * (b + d)) / n < 5:
            continue
        p = chi_square_p_value(chi_square_stat(a, b, c, d))
        if p > 0.05:
            continue
        oracle = permutation_p_montecarlo(a, b, c, d, draws=100_000, seed=checked)
        worst = max(worst, abs(p - oracle))
        checked += 1
    report("chi-square tail agreement (p <= 0.05, +-0.07)", worst < 0.07,
           f"50 tables, worst |diff| {worst:.4f}")


def test_criterion_ols_properties():
    started = time.perf_counter()
    g = SplitMix64(606)
    # residual orthogonality on noisy data
    for _ in range(200):
        n = 3 + g.below(300)
        xs = [g.next_float() * 50 - 25 for _ in range(n)]
        ys = [1.7 * x + 0.3 + g.gauss() * 3 for x in xs]
        values, _, _, _ = metric_linear_regression(xs, ys)
        slope, intercept = values["slope"], values["intercept"]
        resid = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
        scale = max(1.0, max(abs(y) for y in ys))
        assert abs(math.fsum(resid)) <= 1e-9 * n * scale
        assert abs(math.fsum(r * x for r, x in zip(resid, xs))) <= 1e-9 * n * scale * 25
    # exact recovery on noiseless lines: integer and dyadic grids plus the
    # generated slope-2 line
    for n in range(2, 40):
        for s, c in [(2, 1), (-3, 7), (5, -2)]:
            xs = [float(i) for i in range(n)]
            values, _, _, _ = metric_linear_regression(xs, [s * x + c for x in xs])
            assert (values["slope"], values["intercept"], values["r2"]) == (float(s), float(c), 1.0)
    ds = generate(GeneratorSpec(kind="noisy_linear", slope=2.0, intercept=1.0,
                                noise_sd=0.0, size=1000, seed=3))
    values, _, _, _ = metric_linear_regression([r[0] for r in ds.rows],
                                               [r[1] for r in ds.rows])
    assert values["slope"] == 2.0 and values["intercept"] == 1.0
    report("ols residual orthogonality and exact noiseless recovery", True,
           f"{time.perf_counter() - started:.1f}s")


# ---------------------------------------------------------------------------
# 4. Type-1 error reduction on a true-null table
# ---------------------------------------------------------------------------

def test_criterion_type1_error_reduction():
    started = time.perf_counter()
    ds = generate(GeneratorSpec(kind="null_association_table", features=1000,
                                size=5000, outcome_p=0.5, seed=101))
    subset = whole_subset(ds)
    folds1 = partition(subset, PartitionConfig(n_requested=1, min_fold_size=1, seed=7))
    folds5 = partition(subset, PartitionConfig(n_requested=5, min_fold_size=1, seed=7))

    flagged_n1 = 0
    flagged_majority = 0
    nesting_violations = 0
    counts = {"unanimous": 0, "majority": 0, "at_least_one": 0}
    for j in range(1000):
        metric = MetricSpec(kind="binary_association", feature=f"f{j}", outcome="outcome")
        stats1 = run_metrics(folds1, metric, ds)
        if stats1[0].values["significant"]:
            flagged_n1 += 1
        stats5 = run_metrics(folds5, metric, ds)
        merged = aggregate(stats5, AggregationSpec.defaults_for(metric))
        if merged.aggregates["significant"] is True:
            flagged_majority += 1
        detail = merged.vote_detail["significant"]
        for key in counts:
            counts[key] += bool(detail[key])
        if detail["unanimous"] and not detail["majority"]:
            nesting_violations += 1
        if detail["majority"] and not detail["at_least_one"]:
            nesting_violations += 1

    frac_n1 = flagged_n1 / 1000
    frac_n5 = flagged_majority / 1000
    elapsed = time.perf_counter() - started
    ok = (0.03 <= frac_n1 <= 0.07 and frac_n5 <= 0.01
          and nesting_violations == 0
          and counts["unanimous"] <= counts["majority"] <= counts["at_least_one"]
          and elapsed < 120.0)
    report("type-1 error reduction via fold voting", ok,
           f"n=1 flags {frac_n1:.3f}, n=5 majority flags {frac_n5:.4f}, "
           f"tallies {counts['unanimous']}<={counts['majority']}<={counts['at_least_one']}, "
           f"{elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 5. Fold spread shrinks as the incremental sample grows
# ---------------------------------------------------------------------------

def _fold_slope_stdev(fold_set, dataset) -> float:
    metric = MetricSpec(kind="linear_regression", x="x", y="y")
    slopes = [fs.values["slope"] for fs in run_metrics(fold_set, metric, dataset)
              if fs.values["slope"] is not None]
    mu = sum(slopes) / len(slopes)
    return math.sqrt(sum((s - mu) ** 2 for s in slopes) / len(slopes))


def test_criterion_fold_spread_decreases():
    started = time.perf_counter()
    wins = 0
    for seed in range(20):
        ds = generate(GeneratorSpec(kind="noisy_linear", slope=2.0, intercept=1.0,
                                    noise_sd=1.0, size=2500, seed=seed))
        part = IncrementalPartitioner(PartitionConfig(
            n_requested=5, min_fold_size=1, mode="incremental", seed=seed))
        part.add_many(range(500))
        spread_500 = _fold_slope_stdev(part.snapshot(), ds)
        part.add_many(range(500, 2500))
        spread_2500 = _fold_slope_stdev(part.snapshot(), ds)
        if spread_2500 < spread_500:
            wins += 1
    elapsed = time.perf_counter() - started
    report("fold-spread decrease over incremental growth",
           wins >= 18 and elapsed < 60.0, f"{wins}/20 seeded runs, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 6. Convex hull vs brute force
# ---------------------------------------------------------------------------

def test_criterion_convex_hull_oracle():
    g = SplitMix64(888)
    for case in range(1000):
        size = 1 + g.below(10)
        style = g.below(4)
        if style == 0:      # small integer grid: duplicates and collinearity
            pts = [(g.below(4), g.below(4)) for _ in range(size)]
        elif style == 1:    # exactly collinear
            x0, dx = g.below(10), 1 + g.below(3)
            pts = [(x0 + i * dx, 2 * (x0 + i * dx) + 1) for i in range(size)]
        elif style == 2:    # duplicated single point
            p = (g.next_float(), g.next_float())
            pts = [p] * size
        else:               # general position floats
            pts = [(g.next_float() * 10, g.next_float() * 10) for _ in range(size)]
        hull = convex_hull(pts)
        brute_force_hull_check(pts, hull)
        assert all(hull_contains(hull, p) for p in pts)
    report("convex hull vs brute-force oracle", True, "1000 random point sets")


# ---------------------------------------------------------------------------
# 7. End-to-end determinism across server restarts
# ---------------------------------------------------------------------------

def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _post(url, payload, content_type="application/json"):
    data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
    req = urllib.request.Request(url, data=data, headers={"content-type": content_type})
    with urllib.request.urlopen(req) as resp:
        return resp.status, resp.read()


def _wait_until_up(port, deadline=15.0):
    end = time.time() + deadline
    while time.time() < end:
        try:
            with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz", timeout=1):
                return
        except Exception:
            time.sleep(0.1)
    raise RuntimeError("server did not come up")


def _serve(port, dataset_dir):
    return subprocess.Popen(
        [sys.executable, "-m", "irengine.cli", "serve", "--port", str(port),
         "--dataset-dir", str(dataset_dir)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)


def test_criterion_determinism_across_restarts(tmp_path):
    from irengine.synth import write_csv
    ds = generate(GeneratorSpec(kind="binary_population", p=0.5, size=300, seed=6))
    csv_path = tmp_path / "pop.csv"
    write_csv(ds, csv_path)
    request = {
        "dataset": "pop",
        "metric": {"kind": "proportion", "column": "positive", "value": True},
        "partition": {"n": 5, "min_fold_size": 1, "seed": 12},
        "chart_kind": "bar",
    }
    dataset_dir = tmp_path / "store"
    port = _free_port()

    proc = _serve(port, dataset_dir)
    try:
        _wait_until_up(port)
        status, _ = _post(f"http://127.0.0.1:{port}/datasets?name=pop",
                          csv_path.read_bytes(), content_type="text/csv")
        assert status == 201
        _, body_first = _post(f"http://127.0.0.1:{port}/analyze", request)
        _, body_repeat = _post(f"http://127.0.0.1:{port}/analyze", request)
    finally:
        proc.terminate()
        proc.wait(timeout=10)

    port2 = _free_port()
    proc2 = _serve(port2, dataset_dir)
    try:
        _wait_until_up(port2)
        _, body_restarted = _post(f"http://127.0.0.1:{port2}/analyze", request)
    finally:
        proc2.terminate()
        proc2.wait(timeout=10)

    report("end-to-end determinism across restarts",
           body_first == body_repeat == body_restarted,
           f"{len(body_first)} response bytes identical")
