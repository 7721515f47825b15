//! Invariant suites and the differential fuzzer.
//!
//! [`verify_one`] runs every check for a single `ξ` and returns a report whose failing
//! entries carry a concrete counterexample. [`fuzz`] does the same over reduced fractions
//! of bounded denominator.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{format_rational, rat, LogCoord, Rational};
use crate::cf::{normalize, reconstruct, CfExpansion, ConvergentTable};
use crate::envelope::{
    build_graph, decode, evaluate_graph, CombinedGraph, PiecewiseLinear, Slope, Tail,
};
use crate::oracle::{brute_minima, check_no_better_point, check_window_characterization};
use crate::trajectory::{dominates, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub xi: String,
    pub normalized: String,
    pub seed: u64,
    pub quotients: Vec<String>,
    pub decoded: Option<Vec<String>>,
    pub oracle_samples: usize,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Random abscissae checked against the oracle on top of the vertex set.
    pub samples: usize,
    /// `|Q|` bound for the scan for points better than `x_{s−2}`; default `10·Q_{s−1}`.
    pub oracle_bound: Option<BigInt>,
    pub seed: u64,
    /// Skip the lattice-enumeration comparison (the most expensive check).
    pub skip_oracle: bool,
    pub depth: Option<usize>,
}

struct Checks(Vec<Check>);

impl Checks {
    fn record(&mut self, name: &'static str, counterexample: Option<Value>) {
        self.0.push(Check {
            name,
            passed: counterexample.is_none(),
            counterexample,
        });
    }
}

fn lc_json(c: &LogCoord) -> Value {
    json!(c)
}

/// Abscissae at which the graph is compared with the oracle: every vertex of either
/// function, one interior point per gap (the mean of the neighbouring ratios), one point
/// on the tails and `extra` seeded random points.
pub fn sample_abscissae(graph: &CombinedGraph, extra: usize, seed: u64) -> Vec<LogCoord> {
    let vertices = graph.abscissae();
    let mut out = vertices.clone();
    for w in vertices.windows(2) {
        let mid = (w[0].ratio() + w[1].ratio()) / Rational::from_integer(2.into());
        out.push(LogCoord::new(mid).expect("positive"));
    }
    let last = vertices.last().expect("graph has a vertex").ratio().clone();
    let reach = match graph.l1().tail() {
        Tail::Truncated => last.clone(),
        Tail::Ray(_) => {
            let beyond = &last * Rational::from_integer(4.into());
            out.push(LogCoord::new(beyond.clone()).expect("positive"));
            beyond
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Rational::from_integer(1.into());
    for _ in 0..extra {
        let k: i64 = rng.gen_range(0..=1_000_000);
        let r = &one + (&reach - &one) * rat(k, 1_000_000);
        out.push(LogCoord::new(r).expect("ratio ≥ 1"));
    }
    out.sort();
    out.dedup();
    out
}

fn check_convergent_facts(table: &ConvergentTable) -> Option<Value> {
    let last = table.last();
    for n in 0..=last {
        let q = &table.point(n).q;
        if !q.is_positive() || (n >= 1 && *q <= table.point(n - 1).q) {
            return Some(json!({"fact": "Q_n strictly increasing and positive", "n": n}));
        }
        let det = table.point(n).det(table.point(n - 1));
        let expected = BigInt::from(if n % 2 == 0 { 1 } else { -1 });
        if det != expected {
            return Some(
                json!({"fact": "Q_nP_{n-1} - Q_{n-1}P_n = (-1)^n", "n": n, "det": det.to_string()}),
            );
        }
    }
    let signed = |n: isize| {
        let x = table.point(n);
        table.xi() * Rational::from_integer(x.q.clone()) - Rational::from_integer(x.p.clone())
    };
    for n in 0..last {
        let (a, b) = (signed(n - 1), signed(n));
        if a.is_zero() || b.is_zero() || a.is_positive() == b.is_positive() {
            return Some(json!({"fact": "Q_nξ - P_n alternate in sign", "n": n}));
        }
    }
    for n in 0..=last {
        if table.delta(n) >= table.delta(n - 1) {
            return Some(json!({"fact": "Δ_n strictly decreasing", "n": n}));
        }
    }
    if !table.delta(last).is_zero() {
        return Some(json!({"fact": "Δ_{s-1} = 0", "delta": format_rational(table.delta(last))}));
    }
    None
}

fn check_slopes(name: &str, f: &PiecewiseLinear) -> Option<Value> {
    PiecewiseLinear::new(f.vertices().to_vec(), f.tail())
        .err()
        .map(|e| json!({"function": name, "error": e.to_string()}))
}

/// Runs the full invariant suite for one `ξ`.
pub fn verify_one(xi: &Rational, opts: &VerifyOptions) -> VerifyReport {
    let started = Instant::now();
    let norm = normalize(xi);
    let mut checks = Checks(Vec::new());

    // Continued fraction round trip.
    let cf = CfExpansion::expand(&norm).expect("normalized");
    let back = reconstruct(cf.quotients());
    checks.record(
        "cf_round_trip",
        (back != norm)
            .then(|| json!({"expanded": cf.bracket(), "reconstructed": format_rational(&back)})),
    );

    let table = ConvergentTable::new(&cf);
    let s = table.s();
    checks.record("convergent_facts", check_convergent_facts(&table));

    let mut bad = None;
    'outer: for n in 1..s {
        for sc in table.semiconvergents(n).expect("1 ≤ n < s") {
            let direct = sc.point.error(&norm);
            if direct != sc.delta {
                bad = Some(json!({"n": n, "t": sc.t, "point": sc.point,
                    "linear": format_rational(&sc.delta), "direct": format_rational(&direct)}));
                break 'outer;
            }
        }
    }
    checks.record("semiconvergent_errors", bad);

    let bad = (1..s)
        .map(|n| table.check_chains(n).expect("1 ≤ n < s"))
        .find(|r| !r.passed)
        .map(|r| json!(r));
    checks.record("chains", bad);

    let bad = (1..s)
        .map(|n| check_window_characterization(&norm, n).expect("1 ≤ n < s"))
        .find(|r| !r.passed_up_to_boundary())
        .map(|r| json!(r));
    checks.record("window_characterization", bad);

    let q_last = table.point(table.last()).q.clone();
    let bound = opts
        .oracle_bound
        .clone()
        .unwrap_or_else(|| BigInt::from(10) * &q_last)
        .max(q_last);
    let scan = check_no_better_point(&norm, &bound).expect("bound ≥ Q_{s-1}");
    checks.record("no_better_point", (!scan.passed).then(|| json!(scan)));

    // L_{x_{n,t}} ≥ L_{x_{n−1}} for 0 < t < a_n, and L_{x_{−1}} ≥ L_{x_0}.
    let traj = |x: &crate::arith::LatticePoint| Trajectory::new(x, &norm).expect("nonzero");
    let mut bad = (!dominates(&traj(table.point(-1)), &traj(table.point(0))))
        .then(|| json!({"upper": table.point(-1), "lower": table.point(0)}));
    'dom: for n in 1..s {
        let lower = traj(table.point(n as isize - 1));
        let semis = table.semiconvergents(n).expect("1 ≤ n < s");
        for sc in &semis[1..semis.len() - 1] {
            if !dominates(&traj(&sc.point), &lower) {
                bad = Some(json!({"n": n, "t": sc.t, "upper": sc.point, "lower": lower.point()}));
                break 'dom;
            }
        }
    }
    checks.record("trajectory_domination", bad);

    let graph = build_graph(&norm, opts.depth);

    // Oracle equivalence: the envelope construction agrees with lattice enumeration.
    let mut oracle_samples = 0;
    if !opts.skip_oracle {
        let samples = sample_abscissae(&graph, opts.samples, opts.seed);
        oracle_samples = samples.len();
        let mut bad = None;
        for q in &samples {
            let (l1, l2) = evaluate_graph(&graph, q).expect("sample within range");
            let w = brute_minima(&norm, q, Some(&l2));
            if w.lambda1 != l1 || w.lambda2 != l2 {
                bad = Some(
                    json!({"q": lc_json(q), "graph": [lc_json(&l1), lc_json(&l2)],
                    "oracle": [lc_json(&w.lambda1), lc_json(&w.lambda2)], "witnesses": [w.w1, w.w2]}),
                );
                break;
            }
        }
        checks.record("oracle_equivalence", bad);
    }

    checks.record(
        "slopes",
        check_slopes("L1", graph.l1()).or_else(|| check_slopes("L2", graph.l2())),
    );
    checks.record("first_below_second", first_below_second(&graph));
    checks.record("minkowski_band", minkowski_band(&graph));
    checks.record("touch_at_maxima", touch_at_maxima(&graph));
    checks.record("q_n_formula", q_n_formula(&graph, &table));
    checks.record("interval_maxima_shape", interval_maxima_shape(&graph));

    let decoded = decode(&graph);
    let decoded_quotients = decoded
        .as_ref()
        .ok()
        .map(|d| d.quotients().iter().map(ToString::to_string).collect());
    checks.record(
        "decode_round_trip",
        match &decoded {
            Ok(d) if d == &cf => None,
            Ok(d) => Some(json!({"expanded": cf.bracket(), "decoded": d.bracket()})),
            Err(e) => Some(json!({"expanded": cf.bracket(), "error": e.to_string()})),
        },
    );

    VerifyReport {
        xi: format_rational(xi),
        normalized: format_rational(&norm),
        seed: opts.seed,
        quotients: cf.quotients().iter().map(ToString::to_string).collect(),
        decoded: decoded_quotients,
        oracle_samples,
        checks: checks.0,
        elapsed: started.elapsed(),
    }
}

/// `L1 ≤ L2` at every vertex abscissa of either function and on the tails.
pub fn first_below_second(graph: &CombinedGraph) -> Option<Value> {
    let mut probes = graph.abscissae();
    if graph.l1().end().is_none() {
        let last = probes.last().expect("vertex").clone();
        probes.push(&last + &LogCoord::new(rat(4, 1)).expect("positive"));
    }
    probes.into_iter().find_map(|q| {
        let (l1, l2) = evaluate_graph(graph, &q).ok()?;
        (l1 > l2).then(|| json!({"q": lc_json(&q), "L1": lc_json(&l1), "L2": lc_json(&l2)}))
    })
}

/// `−log 2 ≤ L1 + L2 ≤ 0` at every vertex: the ratio of the sum lies in `[1/4, 1]`.
pub fn minkowski_band(graph: &CombinedGraph) -> Option<Value> {
    let (lo, hi) = (rat(1, 4), rat(1, 1));
    graph.abscissae().into_iter().find_map(|q| {
        let (l1, l2) = evaluate_graph(graph, &q).ok()?;
        let sum = &l1 + &l2;
        (*sum.ratio() < lo || *sum.ratio() > hi)
            .then(|| json!({"q": lc_json(&q), "sum": lc_json(&sum)}))
    })
}

/// `L1(q_n) = L2(q_n)` at every local maximum of `L1`.
pub fn touch_at_maxima(graph: &CombinedGraph) -> Option<Value> {
    graph.q_maxima().iter().find_map(|q| {
        let (l1, l2) = evaluate_graph(graph, q).ok()?;
        (l1 != l2).then(|| json!({"q": lc_json(q), "L1": lc_json(&l1), "L2": lc_json(&l2)}))
    })
}

/// `q_n = ½(log Q_n − log Δ_{n−1})`, and the local maxima of `L1` read off the vertex list
/// are exactly the stored `q_n`.
pub fn q_n_formula(graph: &CombinedGraph, table: &ConvergentTable) -> Option<Value> {
    for (n, q) in graph.q_maxima().iter().enumerate().skip(1) {
        let n = n as isize;
        let expected = Rational::from_integer(table.point(n).q.clone()) / table.delta(n - 1);
        if *q.ratio() != expected {
            return Some(
                json!({"n": n, "q": lc_json(q), "expected_ratio": format_rational(&expected)}),
            );
        }
    }
    let from_shape: Vec<LogCoord> = graph
        .l1()
        .local_maxima()
        .into_iter()
        .map(|(q, _)| q)
        .collect();
    (from_shape != graph.q_maxima()).then(|| {
        json!({"stored": graph.q_maxima().iter().map(lc_json).collect::<Vec<_>>(),
               "from_vertices": from_shape.iter().map(lc_json).collect::<Vec<_>>()})
    })
}

/// For `2 ≤ n ≤ s−2` all maxima of `L2` on `[q_{n−1}, q_n]` are interior and `q_n` is a
/// local minimum of `L2`; `q_0` is a maximum on the first interval and `q_{s−1}` on the last.
pub fn interval_maxima_shape(graph: &CombinedGraph) -> Option<Value> {
    let qs = graph.q_maxima();
    let intervals = graph.intervals();
    let complete = graph.s_detected().map(|s| s - 1);
    for n in 1..=intervals {
        let maxima = crate::envelope::interval_local_maxima(graph, n).ok()?;
        let at_left = maxima.iter().any(|(q, _)| *q == qs[n - 1]);
        let at_right = maxima.iter().any(|(q, _)| *q == qs[n]);
        let is_last = complete == Some(n);
        if at_left != (n == 1) || at_right != is_last {
            return Some(
                json!({"n": n, "left_endpoint_counted": at_left, "right_endpoint_counted": at_right}),
            );
        }
        if !is_last && n < intervals {
            let (before, after) = (
                graph.l2().slope_before(&qs[n]),
                graph.l2().slope_after(&qs[n]),
            );
            if n >= 2 && (before != Some(Slope::Down) || after != Some(Slope::Up)) {
                return Some(
                    json!({"n": n, "q_n": lc_json(&qs[n]), "not a local minimum of L2": true}),
                );
            }
        }
    }
    None
}

/// Outcome of a fuzzing run, with reports ordered by `‖ξ‖`.
#[derive(Clone, Debug, Serialize)]
pub struct FuzzSummary {
    pub max_den: u64,
    pub population: u64,
    pub exhaustive: bool,
    pub seed: u64,
    pub checked: usize,
    pub failures: usize,
    #[serde(skip)]
    pub reports: Vec<VerifyReport>,
}

/// Number of reduced fractions in `[0, 1/2]` with denominator at most `max_den`.
pub fn population(max_den: u64) -> u64 {
    let n = max_den as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            for j in (i..=n).step_by(i) {
                phi[j] -= phi[j] / i as u64;
            }
        }
    }
    // 0/1 and 1/2, then φ(d)/2 numerators below d/2 for every d ≥ 3.
    let small = (max_den >= 1) as u64 + (max_den >= 2) as u64;
    small + (3..=n).map(|d| phi[d] / 2).sum::<u64>()
}

/// Every reduced `p/d ∈ [0, 1/2]` with `d ≤ max_den`, in increasing order.
pub fn all_reduced(max_den: u64) -> Vec<Rational> {
    let mut out = Vec::new();
    for d in 1..=max_den {
        for p in 0..=d / 2 {
            if p.gcd(&d) == 1 {
                out.push(rat(p as i64, d as i64));
            }
        }
    }
    out.sort();
    out
}

/// `count` distinct reduced fractions drawn uniformly by rejection sampling.
pub fn sample_reduced(max_den: u64, count: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < count {
        let d = rng.gen_range(1..=max_den);
        let p = rng.gen_range(0..=max_den / 2);
        if 2 * p <= d && p.gcd(&d) == 1 {
            picked.insert((p, d));
        }
    }
    let mut out: Vec<Rational> = picked
        .into_iter()
        .map(|(p, d)| rat(p as i64, d as i64))
        .collect();
    out.sort();
    out
}

/// Verifies `count` sampled values (all of them when `count` is absent or covers the
/// population). Work is spread over threads; the output order is by value.
pub fn fuzz(max_den: u64, count: Option<usize>, opts: &VerifyOptions) -> FuzzSummary {
    assert!(max_den >= 2, "max_den must be at least 2");
    let population = population(max_den);
    let exhaustive = count.is_none_or(|c| c as u64 >= population);
    let values = if exhaustive {
        all_reduced(max_den)
    } else {
        sample_reduced(max_den, count.unwrap_or(0), opts.seed)
    };
    let reports: Vec<VerifyReport> = values.par_iter().map(|xi| verify_one(xi, opts)).collect();
    let failures = reports.iter().filter(|r| !r.passed()).count();
    FuzzSummary {
        max_den,
        population,
        exhaustive,
        seed: opts.seed,
        checked: reports.len(),
        failures,
        reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sevenths_passes() {
        let r = verify_one(&rat(3, 7), &VerifyOptions::default());
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.decoded, Some(vec!["2".to_string(), "3".to_string()]));
    }

    #[test]
    fn zero_passes() {
        let r = verify_one(&rat(0, 1), &VerifyOptions::default());
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.decoded, Some(vec![]));
    }

    #[test]
    fn unnormalized_input() {
        let r = verify_one(
            &rat(355, 113),
            &VerifyOptions {
                samples: 5,
                ..Default::default()
            },
        );
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.normalized, "16/113");
        assert_eq!(r.decoded, Some(vec!["7".to_string(), "16".to_string()]));
    }

    #[test]
    fn population_matches_enumeration() {
        for d in [2, 3, 10, 57, 200] {
            assert_eq!(population(d), all_reduced(d).len() as u64);
        }
        assert_eq!(population(2), 2);
    }

    #[test]
    fn smallest_population_is_exhaustive() {
        let summary = fuzz(2, None, &VerifyOptions::default());
        assert!(summary.exhaustive);
        assert_eq!(summary.checked, 2);
        assert_eq!(summary.failures, 0);
        let xs: Vec<_> = summary.reports.iter().map(|r| r.xi.clone()).collect();
        assert_eq!(xs, vec!["0", "1/2"]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let opts = VerifyOptions {
            seed: 7,
            samples: 3,
            ..Default::default()
        };
        let a = fuzz(60, Some(12), &opts);
        let b = fuzz(60, Some(12), &opts);
        let dump = |s: &FuzzSummary| serde_json::to_string(&s.reports).unwrap();
        assert_eq!(dump(&a), dump(&b));
        assert!(!a.exhaustive);
        assert_eq!(a.checked, 12);
        assert_eq!(a.failures, 0);
    }

    #[test]
    fn failing_check_carries_counterexample() {
        let mut c = Checks(Vec::new());
        c.record("x", Some(json!({"q": 1})));
        c.record("y", None);
        assert!(!c.0[0].passed && c.0[0].counterexample.is_some());
        assert!(c.0[1].passed);
    }
}
