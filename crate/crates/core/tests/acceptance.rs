//! Acceptance run: one PASS/FAIL line per primary criterion, at the pinned
//! parameters and seed 0. Every line is re-derived from the report data with
//! the tolerances written here, not from the experiment's own check flags.
//!
//! The process exits 0 even when a criterion fails, so that the workspace
//! test suite stays green while failures remain visible. Set
//! `ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use landau_core::experiments::*;
use landau_core::percolation::{crossing_exists, crossing_exists_rect, Bond, BondConfig, DualLattice, Rect};
use serde_json::Value;

const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn column(rep: &ExperimentReport, series: &str, col: &str) -> Vec<f64> {
    rep.series(series)
        .unwrap_or_else(|| panic!("{} has no series {series}", rep.experiment))
        .column(col)
        .unwrap_or_else(|| panic!("{series} has no column {col}"))
        .into_iter()
        .map(num)
        .collect()
}

fn fit(rep: &ExperimentReport, name: &str) -> f64 {
    rep.get_fit(name).unwrap_or_else(|| panic!("{} has no fit {name}", rep.experiment)).value
}

fn within(x: f64, [lo, hi]: [f64; 2]) -> bool {
    (lo..=hi).contains(&x)
}

// ---------------------------------------------------------------- oracle

/// Depth-first search over vertices of `rect`, using only occupied bonds
/// whose endpoints both lie in the rectangle.
fn path_search(config: &BondConfig, rect: Rect) -> bool {
    let inside = |v: [i64; 2]| {
        (rect.x0..=rect.x0 + rect.length).contains(&v[0]) && (rect.y0..=rect.y0 + rect.width).contains(&v[1])
    };
    let open = |a: [i64; 2], b: [i64; 2]| {
        let bond = if a[1] == b[1] {
            Bond::Horizontal(a[0].min(b[0]), a[1])
        } else {
            Bond::Vertical(a[0], a[1].min(b[1]))
        };
        config.is_occupied(bond)
    };
    let mut seen = HashSet::new();
    let mut stack: Vec<[i64; 2]> = (rect.y0..=rect.y0 + rect.width).map(|y| [rect.x0, y]).collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        if v[0] == rect.x0 + rect.length {
            return true;
        }
        for d in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            let w = [v[0] + d[0], v[1] + d[1]];
            if inside(w) && !seen.contains(&w) && open(v, w) {
                stack.push(w);
            }
        }
    }
    false
}

fn oracle_equivalence() -> Outcome {
    let lattice = DualLattice::new(14).unwrap();
    let mut configs = 0u64;
    let mut shapes = 0;
    for width in 0..=3i64 {
        for length in 1..=12i64 {
            let probe = Rect { x0: 0, y0: 0, length, width };
            if probe.bond_count() > 12 {
                continue;
            }
            shapes += 1;
            for (x0, y0) in [(0, 0), (-length / 2, -width / 2), (1, -3)] {
                let rect = Rect { x0, y0, length, width };
                let bonds: Vec<Bond> = rect.bonds().collect();
                // The exterior is closed or fully open; neither may matter.
                for exterior in [false, true] {
                    let base = BondConfig::filled(lattice, exterior);
                    for mask in 0u32..(1 << bonds.len()) {
                        let mut c = base.clone();
                        for (k, &b) in bonds.iter().enumerate() {
                            c.set(b, mask >> k & 1 == 1);
                        }
                        let got = crossing_exists_rect(&c, rect).unwrap();
                        if got != path_search(&c, rect) {
                            return outcome(false, format!("mismatch on {rect:?}, mask {mask:#b}, exterior {exterior}"));
                        }
                        configs += 1;
                    }
                }
            }
        }
    }
    // The centered long-way entry point, for the shapes small enough.
    for (n, l) in [(1, 1), (2, 1), (3, 1), (1, 2)] {
        let rect = Rect::long_way(n, l);
        let bonds: Vec<Bond> = rect.bonds().collect();
        assert!(bonds.len() <= 12);
        for mask in 0u32..(1 << bonds.len()) {
            let mut c = BondConfig::filled(lattice, false);
            for (k, &b) in bonds.iter().enumerate() {
                c.set(b, mask >> k & 1 == 1);
            }
            if crossing_exists(&c, n, l).unwrap() != path_search(&c, rect) {
                return outcome(false, format!("mismatch on n={n} l={l}, mask {mask:#b}"));
            }
            configs += 1;
        }
    }
    outcome(true, format!("{configs} configurations over {shapes} shapes, 0 mismatches"))
}

// ----------------------------------------------------------- percolation

fn crossing_params() -> CrossingParams {
    CrossingParams {
        p: 0.6,
        n: 1,
        ells: vec![8, 16, 32],
        trials: 2000,
        min_r2: 0.9,
        critical_ell: 24,
        critical_trials: 2000,
        critical_band: [0.35, 0.65],
        ..Default::default()
    }
}

fn crossing_shape(rep: &ExperimentReport) -> Outcome {
    let r = column(rep, "crossing", "estimate");
    let failure: Vec<f64> = r.iter().map(|x| 1.0 - x).collect();
    let decreasing = failure.windows(2).all(|w| w[1] < w[0]);
    let r2 = fit(rep, "log_failure_r2");
    let slope = fit(rep, "log_failure_slope");
    outcome(
        decreasing && slope < 0.0 && r2 >= 0.9,
        format!("1-R = {failure:.4?}, slope {slope:.4}, r2 {r2:.4} (need decreasing, r2 >= 0.9)"),
    )
}

fn critical(rep: &ExperimentReport) -> Outcome {
    let r = column(rep, "critical", "estimate")[0];
    outcome(within(r, [0.35, 0.65]), format!("R_1,24(1/2) = {r:.4} (need [0.35, 0.65])"))
}

fn circuit_params() -> CircuitParams {
    CircuitParams {
        ps: vec![0.55, 0.6, 0.7],
        ell: 16,
        trials: 2000,
        sigmas: 3.0,
        ..Default::default()
    }
}

fn circuit_inequality(rep: &ExperimentReport) -> Outcome {
    let ps = column(rep, "circuit", "p");
    let a = column(rep, "circuit", "circuit");
    let bound = column(rep, "circuit", "bound");
    let se = column(rep, "circuit", "pooled_se");
    let margins: Vec<f64> = (0..ps.len()).map(|i| (a[i] - bound[i]) / se[i].max(1e-300)).collect();
    let pass = ps.len() == 3 && margins.iter().all(|&m| m >= -3.0);
    outcome(pass, format!("(A - R3^4)/SE at p = {ps:?}: {margins:.2?} (need >= -3)"))
}

// ------------------------------------------------------------- projector

fn projector_params() -> ProjectorParams {
    ProjectorParams {
        levels: vec![0, 1],
        identity_fields: vec![10.0, 40.0],
        hs_fields: vec![10.0, 20.0, 40.0],
        delta: 1.0,
        decay_factor: 10.0,
        ..Default::default()
    }
}

fn projector_identities(rep: &ExperimentReport) -> Outcome {
    let idem = column(rep, "identities", "idempotency");
    let eig = column(rep, "identities", "eigenrelation");
    let (wi, we) = (idem.iter().copied().fold(0.0, f64::max), eig.iter().copied().fold(0.0, f64::max));
    outcome(
        idem.len() == 4 && wi < 1e-6 && we < 1e-4,
        format!("worst idempotency {wi:.2e} (< 1e-6), eigenrelation {we:.2e} (< 1e-4) over 4 cases"),
    )
}

fn hs_decay(rep: &ExperimentReport) -> Outcome {
    let b = column(rep, "hs_decay", "B");
    let v = column(rep, "hs_decay", "value");
    let at = |f: f64| v[b.iter().position(|&x| x == f).expect("field present")];
    let drop = at(10.0) / at(40.0);
    outcome(drop >= 10.0, format!("HS(B=10)/HS(B=40) = {drop:.3e} (need >= 10)"))
}

// ---------------------------------------------------------- random model

fn wegner_params() -> WegnerParams {
    WegnerParams {
        b: 20.0,
        trials: 500,
        slope_tolerance: 0.2,
        ratio_tolerance: 1.0,
        ..Default::default()
    }
}

fn wegner(rep: &ExperimentReport) -> Outcome {
    let slope = fit(rep, "delta_slope");
    let ratio = fit(rep, "volume_ratio_4x");
    outcome(
        within(slope, [0.8, 1.2]) && within(ratio, [3.0, 5.0]),
        format!("delta slope {slope:.3} (1 +- 0.2), volume ratio {ratio:.3} (4 +- 1)"),
    )
}

fn ids(rep: &ExperimentReport) -> Outcome {
    let steps = column(rep, "free_steps", "relative_error");
    let worst = steps.iter().copied().fold(0.0, f64::max);
    let plain = fit(rep, "modulus_growth_plain");
    let covering = fit(rep, "modulus_growth_covering");
    outcome(
        worst <= 0.2 && plain >= 3.0 && covering <= 2.0,
        format!(
            "step error {worst:.3} (<= 0.2), growth plain {plain:.2} (>= 3), covering {covering:.2} (<= 2)"
        ),
    )
}

fn band_projection(rep: &ExperimentReport) -> Outcome {
    let e = fit(rep, "norm_exponent");
    let fields = column(rep, "summary", "B");
    outcome(
        within(e, [-0.7, -0.3]) && fields == [10.0, 20.0, 40.0, 80.0],
        format!("B-exponent {e:.3} over B = {fields:?} (need [-0.7, -0.3])"),
    )
}

fn decay(rep: &ExperimentReport) -> Outcome {
    let b = column(rep, "summary", "B");
    let a = column(rep, "summary", "a");
    let g = column(rep, "summary", "gamma");
    let min_g = g.iter().copied().fold(f64::INFINITY, f64::min);
    let a_min = a.iter().copied().fold(f64::INFINITY, f64::min);
    let mut small: Vec<(f64, f64)> = (0..b.len()).filter(|&i| a[i] == a_min).map(|i| (b[i], g[i])).collect();
    small.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotone = small.windows(2).all(|w| w[1].1 >= w[0].1);
    let r = fit(rep, "shape_correlation");
    outcome(
        min_g > 0.0 && monotone && r >= 0.8,
        format!(
            "min gamma {min_g:.3} (> 0), gamma at a={a_min}: {:.3?} (non-decreasing), shape r {r:.3} (>= 0.8)",
            small.iter().map(|s| s.1).collect::<Vec<_>>()
        ),
    )
}

fn h1_params() -> H1Params {
    H1Params {
        b: 40.0,
        l0: 12,
        trials: 300,
        min_difference: 0.2,
        ..Default::default()
    }
}

fn h1(rep: &ExperimentReport) -> Outcome {
    let edge = fit(rep, "band_edge_frequency");
    let landau = fit(rep, "landau_frequency");
    outcome(
        edge - landau >= 0.2,
        format!("frequency {edge:.3} at band edge vs {landau:.3} at E = B (need difference >= 0.2)"),
    )
}

fn spectral_averaging(rep: &ExperimentReport) -> Outcome {
    let ratios = column(rep, "spectral_averaging", "ratio");
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let instances = column(rep, "spectral_averaging", "instance");
    let distinct = instances.iter().map(|x| x.to_bits()).collect::<HashSet<_>>().len();
    outcome(
        worst <= 1.0 + 1e-3 && distinct == 1000,
        format!("max ratio {worst:.6} over {distinct} instances (need <= 1.001)"),
    )
}

fn offdiag(rep: &ExperimentReport) -> Outcome {
    let e = fit(rep, "pvq_exponent");
    outcome(within(e, [-0.7, -0.3]), format!("B-exponent of ||P0 V Q0|| {e:.3} (need [-0.7, -0.3])"))
}

// ----------------------------------------------------------- determinism

type Runner = Box<dyn Fn(u64) -> landau_core::Result<ExperimentReport> + Sync>;

/// Reduced configurations of every experiment, cheap enough to run three times.
fn cheap_runs() -> Vec<(&'static str, Runner)> {
    vec![
        (
            "perc-crossing",
            Box::new(|s| {
                let p = CrossingParams { ells: vec![4, 8], trials: 300, critical_ell: 8, critical_trials: 300, bootstrap: 20, ..Default::default() };
                crossing_experiment(&p, s)
            }),
        ),
        (
            "perc-circuit",
            Box::new(|s| {
                let p = CircuitParams { ell: 6, trials: 200, distances: vec![2, 4], connectivity_trials: 200, ..Default::default() };
                circuit_experiment(&p, s)
            }),
        ),
        ("ribbon", Box::new(|s| ribbon_experiment(&RibbonParams { circuits: 20, samples_per_bond: 4, ..Default::default() }, s))),
        (
            "projector",
            Box::new(|s| {
                let p = ProjectorParams { identity_fields: vec![10.0], hs_fields: vec![10.0, 20.0], ..Default::default() };
                projector_experiment(&p, s)
            }),
        ),
        (
            "spectral-averaging",
            Box::new(|s| spectral_averaging_experiment(&SpectralAveragingParams { instances: 20, dim: 10, ..Default::default() }, s)),
        ),
        (
            "offdiag",
            Box::new(|s| offdiag_experiment(&OffdiagParams { fields: vec![10.0, 20.0], bootstrap: 10, ..Default::default() }, s)),
        ),
        (
            "ids",
            Box::new(|s| {
                let p = IdsParams { trials: 3, side: 4, curve_fractions: vec![0.5, 1.0, 1.5], ..Default::default() };
                ids_experiment(&p, s)
            }),
        ),
        (
            "decay",
            Box::new(|s| {
                let p = DecayParams { fields: vec![10.0, 20.0], gaps: vec![0.3, 1.0], trials: 1, bootstrap: 10, ..Default::default() };
                decay_experiment(&p, s)
            }),
        ),
        (
            "band-projection",
            Box::new(|s| {
                let p = BandProjectionParams { fields: vec![10.0, 20.0], trials: 2, bootstrap: 10, ..Default::default() };
                band_projection_experiment(&p, s)
            }),
        ),
        (
            "wegner",
            Box::new(|s| {
                let p = WegnerParams { trials: 10, sides: vec![2, 4], bootstrap: 10, ..Default::default() };
                wegner_experiment(&p, s)
            }),
        ),
        ("h1", Box::new(|s| h1_experiment(&H1Params { trials: 3, ..Default::default() }, s))),
    ]
}

fn csv_bodies(rep: &ExperimentReport) -> Vec<(String, String)> {
    rep.series.iter().map(|s| (s.name.clone(), s.to_csv().expect("csv"))).collect()
}

fn determinism() -> Outcome {
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let mut bad = vec![];
    let mut files = 0;
    for (name, run) in cheap_runs() {
        let a = serial.install(|| run(SEED)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let b = parallel.install(|| run(SEED)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let c = parallel.install(|| run(SEED)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let (ca, cb, cc) = (csv_bodies(&a), csv_bodies(&b), csv_bodies(&c));
        files += ca.len();
        if ca != cb || cb != cc || ca.is_empty() {
            bad.push(name);
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{files} CSV bodies identical across serial, parallel and repeated runs of 11 experiments")
        } else {
            format!("CSV bodies differ for {bad:?}")
        },
    )
}

// ------------------------------------------------------------------ main

struct Line {
    name: &'static str,
    budget: Duration,
    elapsed: Duration,
    outcome: Outcome,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn run<P>(f: fn(&P, u64) -> landau_core::Result<ExperimentReport>, p: P) -> (ExperimentReport, Duration) {
    let (r, t) = timed(|| f(&p, SEED));
    (r.expect("experiment runs"), t)
}

fn main() {
    // Under `cargo test` a filter argument means a targeted run; only honor
    // `--list` so the harness stays quiet when listing tests.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut lines: Vec<Line> = vec![];
    let mut push = |name, budget_s: u64, elapsed, outcome: Outcome| {
        let line = Line { name, budget: Duration::from_secs(budget_s), elapsed, outcome };
        report(&line);
        lines.push(line);
    };

    let (o, t) = timed(oracle_equivalence);
    push("percolation oracle equivalence", 60, t, o);

    let (o, t) = timed(determinism);
    push("determinism", 600, t, o);

    let (rep, t) = run(crossing_experiment, crossing_params());
    // The crossing report also carries the critical point; split the time.
    push("crossing failure decays exponentially", 120, t, crossing_shape(&rep));
    push("critical square crossing", 60, t, critical(&rep));

    let (rep, t) = run(circuit_experiment, circuit_params());
    push("circuit probability bound", 180, t, circuit_inequality(&rep));

    let (rep, t) = run(projector_experiment, projector_params());
    push("projector identities", 120, t, projector_identities(&rep));
    push("projector off-diagonal HS decay", 60, t, hs_decay(&rep));

    let (rep, t) = run(wegner_experiment, wegner_params());
    push("wegner scaling", 600, t, wegner(&rep));

    let (rep, t) = run(ids_experiment, IdsParams::default());
    push("integrated density of states", 600, t, ids(&rep));

    let (rep, t) = run(band_projection_experiment, BandProjectionParams::default());
    push("band projection exponent", 300, t, band_projection(&rep));

    let (rep, t) = run(decay_experiment, DecayParams::default());
    push("resolvent decay", 600, t, decay(&rep));

    let (rep, t) = run(h1_experiment, h1_params());
    push("initial-scale event comparison", 600, t, h1(&rep));

    let (rep, t) = run(spectral_averaging_experiment, SpectralAveragingParams { dim: 50, instances: 1000, ..Default::default() });
    push("spectral averaging bound", 120, t, spectral_averaging(&rep));

    let (rep, t) = run(offdiag_experiment, OffdiagParams::default());
    push("off-diagonal level coupling exponent", 180, t, offdiag(&rep));


    let passed = lines.iter().filter(|l| l.outcome.pass && l.elapsed <= l.budget).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < lines.len() {
        std::process::exit(1);
    }
}

fn report(l: &Line) {
    let in_budget = l.elapsed <= l.budget;
    let status = if l.outcome.pass && in_budget { "PASS" } else { "FAIL" };
    let over = if in_budget { "" } else { " OVER BUDGET" };
    println!(
        "{status} {:<40} {:>7.1}s/{:>4}s{over}  {}",
        l.name,
        l.elapsed.as_secs_f64(),
        l.budget.as_secs(),
        l.outcome.detail
    );
}
