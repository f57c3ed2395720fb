//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fail.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use adaptive_eps::cli::run_cli;
use adaptive_eps::dataset::{self, cross_class_pairs, distance, Dataset, Format, LabeledPoint};
use adaptive_eps::density::{default_shape, rbf};
use adaptive_eps::diagnostics::g_eval;
use adaptive_eps::expansion::{expand, RadiusResult, RunConfig};
use adaptive_eps::io::{read_radii, write_atomic, write_radii};
use adaptive_eps::oracle::{fine_step_expand, isolated_radius, OracleConfig};
use adaptive_eps::regions::nearest_foreign;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ISOLATED_TOL: f64 = 1e-12;
const ISOLATED_BUDGET: Duration = Duration::from_millis(1);
const MAX_SWEEPS_DEFAULT: usize = 47;
const STRICT_SLACK_TOL: f64 = 1e-12;
const STRICT_BUDGET: Duration = Duration::from_secs(5);
const ORACLE_FINE_STEP: f64 = 1e-4;
const ORACLE_TOL: f64 = 2e-4;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const IRIS_BUDGET: Duration = Duration::from_secs(1);
const METRIC_TOL: f64 = 1e-9;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.ok);
    let detail = parts
        .iter()
        .map(|p| format!("{}{}", if p.ok { "" } else { "FAILED " }, p.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { ok, detail }
}

fn isolated_point() -> Outcome {
    let ds = Dataset::new(vec![
        LabeledPoint::new(vec![0.0, 0.0, 0.0], "A"),
        LabeledPoint::new(vec![100.0, 0.0, 0.0], "B"),
    ])
    .unwrap();
    let cfg = RunConfig::default();
    let t = Instant::now();
    let r = expand(&ds, &cfg).unwrap();
    let elapsed = t.elapsed();
    let expect = isolated_radius(1.0, 1e-20);
    let err = (r.epsilons[0] - expect)
        .abs()
        .max((r.epsilons[1] - expect).abs());
    all(vec![
        check(
            err <= ISOLATED_TOL,
            format!("eps {:.10} vs {expect:.10}, |err| {err:.1e}", r.epsilons[0]),
        ),
        check(
            (expect - 0.581_976_71).abs() < 1e-8,
            "closed form ~ 0.58197671",
        ),
        check(
            elapsed < ISOLATED_BUDGET,
            format!("{elapsed:?} < {ISOLATED_BUDGET:?}"),
        ),
    ])
}

fn sweep_bound(corpus: &[Dataset], paper: &[RadiusResult], strict: &[RadiusResult]) -> Outcome {
    let worst = paper.iter().chain(strict).map(|r| r.sweeps).max().unwrap();
    check(
        worst <= MAX_SWEEPS_DEFAULT,
        format!(
            "{} datasets x 2 modes, max sweeps {worst} <= {MAX_SWEEPS_DEFAULT}",
            corpus.len()
        ),
    )
}

fn strict_non_overlap(corpus: &[Dataset]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let mut worst_g: f64 = 0.0;
    let mut verify_failures = 0;
    for (k, ds) in corpus.iter().enumerate() {
        let r = expand(ds, &RunConfig::strict()).unwrap();
        let g = g_eval(ds, &r.epsilons).unwrap();
        worst_g = g.iter().copied().fold(worst_g, f64::min);

        let data = dir.path().join(format!("d{k}.csv"));
        let radii = dir.path().join(format!("r{k}.csv"));
        write_atomic(&data, |w| dataset::save(ds, w, Format::Csv)).unwrap();
        write_atomic(&radii, |w| write_radii(w, ds, &r, None)).unwrap();
        let out = run_cli([
            "adaptive-eps",
            "verify",
            "--input",
            data.to_str().unwrap(),
            "--radii",
            radii.to_str().unwrap(),
        ]);
        if out.exit_code != 0 {
            verify_failures += 1;
        }
    }
    let total = t.elapsed();
    all(vec![
        check(
            worst_g >= -STRICT_SLACK_TOL,
            format!("min g component {worst_g:.3e} >= -{STRICT_SLACK_TOL:e}"),
        ),
        check(
            verify_failures == 0,
            format!(
                "verify exit 0 on {}/{}",
                corpus.len() - verify_failures,
                corpus.len()
            ),
        ),
        check(
            total < STRICT_BUDGET,
            format!("{total:.2?} < {STRICT_BUDGET:?}"),
        ),
    ])
}

fn paper_overlap_bound(corpus: &[Dataset], paper: &[RadiusResult]) -> Outcome {
    let mut violations = 0;
    let mut overlapping = 0;
    let mut worst_ratio: f64 = 0.0;
    for (ds, r) in corpus.iter().zip(paper) {
        for (i, j) in cross_class_pairs(ds) {
            let slack =
                distance(ds.coords(i), ds.coords(j)).unwrap() - (r.epsilons[i] + r.epsilons[j]);
            if slack < 0.0 {
                overlapping += 1;
                let bound = r.last_steps[i] + r.last_steps[j];
                worst_ratio = worst_ratio.max(-slack / bound);
                if slack < -bound {
                    violations += 1;
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{overlapping} overlapping pairs, {violations} beyond one step each (worst overlap/bound {worst_ratio:.3})"),
    )
}

fn oracle_agreement() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut radii = 0;
    for ds in common::small_corpus(20) {
        let r = expand(&ds, &RunConfig::strict()).unwrap();
        let cfg = OracleConfig {
            fine_step: ORACLE_FINE_STEP,
            min_step: 1e-20,
            shape: default_shape(&ds).unwrap(),
        };
        let fine = fine_step_expand(&ds, &cfg).unwrap();
        for (a, b) in fine.iter().zip(&r.epsilons) {
            worst = worst.max((a - b).abs());
            radii += 1;
        }
    }
    let elapsed = t.elapsed();
    all(vec![
        check(
            worst <= ORACLE_TOL,
            format!("{radii} radii, max |strict - oracle| {worst:.2e} <= {ORACLE_TOL:e}"),
        ),
        check(
            elapsed < ORACLE_BUDGET,
            format!("{elapsed:.2?} < {ORACLE_BUDGET:?}"),
        ),
    ])
}

fn density_throttling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pts = Vec::new();
    // A: 12 points packed tightly; B: 4 points spread out, far away
    for _ in 0..12 {
        pts.push(LabeledPoint::new(
            vec![rng.random_range(0.0..0.05), rng.random_range(0.0..0.05)],
            "A",
        ));
    }
    for k in 0..4 {
        pts.push(LabeledPoint::new(
            vec![1000.0 + 3.0 * k as f64, rng.random_range(0.0..3.0)],
            "B",
        ));
    }
    let ds = Dataset::new(pts).unwrap();
    let r = expand(&ds, &RunConfig::default()).unwrap();
    let (a, b): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| ds.class_id(i).as_str() == "A");
    let min_rho_a = a
        .iter()
        .map(|&i| r.densities[i])
        .fold(f64::INFINITY, f64::min);
    let max_rho_b = b.iter().map(|&i| r.densities[i]).fold(0.0, f64::max);
    let max_eps_a = a.iter().map(|&i| r.epsilons[i]).fold(0.0, f64::max);
    let min_eps_b = b
        .iter()
        .map(|&i| r.epsilons[i])
        .fold(f64::INFINITY, f64::min);
    all(vec![
        check(
            min_rho_a > max_rho_b,
            format!("density A >= {min_rho_a:.3} > B <= {max_rho_b:.3}"),
        ),
        check(
            max_eps_a < min_eps_b,
            format!("radius A <= {max_eps_a:.3e} < B >= {min_eps_b:.3e}"),
        ),
    ])
}

fn iris_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let iris = common::iris_path();
    let radii = dir.path().join("radii.csv");
    let t = Instant::now();
    let out = run_cli([
        "adaptive-eps",
        "compute",
        "--input",
        iris.to_str().unwrap(),
        "--shape",
        "auto",
        "--mode",
        "strict",
        "--output",
        radii.to_str().unwrap(),
    ]);
    let elapsed = t.elapsed();
    if out.exit_code != 0 {
        return check(
            false,
            format!("compute exit {}: {:?}", out.exit_code, out.diagnostics),
        );
    }
    let eps = read_radii(std::fs::File::open(&radii).unwrap()).unwrap();
    let positive = eps.epsilons.iter().filter(|e| **e > 0.0).count();
    let verify = run_cli([
        "adaptive-eps",
        "verify",
        "--input",
        iris.to_str().unwrap(),
        "--radii",
        radii.to_str().unwrap(),
    ]);

    // densest vs sparsest same-class density decile, among points that cannot
    // collide (nearest foreign point beyond twice the largest possible radius)
    let ds = common::iris();
    let densities = eps.densities.clone().unwrap();
    let reach = 2.0 / (std::f64::consts::E - 1.0);
    let mut far: Vec<usize> = (0..ds.len())
        .filter(|&i| nearest_foreign(&ds, i).unwrap().1 > reach)
        .collect();
    far.sort_by(|&a, &b| densities[a].total_cmp(&densities[b]).then(a.cmp(&b)));
    let k = far.len().div_ceil(10);
    let mean = |ix: &[usize]| ix.iter().map(|&i| eps.epsilons[i]).sum::<f64>() / ix.len() as f64;
    let sparse = mean(&far[..k]);
    let dense = mean(&far[far.len() - k..]);

    all(vec![
        check(elapsed < IRIS_BUDGET, format!("compute {elapsed:.2?} < {IRIS_BUDGET:?}")),
        check(
            eps.epsilons.len() == 150 && positive == 150,
            format!("{positive}/{} radii > 0", eps.epsilons.len()),
        ),
        check(verify.exit_code == 0, format!("verify exit {}", verify.exit_code)),
        check(
            k > 0 && dense > sparse,
            format!(
                "{} far points, decile size {k}: mean radius densest {dense:.3e} > sparsest {sparse:.3e}",
                far.len()
            ),
        ),
    ])
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_adaptive-eps");
    let big = common::corpus()
        .into_iter()
        .max_by_key(|d| d.len())
        .unwrap();
    let big_path = dir.path().join("big.csv");
    write_atomic(&big_path, |w| dataset::save(&big, w, Format::Csv)).unwrap();

    let mut detail = Vec::new();
    let mut ok = true;
    for (name, input) in [("iris", common::iris_path()), ("random", big_path.clone())] {
        for mode in ["strict", "paper"] {
            let mut files = Vec::new();
            let runs: Vec<(String, Option<usize>)> = vec![
                ("run1".into(), None),
                ("run2".into(), None),
                ("run3".into(), None),
                ("t1".into(), Some(1)),
                ("t4".into(), Some(4)),
                ("t8".into(), Some(8)),
            ];
            for (tag, threads) in runs {
                let out = dir.path().join(format!("{name}-{mode}-{tag}.csv"));
                let mut cmd = Command::new(bin);
                cmd.args([
                    "compute",
                    "--input",
                    input.to_str().unwrap(),
                    "--mode",
                    mode,
                    "--output",
                ])
                .arg(&out);
                if let Some(t) = threads {
                    cmd.args(["--threads", &t.to_string()]);
                }
                let status = cmd.status().unwrap();
                ok &= status.success();
                files.push(read(&out));
            }
            let same = files.windows(2).all(|w| w[0] == w[1]);
            ok &= same;
            detail.push(format!(
                "{name}/{mode}: {}",
                if same { "identical" } else { "DIFFER" }
            ));
        }
    }
    check(
        ok,
        format!("3 runs + threads {{1,4,8}}: {}", detail.join(", ")),
    )
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_default()
}

fn metric_and_rbf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=8);
        let mut v = || -> Vec<f64> { (0..dim).map(|_| rng.random_range(-100.0..100.0)).collect() };
        let (a, b, c) = (v(), v(), v());
        let ab = distance(&a, &b).unwrap();
        let ba = distance(&b, &a).unwrap();
        let bc = distance(&b, &c).unwrap();
        let ac = distance(&a, &c).unwrap();
        let aa = distance(&a, &a).unwrap();
        let fine = ab >= 0.0
            && (ab - ba).abs() <= METRIC_TOL
            && aa.abs() <= METRIC_TOL
            && ab > METRIC_TOL
            && ac <= ab + bc + METRIC_TOL;
        bad += usize::from(!fine);
    }
    let rbf0 = rbf(0.0, 1.3).unwrap();
    let mut rs: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..50.0)).collect();
    rs.sort_by(f64::total_cmp);
    let vals: Vec<f64> = rs.iter().map(|&r| rbf(r, 1.3).unwrap()).collect();
    let monotone = vals.windows(2).all(|w| w[1] <= w[0] + METRIC_TOL);
    let strictly = rs
        .windows(2)
        .zip(vals.windows(2))
        .all(|(r, v)| r[0] == r[1] || v[1] < v[0]);
    all(vec![
        check((rbf0 - 1.0).abs() <= METRIC_TOL, format!("rbf(0) = {rbf0}")),
        check(monotone && strictly, "rbf decreasing on 1000 sorted radii"),
        check(
            bad == 0,
            format!("metric axioms hold on {}/1000 triples", 1000 - bad),
        ),
    ])
}

fn main() {
    let corpus = common::corpus();
    let paper: Vec<RadiusResult> = corpus
        .iter()
        .map(|d| expand(d, &RunConfig::default()).unwrap())
        .collect();
    let strict: Vec<RadiusResult> = corpus
        .iter()
        .map(|d| expand(d, &RunConfig::strict()).unwrap())
        .collect();

    let criteria: Vec<Criterion> = vec![
        ("1 closed-form isolated radius", Box::new(isolated_point)),
        (
            "2 default runs stop within 47 sweeps",
            Box::new(|| sweep_bound(&corpus, &paper, &strict)),
        ),
        // timed from scratch: strict expansion, file writes and verify
        (
            "3 strict mode never overlaps",
            Box::new(|| strict_non_overlap(&corpus)),
        ),
        (
            "4 paper-mode overlap within one step",
            Box::new(|| paper_overlap_bound(&corpus, &paper)),
        ),
        (
            "5 strict mode matches fine-step oracle",
            Box::new(oracle_agreement),
        ),
        (
            "6 denser class gets smaller radii",
            Box::new(density_throttling),
        ),
        ("7 Iris end to end", Box::new(iris_end_to_end)),
        ("8 deterministic output", Box::new(determinism)),
        ("9 metric and kernel basics", Box::new(metric_and_rbf)),
    ];

    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        println!(
            "[{}] criterion {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.ok);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
