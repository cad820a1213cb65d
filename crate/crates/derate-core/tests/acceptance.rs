//! Release gate for the library: one test per shipped acceptance criterion.
//! Criteria 8 and 9 exercise the command-line pipeline and live in the CLI
//! crate's acceptance suite.

use std::time::Instant;

use derate_core::campaign::{run_campaign, CampaignPlan, CheckerConfig, FdrRecord};
use derate_core::eval::{fold_split, metrics, CvPlan};
use derate_core::ml::kernel::KernelKind;
use derate_core::ml::svr::solve_dual;
use derate_core::ml::{fit, Dataset, Matrix, Metric, ModelSpec, Standardizer, TreeLimits};
use derate_core::netlist::Netlist;
use derate_core::rng::{next_below, stream_rng};
use derate_core::sim::{simulate, Fault, Stimulus, Trace};

fn next_f64(rng: &mut impl rand_core::RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn random_rows(seed: u64, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0xACC, 0);
    (0..n)
        .map(|_| (0..d).map(|_| lo + (hi - lo) * next_f64(&mut rng)).collect())
        .collect()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("ff{i}")).collect()
}

// --- criterion 1: exhaustive campaign vs. brute-force enumeration ----------

const MINI: &str = "\
module mini
input d1 d2 vin
output pay vld par
wire n1 n2 n3 n5 q1 q2 qv qp q5
cell a1 AND2 2 n1 d1 d2
dff r1 1 q1 n1
cell x1 XOR2 1 n2 q1 d2
dff r2 1 q2 n2
dff rv 1 qv vin
cell n5x XOR2 1 n5 q5 qv
dff r5 1 q5 n5
cell x3 XOR2 1 n3 q2 q5
dff rp 1 qp n3
cell pb BUF 2 pay q2
cell vb BUF 2 vld qv
cell ob BUF 1 par qp
endmodule
";

const PAY_COL: usize = 0;
const VLD_COL: usize = 1;

fn mini_stimulus(cycles: u32) -> Stimulus {
    let mut rng = stream_rng(0xFEED, 0xACC, 1);
    let mut assignments = Vec::new();
    for t in 0..cycles {
        for name in ["d1", "d2", "vin"] {
            let bit = next_below(&mut rng, 2) == 1;
            assignments.push((t, name.to_string(), bit));
        }
    }
    Stimulus::new(cycles, None, assignments).unwrap()
}

/// Word stream as the checker defines it, rebuilt from single trace bits.
fn oracle_words(trace: &Trace) -> Vec<u64> {
    (0..trace.cycles())
        .filter(|&t| trace.get(t, VLD_COL))
        .map(|t| trace.get(t, PAY_COL) as u64)
        .collect()
}

fn traces_differ_from(golden: &Trace, faulty: &Trace, from_cycle: u32) -> bool {
    (from_cycle..golden.cycles()).any(|t| {
        (0..golden.width()).any(|b| golden.get(t, b) != faulty.get(t, b))
    })
}

#[test]
fn acceptance_01_exhaustive_campaign_matches_brute_force() {
    let started = Instant::now();
    let net = Netlist::parse(MINI).unwrap();
    assert_eq!(net.ff_count(), 5);
    let cycles = 48;
    let stim = mini_stimulus(cycles);
    let checker = CheckerConfig {
        payload: vec!["pay".to_string()],
        valid: "vld".to_string(),
    };

    let plan = CampaignPlan::exhaustive(&net, &stim, None).unwrap();
    assert_eq!(plan.total_runs(), 5 * cycles as u64);
    let table = run_campaign(&net, &stim, &plan, &checker).unwrap();

    let golden = simulate(&net, &stim, None).unwrap().trace;
    let golden_words = oracle_words(&golden);
    let expected: Vec<FdrRecord> = net
        .ff_ids()
        .map(|ff| {
            let mut output_failures = 0u32;
            let mut application_failures = 0u32;
            for cycle in 0..cycles {
                let faulty = simulate(&net, &stim, Some(Fault { ff, cycle }))
                    .unwrap()
                    .trace;
                if traces_differ_from(&golden, &faulty, cycle) {
                    output_failures += 1;
                    if oracle_words(&faulty) != golden_words {
                        application_failures += 1;
                    }
                }
            }
            FdrRecord {
                ff_name: net.ff_name(ff).to_string(),
                runs: cycles,
                output_failures,
                application_failures,
                fdr_output: output_failures as f64 / cycles as f64,
                fdr_application: application_failures as f64 / cycles as f64,
            }
        })
        .collect();

    assert_eq!(table.records, expected);
    assert!(
        expected.iter().any(|r| r.output_failures > 0),
        "fixture should produce at least one failing injection"
    );
    assert!(started.elapsed().as_secs_f64() < 5.0);
}

// --- criterion 2: linear-kernel ridge collapses to ordinary least squares --

#[test]
fn acceptance_02_kernel_ridge_matches_ols_on_linear_kernel() {
    let rows = random_rows(2, 30, 5, -2.0, 2.0);
    let x = Matrix::from_rows(&rows);
    let z = Standardizer::fit(&x).transform(&x);
    let w = [0.08, -0.05, 0.04, 0.10, -0.07];
    let y: Vec<f64> = z
        .row_iter()
        .map(|r| 0.5 + r.iter().zip(w).map(|(v, c)| v * c).sum::<f64>())
        .collect();
    let data = Dataset::new(x, y, ids(30)).unwrap();

    let ols = fit(&ModelSpec::LeastSquares, &data).unwrap();
    let ridge = fit(
        &ModelSpec::KernelRidge {
            alpha: 1e-9,
            kernel: KernelKind::Linear,
        },
        &data,
    )
    .unwrap();

    let queries = Matrix::from_rows(&random_rows(3, 10, 5, -2.0, 2.0));
    let a = ols.predict(&queries).unwrap();
    let b = ridge.predict(&queries).unwrap();
    for (pa, pb) in a.iter().zip(&b) {
        assert!(
            (pa - pb).abs() <= 1e-6,
            "ols {pa} vs kernel ridge {pb} diverge"
        );
    }
}

// --- criterion 3: k-NN vs. an exhaustive-scan oracle ------------------------

fn oracle_standardize(train: &[Vec<f64>], row: &[f64]) -> Vec<f64> {
    let n = train.len() as f64;
    let d = row.len();
    let mut mean = vec![0.0; d];
    for r in train {
        for (m, &v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for r in train {
        for ((s, &v), &m) in var.iter_mut().zip(r).zip(&mean) {
            let c = v - m;
            *s += c * c;
        }
    }
    (0..d)
        .map(|c| {
            let sd = (var[c] / n).sqrt();
            if sd == 0.0 {
                0.0
            } else {
                (row[c] - mean[c]) / sd
            }
        })
        .collect()
}

fn oracle_knn(
    train: &[Vec<f64>],
    y: &[f64],
    k: usize,
    metric: Metric,
    query: &[f64],
) -> f64 {
    let zq = oracle_standardize(train, query);
    let mut ranked: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let zr = oracle_standardize(train, row);
            let d = match metric {
                Metric::Manhattan => {
                    zr.iter().zip(&zq).map(|(a, b)| (a - b).abs()).sum()
                }
                Metric::Euclidean => zr
                    .iter()
                    .zip(&zq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
            };
            (d, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let selected = &ranked[..k];
    let exact: Vec<usize> = selected
        .iter()
        .filter(|(d, _)| *d == 0.0)
        .map(|&(_, i)| i)
        .collect();
    if !exact.is_empty() {
        return exact.iter().map(|&i| y[i]).sum::<f64>() / exact.len() as f64;
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for &(d, i) in selected {
        let w = 1.0 / d;
        weighted += w * y[i];
        total += w;
    }
    weighted / total
}

#[test]
fn acceptance_03_knn_matches_exhaustive_scan_oracle() {
    let train = random_rows(4, 200, 4, -3.0, 3.0);
    let mut rng = stream_rng(5, 0xACC, 0);
    let y: Vec<f64> = (0..200).map(|_| next_f64(&mut rng)).collect();

    // fresh queries plus a few training rows to hit the zero-distance rule
    let mut queries = random_rows(6, 60, 4, -3.0, 3.0);
    queries.extend(train.iter().take(5).cloned());

    for metric in [Metric::Manhattan, Metric::Euclidean] {
        for k in [1usize, 3, 5] {
            let data = Dataset::new(Matrix::from_rows(&train), y.clone(), ids(200)).unwrap();
            let model = fit(&ModelSpec::Knn { k, metric }, &data).unwrap();
            let got = model.predict(&Matrix::from_rows(&queries)).unwrap();
            for (q, &g) in queries.iter().zip(&got) {
                let want = oracle_knn(&train, &y, k, metric, q);
                assert_eq!(g, want, "k={k} metric={metric:?} query={q:?}");
            }
        }
    }
}

// --- criterion 4: regression tree purity and the single-leaf collapse ------

#[test]
fn acceptance_04_tree_memorizes_and_single_leaf_predicts_the_mean() {
    let rows = random_rows(7, 40, 3, -1.0, 1.0);
    let mut rng = stream_rng(8, 0xACC, 0);
    let y: Vec<f64> = (0..40).map(|_| next_f64(&mut rng)).collect();

    let data = Dataset::new(Matrix::from_rows(&rows), y.clone(), ids(40)).unwrap();
    let unrestricted = fit(
        &ModelSpec::Tree {
            limits: TreeLimits::default(),
        },
        &data,
    )
    .unwrap();
    let on_train = unrestricted.predict(&Matrix::from_rows(&rows)).unwrap();
    let r2 = metrics(&y, &on_train).unwrap().r2;
    assert!((1.0 - r2).abs() <= 1e-12, "training r2 {r2}");

    let stump = fit(
        &ModelSpec::Tree {
            limits: TreeLimits {
                max_depth: 0,
                max_leaf_nodes: 1,
                min_samples_leaf: 1,
            },
        },
        &data,
    )
    .unwrap();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let elsewhere = Matrix::from_rows(&random_rows(9, 8, 3, -5.0, 5.0));
    for p in stump.predict(&elsewhere).unwrap() {
        assert!((p - mean).abs() <= 1e-12);
    }
}

// --- criterion 5: SVR dual optimality against projected gradient -----------

/// Dual objective in the halved variables: W(b) = y'b - eps*|b|_1 - b'Kb/2.
fn dual_objective(k: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * beta[j] * k.get(i, j);
        }
    }
    let linear: f64 = y.iter().zip(beta).map(|(yi, bi)| yi * bi).sum();
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    linear - 0.05 * l1 - 0.5 * quad
}

/// Projects v onto the box [0, c]^2n intersected with sum(alpha) =
/// sum(alpha*), by bisection on the hyperplane multiplier.
fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
    let clip = |x: f64| x.clamp(0.0, c);
    let gap = |lambda: f64| -> f64 {
        let plus: f64 = (0..n).map(|i| clip(v[i] - lambda)).sum();
        let minus: f64 = (0..n).map(|i| clip(v[n + i] + lambda)).sum();
        plus - minus
    };
    let bound = c + 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut z = vec![0.0; 2 * n];
    for i in 0..n {
        z[i] = clip(v[i] - lambda);
        z[n + i] = clip(v[n + i] + lambda);
    }
    z
}

/// Maximizes the doubled-variable dual with accelerated projected gradient;
/// momentum restarts whenever a step loses ground.
fn projected_gradient_oracle(k: &Matrix, y: &[f64], c: f64, epsilon: f64) -> f64 {
    let n = y.len();
    let row_max = (0..n)
        .map(|i| (0..n).map(|j| k.get(i, j).abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let step = 1.0 / (2.0 * row_max + 1e-9);

    let objective = |z: &[f64]| -> f64 {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += beta[i] * beta[j] * k.get(i, j);
            }
        }
        let linear: f64 = (0..n).map(|i| y[i] * beta[i]).sum();
        let slab: f64 = z.iter().sum::<f64>() * epsilon;
        linear - slab - 0.5 * quad
    };
    let ascend = |z: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let kb: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| k.get(i, j) * beta[j]).sum())
            .collect();
        let mut v = vec![0.0; 2 * n];
        for i in 0..n {
            v[i] = z[i] + step * (y[i] - epsilon - kb[i]);
            v[n + i] = z[n + i] + step * (-y[i] - epsilon + kb[i]);
        }
        project(&v, n, c)
    };

    let mut z = vec![0.0; 2 * n];
    let mut carry = z.clone();
    let mut momentum = 1.0f64;
    let mut best = objective(&z);
    let mut stale = 0u32;
    for _ in 0..60_000 {
        let mut next = ascend(&carry);
        if objective(&next) < objective(&z) {
            momentum = 1.0;
            next = ascend(&z);
        }
        let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        carry = next
            .iter()
            .zip(&z)
            .map(|(a, b)| a + (momentum - 1.0) / m_next * (a - b))
            .collect();
        z = next;
        momentum = m_next;

        let w = objective(&z);
        if w > best + 1e-13 {
            best = w;
            stale = 0;
        } else {
            stale += 1;
            if stale > 2_000 {
                break;
            }
        }
    }
    best
}

#[test]
fn acceptance_05_svr_dual_reaches_the_oracle_optimum() {
    let n = 20;
    let rows = random_rows(10, n, 3, -1.0, 1.0);
    let mut rng = stream_rng(11, 0xACC, 0);
    let y: Vec<f64> = rows
        .iter()
        .map(|r| 0.3 + 0.2 * r[0] - 0.15 * r[1] + 0.1 * (next_f64(&mut rng) - 0.5))
        .collect();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let dot = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            k.set(i, j, dot);
        }
    }
    let (c, epsilon) = (2.0, 0.05);

    let solution = solve_dual(&k, &y, c, epsilon, 1e-3, 10 * (n as u64) * (n as u64));
    assert!(solution.converged);

    let w_smo = dual_objective(&k, &y, &solution.beta);
    let w_oracle = projected_gradient_oracle(&k, &y, c, epsilon);
    assert!(
        (w_smo - w_oracle).abs() <= 1e-3,
        "smo {w_smo} vs oracle {w_oracle}"
    );

    for step in solution.objective_trace.windows(2) {
        assert!(step[1] >= step[0] - 1e-9, "objective regressed: {step:?}");
    }

    for i in 0..n {
        let f: f64 = (0..n).map(|j| solution.beta[j] * k.get(i, j)).sum::<f64>()
            + solution.bias;
        let residual = (y[i] - f).abs();
        if residual < epsilon - 1e-3 {
            assert!(
                solution.beta[i].abs() <= 1e-9,
                "interior point {i} carries weight {}",
                solution.beta[i]
            );
        }
        if (solution.beta[i].abs() - c).abs() <= 1e-12 {
            assert!(
                residual >= epsilon - 1e-3 - 1e-12,
                "bound point {i} has slack residual {residual}"
            );
        }
    }
}

// --- criterion 6: score identities ------------------------------------------

#[test]
fn acceptance_06_score_identities_hold() {
    let s = metrics(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
    assert_eq!(s.mae, 0.5);
    assert_eq!(s.max, 0.5);
    assert_eq!(s.rmse, 0.5);
    assert_eq!(s.ev, 0.0);
    assert_eq!(s.r2, 0.0);

    let mut rng = stream_rng(12, 0xACC, 0);
    for _ in 0..1000 {
        let y: Vec<f64> = (0..16).map(|_| next_f64(&mut rng)).collect();
        let p: Vec<f64> = (0..16).map(|_| next_f64(&mut rng)).collect();
        let s = metrics(&y, &p).unwrap();
        assert!(s.mae <= s.rmse + 1e-12);
        assert!(s.rmse <= s.max + 1e-12);
        assert!(s.ev >= s.r2 - 1e-12);
    }
}

// --- criterion 7: application failures never exceed output failures --------

#[test]
fn acceptance_07_application_failures_are_a_subset() {
    let net = derate_core::demo::netlist();
    let stim = derate_core::demo::stimulus(21, 96);
    let checker = derate_core::demo::checker();
    let plan = CampaignPlan::random(&net, &stim, 16, 22, None).unwrap();
    assert!(plan.total_runs() >= 1000);

    let table = run_campaign(&net, &stim, &plan, &checker).unwrap();
    assert_eq!(table.total_runs, plan.total_runs());
    for r in &table.records {
        assert!(
            r.application_failures <= r.output_failures,
            "{}: app {} > out {}",
            r.ff_name,
            r.application_failures,
            r.output_failures
        );
        assert!(r.output_failures <= r.runs);
        assert_eq!(r.fdr_output, r.output_failures as f64 / r.runs as f64);
        assert_eq!(
            r.fdr_application,
            r.application_failures as f64 / r.runs as f64
        );
    }
}

// --- criterion 10: per-fold standardizer hygiene ----------------------------

#[test]
fn acceptance_10_fold_standardizer_is_clean_and_leak_free() {
    let mut rows = random_rows(13, 40, 6, -4.0, 4.0);
    for r in &mut rows {
        r[3] = 2.5;
    }
    let plan = CvPlan::default();

    for fold in 0..plan.folds {
        let (train_idx, test_idx) = fold_split(rows.len(), &plan, fold).unwrap();
        let train_rows: Vec<Vec<f64>> =
            train_idx.iter().map(|&i| rows[i].clone()).collect();
        let train = Matrix::from_rows(&train_rows);
        let s = Standardizer::fit(&train);
        let z = s.transform(&train);

        let n = train_rows.len() as f64;
        for c in 0..6 {
            let col: Vec<f64> = z.row_iter().map(|r| r[c]).collect();
            let mean = col.iter().sum::<f64>() / n;
            assert!(mean.abs() <= 1e-9, "fold {fold} column {c} mean {mean}");
            if c == 3 {
                assert_eq!(s.std()[c], 0.0);
                assert!(col.iter().all(|&v| v == 0.0));
            } else {
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                assert!(
                    (var.sqrt() - 1.0).abs() <= 1e-9,
                    "fold {fold} column {c} sigma {}",
                    var.sqrt()
                );
            }
        }

        // mangling every test row must not move the fitted parameters
        let mut mangled = rows.clone();
        for &i in &test_idx {
            for v in &mut mangled[i] {
                *v = 999.0;
            }
        }
        let mangled_rows: Vec<Vec<f64>> =
            train_idx.iter().map(|&i| mangled[i].clone()).collect();
        let s2 = Standardizer::fit(&Matrix::from_rows(&mangled_rows));
        assert_eq!(s.mean(), s2.mean());
        assert_eq!(s.std(), s2.std());
    }
}
