//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use connectedness::connect::vd;
use connectedness::identify::{block_inverse_2x2, clusterizer, ma_coefficients, make_identification};
use connectedness::returns::summary_stats;
use connectedness::rolling::{roll, RollingConfig};
use connectedness::synth::{sender_dgp, SenderDesign};
use connectedness::varnet::{adaptive_elastic_net_fit, ElasticNetOptions};
use connectedness::{decompose, measures, ClusterSpec, OrderingMode, ReturnPanel, Scheme};
use ndarray::{array, s, Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn random_sigma(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let b = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    b.dot(&b.t()) + Array2::<f64>::eye(n) * 0.1
}

fn random_stable_phi(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Array2<f64>> {
    let raw: Vec<Array2<f64>> = (0..p)
        .map(|_| Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0)))
        .collect();
    let norm: f64 = raw
        .iter()
        .map(|m| {
            m.rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .sum();
    let scale = rng.random_range(0.1..0.9) / norm;
    raw.into_iter().map(|m| m * scale).collect()
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize, c: usize) -> ClusterSpec {
    let mut assignment: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    assignment.shuffle(rng);
    let mut order: Vec<usize> = (0..c).collect();
    order.shuffle(rng);
    ClusterSpec::new((0..c).map(|k| format!("k{k}")).collect(), assignment, Some(order)).unwrap()
}

/// Random stable VAR instance drawn from the shared suite.
struct Instance {
    n: usize,
    h: usize,
    sigma: Array2<f64>,
    ma: connectedness::MaCoefficients,
}

fn suite(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = 2 + k % 7;
            let p = 1 + (k / 7) % 3;
            let h = [1, 2, 12][k % 3];
            let sigma = random_sigma(&mut rng, n);
            let ma = ma_coefficients(&random_stable_phi(&mut rng, n, p), h).unwrap();
            Instance { n, h, sigma, ma }
        })
        .collect()
}

fn special_cases() -> Outcome {
    let start = Instant::now();
    let cases = suite(101, 126);
    let mut worst: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        let gen = vd(
            &c.ma,
            &make_identification(c.sigma.view(), Scheme::Generalized, None).unwrap(),
            c.h,
        )
        .unwrap();
        let one = vd(
            &c.ma,
            &clusterizer(c.sigma.view(), &ClusterSpec::single(c.n)).unwrap(),
            c.h,
        )
        .unwrap();
        let orth = vd(
            &c.ma,
            &make_identification(c.sigma.view(), Scheme::Orthogonalized, None).unwrap(),
            c.h,
        )
        .unwrap();
        let singles = vd(
            &c.ma,
            &clusterizer(c.sigma.view(), &ClusterSpec::singletons(c.n)).unwrap(),
            c.h,
        )
        .unwrap();
        let d = max_abs_diff(&one.theta, &gen.theta).max(max_abs_diff(&singles.theta, &orth.theta));
        ensure(d < 1e-10, || {
            format!("instance {k} (N={}, H={}) differs by {d:.2e}", c.n, c.h)
        })?;
        worst = worst.max(d);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} VARs, max diff {worst:.1e}, {:.2}s",
        cases.len(),
        elapsed.as_secs_f64()
    ))
}

fn block_diagonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut count, mut worst_cross, mut worst_rec): (usize, f64, f64) = (0, 0.0, 0.0);
    for c in suite(101, 126) {
        for clusters in 1..=c.n.min(4) {
            let spec = random_spec(&mut rng, c.n, clusters);
            let id = clusterizer(c.sigma.view(), &spec).unwrap();
            let scale = max_abs(&id.omega);
            for i in 0..c.n {
                for j in 0..c.n {
                    if spec.cluster_of(i) != spec.cluster_of(j) {
                        worst_cross = worst_cross.max(id.omega[[i, j]].abs() / scale);
                    }
                }
            }
            let rec = id.q.dot(&id.omega).dot(&id.q.t());
            worst_rec = worst_rec.max(max_abs_diff(&rec, &c.sigma) / max_abs(&c.sigma));
            count += 1;
        }
    }
    ensure(worst_cross < 1e-8, || {
        format!("cross-cluster Ω entry {worst_cross:.2e}")
    })?;
    ensure(worst_rec < 1e-10, || format!("Q Ω Qᵀ misses Σ by {worst_rec:.2e}"))?;
    Ok(format!(
        "{count} constructions, cross {worst_cross:.1e}, reconstruction {worst_rec:.1e}"
    ))
}

fn row_stochastic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut worst, mut worst_raw): (f64, f64) = (0.0, 0.0);
    for c in suite(101, 126) {
        let spec = random_spec(&mut rng, c.n, c.n.min(3));
        for scheme in Scheme::ALL {
            for mode in [OrderingMode::Fixed, OrderingMode::Averaged] {
                let d = decompose(&c.ma, c.sigma.view(), scheme, &spec, mode, c.h).unwrap();
                for row in d.theta.rows() {
                    worst = worst.max((row.sum() - 1.0).abs());
                }
                if scheme == Scheme::Orthogonalized {
                    for row in d.theta_raw.rows() {
                        worst_raw = worst_raw.max((row.sum() - 1.0).abs());
                    }
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("normalized row sum off by {worst:.2e}"))?;
    ensure(worst_raw < 1e-10, || {
        format!("orthogonalized raw row sum off by {worst_raw:.2e}")
    })?;
    Ok(format!("normalized {worst:.1e}, orthogonalized raw {worst_raw:.1e}"))
}

fn measure_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for c in suite(101, 126) {
        for clusters in 1..=c.n.min(4) {
            let spec = random_spec(&mut rng, c.n, clusters);
            for scheme in Scheme::ALL {
                let d = decompose(&c.ma, c.sigma.view(), scheme, &spec, OrderingMode::Averaged, c.h).unwrap();
                let r = measures(&d, &spec).unwrap();
                for k in 0..clusters {
                    worst = worst.max((r.own[k] + r.comove[k] + r.contagion[k] - 1.0).abs());
                }
                worst = worst.max((r.within_cluster + r.cross_cluster - r.system_wide).abs());
                count += 1;
            }
        }
    }
    ensure(worst < 1e-9, || format!("identity off by {worst:.2e}"))?;
    Ok(format!("{count} decompositions, max deviation {worst:.1e}"))
}

fn to_na(a: ndarray::ArrayView2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_na(m: &nalgebra::DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn three_cluster_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let sizes = [rng.random_range(1..4), rng.random_range(1..4), rng.random_range(1..4)];
        let n: usize = sizes.iter().sum();
        let (a, b) = (sizes[0], sizes[0] + sizes[1]);
        let sigma = random_sigma(&mut rng, n);
        let assignment: Vec<usize> = (0..n).map(|i| usize::from(i >= a) + usize::from(i >= b)).collect();
        let spec = ClusterSpec::new(vec!["x".into(), "y".into(), "z".into()], assignment, None).unwrap();
        let q_inv = clusterizer(sigma.view(), &spec).unwrap().q_inv;

        let direct = from_na(&to_na(sigma.slice(s![..b, ..b])).try_inverse().unwrap());
        let parts = block_inverse_2x2(
            sigma.slice(s![..a, ..a]),
            sigma.slice(s![..a, a..b]),
            sigma.slice(s![a..b, ..a]),
            sigma.slice(s![a..b, a..b]),
        )
        .unwrap();
        let mut partitioned = Array2::zeros((b, b));
        partitioned.slice_mut(s![..a, ..a]).assign(&parts.inv11);
        partitioned.slice_mut(s![..a, a..b]).assign(&parts.inv12);
        partitioned.slice_mut(s![a..b, ..a]).assign(&parts.inv21);
        partitioned.slice_mut(s![a..b, a..b]).assign(&parts.inv22);
        let d = max_abs_diff(&partitioned, &direct) / max_abs(&direct).max(1.0);
        ensure(d < 1e-10, || {
            format!("case {case}: partitioned inverse differs by {d:.2e}")
        })?;

        let s11_inv = from_na(&to_na(sigma.slice(s![..a, ..a])).try_inverse().unwrap());
        for inv in [&direct, &partitioned] {
            let mut expected = Array2::<f64>::eye(n);
            expected
                .slice_mut(s![a..b, ..a])
                .assign(&(-sigma.slice(s![a..b, ..a]).dot(&s11_inv)));
            let (s31, s32) = (sigma.slice(s![b.., ..a]), sigma.slice(s![b.., a..b]));
            let (i11, i12) = (inv.slice(s![..a, ..a]), inv.slice(s![..a, a..b]));
            let (i21, i22) = (inv.slice(s![a..b, ..a]), inv.slice(s![a..b, a..b]));
            expected
                .slice_mut(s![b.., ..a])
                .assign(&(-(s31.dot(&i11) + s32.dot(&i21))));
            expected
                .slice_mut(s![b.., a..b])
                .assign(&(-(s31.dot(&i12) + s32.dot(&i22))));
            let d = max_abs_diff(&q_inv, &expected) / max_abs(&expected).max(1.0);
            ensure(d < 1e-10, || format!("case {case}: Q⁻¹ differs by {d:.2e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("50 covariances, max relative diff {worst:.1e}"))
}

/// H = 2 decomposition of a bivariate VAR(1), written out cell by cell.
/// `qo` is `Q Ω` and `omega` the diagonal of `Ω`.
fn scalar_vd(phi: [[f64; 2]; 2], sig: [[f64; 2]; 2], qo: [[f64; 2]; 2], omega: [f64; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        let fev = sig[i][i]
            + phi[i][0] * phi[i][0] * sig[0][0]
            + 2.0 * phi[i][0] * phi[i][1] * sig[0][1]
            + phi[i][1] * phi[i][1] * sig[1][1];
        for j in 0..2 {
            let r0 = qo[i][j];
            let r1 = phi[i][0] * qo[0][j] + phi[i][1] * qo[1][j];
            out[i][j] = (r0 * r0 + r1 * r1) / omega[j] / fev;
        }
    }
    out
}

fn scalar_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut u = || rng.random_range(-0.4..0.4);
        let phi = [[u(), u()], [u(), u()]];
        let (s11, s22): (f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let s12 = rng.random_range(-0.9..0.9) * (s11 * s22).sqrt();
        let sig = [[s11, s12], [s12, s22]];
        let ma = ma_coefficients(&[array![[phi[0][0], phi[0][1]], [phi[1][0], phi[1][1]]]], 2).unwrap();
        let sig_m = array![[s11, s12], [s12, s22]];

        let m11 = s11.sqrt();
        let m21 = s12 / m11;
        let m22 = (s22 - m21 * m21).sqrt();
        let w2 = s22 - s12 * s12 / s11;
        let expected = [
            (
                Scheme::Orthogonalized,
                scalar_vd(phi, sig, [[m11, 0.0], [m21, m22]], [1.0, 1.0]),
            ),
            (Scheme::Generalized, scalar_vd(phi, sig, sig, [s11, s22])),
            (
                Scheme::Clustered,
                scalar_vd(phi, sig, [[s11, 0.0], [s12, w2]], [s11, w2]),
            ),
        ];
        for (scheme, want) in expected {
            let id = make_identification(sig_m.view(), scheme, Some(&ClusterSpec::singletons(2))).unwrap();
            let got = vd(&ma, &id, 2).unwrap().theta_raw;
            for i in 0..2 {
                for j in 0..2 {
                    let d = (got[[i, j]] - want[i][j]).abs();
                    ensure(d < 1e-12, || format!("{scheme} cell ({i},{j}) differs by {d:.2e}"))?;
                    worst = worst.max(d);
                }
            }
        }
    }
    Ok(format!("50 systems x 3 schemes, max diff {worst:.1e}"))
}

fn elastic_net() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let opts = ElasticNetOptions::default();

    // λ = 0 against an SVD least-squares solve with an intercept column.
    let (n, k) = (200, 6);
    let x = Array2::from_shape_fn((n, k), |_| rng.random_range(-1.0..1.0));
    let beta = Array1::from_shape_fn(k, |_| rng.random_range(-1.0..1.0));
    let y = x.dot(&beta) + Array1::from_shape_fn(n, |_| rng.random_range(-0.3..0.3)) + 2.0;
    let design = nalgebra::DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let target = nalgebra::DVector::from_iterator(n, y.iter().cloned());
    let sol = design.svd(true, true).solve(&target, 1e-14).unwrap();
    let fit = adaptive_elastic_net_fit(y.view(), x.view(), Array1::ones(k).view(), 0.0, &opts).unwrap();
    let mut ols_err = (fit.intercept - sol[0]).abs();
    for j in 0..k {
        ols_err = ols_err.max((fit.coef[j] - sol[j + 1]).abs());
    }
    ensure(ols_err < 1e-6, || {
        format!("λ = 0 differs from least squares by {ols_err:.2e}")
    })?;

    // One regressor: the standardized minimizer is S(zᵀy, λw/4) / (zᵀz + λw/2).
    let mut cf_err: f64 = 0.0;
    let tight = ElasticNetOptions { tol: 1e-12, ..opts };
    for _ in 0..50 {
        let n = 30;
        let x: Array1<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let slope = rng.random_range(-1.0..1.0);
        let y = x.mapv(|v| 0.5 + slope * v) + Array1::from_shape_fn(n, |_| rng.random_range(-0.5..0.5));
        let (lambda, w) = (rng.random_range(0.0..20.0), rng.random_range(0.2..3.0));
        let xm = x.mean().unwrap();
        let sd = (x.mapv(|v| (v - xm).powi(2)).sum() / n as f64).sqrt();
        let z = x.mapv(|v| (v - xm) / sd);
        let ym = y.mean().unwrap();
        let zy: f64 = z.iter().zip(&y).map(|(a, b)| a * (b - ym)).sum();
        let zz: f64 = z.iter().map(|a| a * a).sum();
        let t = lambda * w / 4.0;
        let shrunk = zy.signum() * (zy.abs() - t).max(0.0);
        let b_std = shrunk / (zz + lambda * w / 2.0);
        let fit = adaptive_elastic_net_fit(
            y.view(),
            x.view().into_shape_with_order((n, 1)).unwrap(),
            array![w].view(),
            lambda,
            &tight,
        )
        .unwrap();
        cf_err = cf_err.max((fit.coef[0] * sd - b_std).abs());
    }
    ensure(cf_err < 1e-8, || format!("closed form differs by {cf_err:.2e}"))?;

    // Correlated designs need many sweeps; the objective must never rise.
    let mut sweeps = 0;
    for _ in 0..30 {
        let (n, k) = (80, 10);
        let common = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        let x = Array2::from_shape_fn((n, k), |(i, _)| common[i] + 0.2 * rng.random_range(-1.0..1.0));
        let y = x.column(0).to_owned() - x.column(3).mapv(|v| 0.5 * v)
            + Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        let w = Array1::from_shape_fn(k, |_| rng.random_range(0.5..2.0));
        let fit = adaptive_elastic_net_fit(y.view(), x.view(), w.view(), rng.random_range(0.0..5.0), &opts).unwrap();
        let rising = fit.objective.windows(2).any(|p| p[1] > p[0]);
        ensure(!rising, || "objective increased between sweeps".into())?;
        sweeps += fit.objective.len();
    }
    Ok(format!(
        "least squares {ols_err:.1e}, closed form {cf_err:.1e}, {sweeps} sweeps monotone"
    ))
}

fn synthetic_rolling() -> Outcome {
    let start = Instant::now();
    let design = SenderDesign {
        cluster_sizes: vec![3, 3, 3],
        ..SenderDesign::default()
    };
    let dgp = sender_dgp(&design);
    let sigma = dgp.reduced_covariance();
    ensure(sigma[[0, 3]] > 0.0 && sigma[[3, 6]] > 0.0, || {
        "reduced-form cross correlation is not positive".into()
    })?;
    let x = dgp.simulate(1000, 200, &mut ChaCha8Rng::seed_from_u64(2024)).unwrap();
    let panel = ReturnPanel::from_values(dgp.labels.clone(), x).unwrap();
    // The sender cluster comes first in the spec, which is the true causal order.
    let cfg = RollingConfig {
        ordering: OrderingMode::Fixed,
        ..RollingConfig::new(104, 1, 12)
    };
    let series = roll(&panel, &dgp.spec, &cfg).map_err(|e| e.to_string())?;
    let clus = series.scheme(Scheme::Clustered).unwrap();
    let gen = series.scheme(Scheme::Generalized).unwrap();
    let (mut windows, mut greater, mut positive) = (0, 0, 0);
    let (mut gen_net, mut clus_net) = (0.0, 0.0);
    for (c, g) in clus.iter().zip(gen) {
        let (Some(c), Some(g)) = (c, g) else { continue };
        windows += 1;
        greater += usize::from(g.system_wide > c.system_wide);
        positive += usize::from(c.regional_net[0] > 0.0);
        gen_net += g.regional_net[0].abs();
        clus_net += c.regional_net[0];
    }
    let (gen_net, clus_net) = (gen_net / windows as f64, clus_net / windows as f64);
    let elapsed = start.elapsed();
    let detail = format!(
        "{windows}/{} windows, generalized > clustered in {greater}, sender net positive in {positive}, \
         mean sender net |generalized| {gen_net:.2} vs clustered {clus_net:.2}, {:.0}s",
        series.len(),
        elapsed.as_secs_f64()
    );
    ensure(windows == series.len(), || format!("{detail}: some windows failed"))?;
    ensure(greater == windows, || detail.clone())?;
    ensure(positive as f64 >= 0.95 * windows as f64, || detail.clone())?;
    ensure(gen_net < 0.5 * clus_net, || {
        format!("{detail}: generalized sender net not attenuated")
    })?;
    ensure(elapsed < Duration::from_secs(600), || detail.clone())?;
    Ok(detail)
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_connectedness")
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn run_cli(args: &[&std::ffi::OsStr]) -> Result<(), String> {
    let out = Command::new(binary()).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = bundled().join("config.toml");
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        run_cli(&[
            "run".as_ref(),
            "--config".as_ref(),
            config.as_os_str(),
            "--mode".as_ref(),
            "rolling".as_ref(),
            "--dump-model".as_ref(),
            "--out".as_ref(),
            out.as_os_str(),
        ])?;
        outputs.push(read_dir_sorted(&out));
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(
        names == outputs[1].iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        || "runs wrote different file sets".into(),
    )?;
    for ((name, a), (_, b)) in outputs[0].iter().zip(&outputs[1]) {
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    let bytes: usize = outputs[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} files, {bytes} bytes identical", names.len()))
}

fn stats_format() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = tmp.path().join("synth");
    let out = tmp.path().join("out");
    run_cli(&["gen-synth".as_ref(), "--out".as_ref(), synth.as_os_str()])?;
    run_cli(&[
        "run".as_ref(),
        "--config".as_ref(),
        synth.join("config.toml").as_os_str(),
        "--scheme".as_ref(),
        "generalized".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ])?;
    let text = std::fs::read_to_string(out.join("stats.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    ensure(header == "label,mean,std,info,skew,kurt", || {
        format!("header `{header}`")
    })?;
    let labels = ["A1", "A2", "B1", "B2", "C1", "C2"];
    let rows: Vec<&str> = lines.collect();
    ensure(rows.len() == labels.len(), || format!("{} data rows", rows.len()))?;
    for (row, label) in rows.iter().zip(labels) {
        let fields: Vec<&str> = row.split(',').collect();
        ensure(fields.len() == 6 && fields[0] == label, || format!("row `{row}`"))?;
        for f in &fields[1..] {
            ensure(f.parse::<f64>().is_ok_and(f64::is_finite), || {
                format!("field `{f}` in `{row}`")
            })?;
        }
    }
    ensure(!text.contains('\r') && text.ends_with('\n'), || "line endings".into())?;

    let (t, n) = (20_000, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let x = Array2::from_shape_fn((t, n), |_| rng.sample::<f64, _>(StandardNormal));
    let stats = summary_stats(&ReturnPanel::from_values((0..n).map(|i| format!("z{i}")).collect(), x).unwrap())
        .map_err(|e| e.to_string())?;
    let (se_skew, se_kurt) = ((6.0 / t as f64).sqrt(), (24.0 / t as f64).sqrt());
    let (mut worst_skew, mut worst_kurt): (f64, f64) = (0.0, 0.0);
    for s in &stats.series {
        let (skew, kurt) = (s.skew.unwrap(), s.kurt.unwrap());
        worst_skew = worst_skew.max(skew.abs() / se_skew);
        worst_kurt = worst_kurt.max((kurt - 3.0).abs() / se_kurt);
    }
    ensure(worst_skew < 3.0 && worst_kurt < 3.0, || {
        format!("normal panel: skew {worst_skew:.2} SE, kurt {worst_kurt:.2} SE")
    })?;
    Ok(format!(
        "schema ok, normal panel skew within {worst_skew:.2} SE and kurtosis within {worst_kurt:.2} SE"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("special-case reductions", special_cases),
        ("block-diagonal structural covariance", block_diagonality),
        ("row-stochastic decompositions", row_stochastic),
        ("measure identities", measure_identities),
        ("three-cluster inverse oracle", three_cluster_oracle),
        ("scalar two-step decomposition oracle", scalar_oracle),
        ("elastic net correctness", elastic_net),
        ("synthetic sender reproduction", synthetic_rolling),
        ("CLI determinism", determinism),
        ("summary statistics format", stats_format),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
