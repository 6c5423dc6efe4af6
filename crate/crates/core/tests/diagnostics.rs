use resample_lab::diagnostics::{
    kolmogorov_weighted, pairwise_count_cov, random_system, sample_counts, star_discrepancy_1d,
    star_discrepancy_lower_bound, variance_rate_fit, CovarianceReport,
};
use resample_lab::resample::Scheme;
use resample_lab::{Resampler, UniformStream, WeightedParticleSystem};

/// sup over anchored intervals [0, t) and [0, t] of |fraction inside - t|,
/// checked at every point and at t = 1.
fn star_discrepancy_brute(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut best: f64 = 0.0;
    for &t in points.iter().chain(std::iter::once(&1.0)) {
        let open = points.iter().filter(|&&x| x < t).count() as f64 / n;
        let closed = points.iter().filter(|&&x| x <= t).count() as f64 / n;
        best = best.max((open - t).abs()).max((closed - t).abs());
    }
    best
}

/// Exact star discrepancy in `[0,1]^2` by enumerating corners on the point coordinates.
fn star_discrepancy_2d_exact(points: &[f64]) -> f64 {
    let n = points.len() / 2;
    let xs: Vec<f64> = points.iter().step_by(2).copied().chain([1.0]).collect();
    let ys: Vec<f64> = points.iter().skip(1).step_by(2).copied().chain([1.0]).collect();
    let mut best: f64 = 0.0;
    for &a in &xs {
        for &b in &ys {
            let pts = points.chunks_exact(2);
            let open = pts.clone().filter(|p| p[0] < a && p[1] < b).count() as f64 / n as f64;
            let closed = pts.filter(|p| p[0] <= a && p[1] <= b).count() as f64 / n as f64;
            best = best.max(a * b - open).max(closed - a * b);
        }
    }
    best
}

#[test]
fn star_discrepancy_matches_brute_force() {
    let mut s = UniformStream::new(12, 0);
    for n in 1..=12 {
        for _ in 0..50 {
            // coarse values force ties
            let pts: Vec<f64> = (0..n).map(|_| (s.next_uniform() * 8.0).floor() / 8.0).collect();
            let exact = star_discrepancy_1d(&pts).unwrap();
            assert!((exact - star_discrepancy_brute(&pts)).abs() < 1e-15, "{pts:?}");
            let pts: Vec<f64> = (0..n).map(|_| s.next_uniform()).collect();
            assert!((star_discrepancy_1d(&pts).unwrap() - star_discrepancy_brute(&pts)).abs() < 1e-15);
        }
    }
}

#[test]
fn dyadic_grid_discrepancy_tends_to_one_over_n() {
    for k in 1..=12 {
        let n = 1usize << k;
        let pts: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        assert!((star_discrepancy_1d(&pts).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn multivariate_estimate_is_a_lower_bound() {
    let mut s = UniformStream::new(4, 0);
    for n in 1..=10 {
        let pts: Vec<f64> = (0..2 * n).map(|_| s.next_uniform()).collect();
        let exact = star_discrepancy_2d_exact(&pts);
        let lb = star_discrepancy_lower_bound(&pts, 2, 16).unwrap();
        assert!(lb <= exact + 1e-12 && lb >= 0.0, "lb {lb} exact {exact}");
    }
    // in one dimension the estimate with sample-point corners is exact
    let pts: Vec<f64> = (0..9).map(|_| s.next_uniform()).collect();
    let lb = star_discrepancy_lower_bound(&pts, 1, 0).unwrap();
    assert!((lb - star_discrepancy_1d(&pts).unwrap()).abs() < 1e-15);
}

fn random_measure(s: &mut UniformStream, atoms: usize) -> Vec<(f64, f64)> {
    let raw: Vec<f64> = (0..atoms).map(|_| s.next_uniform()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| ((s.next_uniform() * 5.0).floor(), w / total)).collect()
}

fn kolmogorov_brute(p: &[(f64, f64)], q: &[(f64, f64)]) -> f64 {
    p.iter()
        .chain(q)
        .map(|&(t, _)| {
            let fp: f64 = p.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
            let fq: f64 = q.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
            (fp - fq).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn kolmogorov_is_a_metric() {
    let mut s = UniformStream::new(77, 0);
    for _ in 0..300 {
        let p = random_measure(&mut s, 6);
        let q = random_measure(&mut s, 4);
        let r = random_measure(&mut s, 7);
        let pq = kolmogorov_weighted(&p, &q);
        assert!((pq - kolmogorov_brute(&p, &q)).abs() < 1e-12);
        assert_eq!(pq, kolmogorov_weighted(&q, &p));
        assert!(pq <= kolmogorov_weighted(&p, &r) + kolmogorov_weighted(&r, &q) + 1e-12);
        assert!(kolmogorov_weighted(&p, &p) < 1e-15);
    }
    assert_eq!(kolmogorov_weighted(&[(0.0, 1.0)], &[(1.0, 1.0)]), 1.0);
    // same measure written with split atoms
    assert!(kolmogorov_weighted(&[(2.0, 1.0)], &[(2.0, 0.25), (2.0, 0.75)]) < 1e-15);
}

#[test]
fn multinomial_covariance_matches_closed_form() {
    let sys = WeightedParticleSystem::univariate(vec![0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
    let cov = pairwise_count_cov(&Scheme::Multinomial.into(), &sys, 100_000, 21).unwrap();
    let exact = -3.0 * (1.0 / 3.0) * (1.0 / 3.0);
    assert!((cov.cov(0, 1) - exact).abs() <= 4.0 * cov.se(0, 1), "{}", cov.cov(0, 1));
    // diagonal: N w (1 - w)
    assert!((cov.cov(2, 2) - 2.0 / 3.0).abs() < 0.02);
}

#[test]
fn systematic_counterexample_covariance() {
    let sys = WeightedParticleSystem::univariate(vec![0.0, 1.0, 2.0, 3.0], &[0.5, 0.5, 0.5, 2.5]).unwrap();
    let cov = pairwise_count_cov(&Scheme::Systematic.into(), &sys, 100_000, 2).unwrap();
    assert!((cov.cov(0, 2) - 0.25).abs() <= 4.0 * cov.se(0, 2) + 1e-3);
}

#[test]
fn covariance_rows_sum_to_zero() {
    for name in ["multinomial", "stratified", "ssp", "systematic"] {
        let r: Resampler = name.parse().unwrap();
        let sys = random_system(7, 1, 5).unwrap();
        let cov = pairwise_count_cov(&r, &sys, 5_000, 1).unwrap();
        for i in 0..7 {
            assert!(cov.row_sum(i).abs() < 1e-9, "{name}: row {i} sums to {}", cov.row_sum(i));
        }
    }
}

#[test]
fn diagnostics_do_not_depend_on_thread_count() {
    let sys = random_system(9, 2, 3).unwrap();
    let r: Resampler = "ordered-stratified".parse().unwrap();
    let many = sample_counts(&r, &sys, 3_000, 6).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sample_counts(&r, &sys, 3_000, 6).unwrap());
    assert_eq!(many, one);
    assert_eq!(
        CovarianceReport::from_samples(&many).unwrap(),
        CovarianceReport::from_samples(&one).unwrap()
    );
    let fit = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            variance_rate_fit(&r, |n| random_system(n, 2, 1), |x: &[f64]| x[0] + x[1], &[16, 32, 64, 128], 200, 4)
                .unwrap()
        })
    };
    assert_eq!(fit(1), fit(4));
}
