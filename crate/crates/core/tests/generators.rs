use epivax::generators::{self, Family, GenSpec};
use epivax::spectral::{self, PowerOptions};
use epivax::Graph;

fn gen(family: Family, n: usize, seed: u64) -> Graph {
    GenSpec::new(family, n, seed).generate().unwrap()
}

#[test]
fn edge_counts_follow_the_binomial() {
    let pairs = 1000.0 * 999.0 / 2.0;
    let (mean, sd) = (pairs * 0.4, (pairs * 0.4 * 0.6f64).sqrt());
    for family in [Family::GnpFast { p: 0.4 }, Family::ErdosRenyi { p: 0.4 }] {
        let counts: Vec<f64> = (0..30).map(|s| gen(family.clone(), 1000, s).edge_count() as f64).collect();
        for &c in &counts {
            assert!((c - mean).abs() < 5.0 * sd, "{family:?}: {c}");
        }
        let avg = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((avg - mean).abs() < 3.0 * sd / 30f64.sqrt(), "{family:?}: mean {avg}");
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn skip_sampling_matches_pairwise_bernoulli() {
    // one degree per graph keeps the samples independent
    let (n, p, graphs) = (200, 0.05, 600);
    let sample = |family: Family, offset: u64| -> Vec<f64> {
        (0..graphs)
            .map(|s| gen(family.clone(), n, s + offset).degree(s as usize % n) as f64)
            .collect()
    };
    let fast = sample(Family::GnpFast { p }, 0);
    let slow = sample(Family::ErdosRenyi { p }, 10_000);
    let d = ks(fast, slow);
    // critical value at α = 0.001
    let crit = 1.949 * (2.0 / graphs as f64).sqrt();
    assert!(d < crit, "KS statistic {d} >= {crit}");
}

#[test]
fn geometric_mean_degree_matches_area() {
    let n = 1000;
    let r = generators::default_rgg_radius(n);
    // probability that two uniform points of the unit square lie within r
    let q = std::f64::consts::PI * r * r - 8.0 / 3.0 * r.powi(3) + 0.5 * r.powi(4);
    let want = (n - 1) as f64 * q;
    let got: f64 = (0..5)
        .map(|s| {
            let g = gen(Family::RandomGeometric { radius: None, dim: 2 }, n, s);
            2.0 * g.edge_count() as f64 / n as f64
        })
        .sum::<f64>()
        / 5.0;
    assert!((got - want).abs() < 0.03 * want, "mean degree {got}, expected {want}");
}

#[test]
fn duplication_divergence_is_heavy_tailed() {
    for s in 0..5 {
        let g = gen(Family::DuplicationDivergence { p: 0.4 }, 1000, s);
        let st = g.degree_stats().unwrap();
        assert!(st.deg_min >= 1, "no isolated nodes");
        assert!(st.deg_max as f64 > 5.0 * st.deg_avg, "{st:?}");
    }
}

#[test]
fn preferential_attachment_shape() {
    let g = gen(Family::BarabasiAlbert { m: 50 }, 1000, 3);
    assert_eq!(g.edge_count(), 50 * 950);
    let st = g.degree_stats().unwrap();
    assert_eq!(st.deg_min, 50);
    assert!(st.deg_max > 300, "{st:?}");
}

#[test]
fn shuffle_keeps_degrees_and_spectrum() {
    let power = PowerOptions::default();
    let g = gen(Family::ErdosRenyi { p: 0.1 }, 500, 4);
    let l = spectral::lambda_max(&g, power).unwrap().lambda_max;
    for s in 0..5 {
        let h = generators::degree_preserving_shuffle(&g, generators::default_swaps(&g), s).unwrap();
        assert_eq!(h.degrees(), g.degrees());
        assert_ne!(h.fingerprint(), g.fingerprint());
        let lh = spectral::lambda_max(&h, power).unwrap().lambda_max;
        assert!((lh - l).abs() < 0.01 * l, "{lh} vs {l}");
    }
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let families = [
        Family::GnpFast { p: 0.1 },
        Family::ErdosRenyi { p: 0.1 },
        Family::DuplicationDivergence { p: 0.4 },
        Family::BarabasiAlbert { m: 3 },
        Family::RandomGeometric { radius: Some(0.1), dim: 2 },
    ];
    for f in families {
        let a = gen(f.clone(), 300, 11);
        assert_eq!(a, gen(f.clone(), 300, 11));
        assert_ne!(a.fingerprint(), gen(f, 300, 12).fingerprint());
    }
}
