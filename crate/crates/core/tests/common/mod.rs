#![allow(clippy::needless_range_loop, clippy::too_many_arguments, dead_code)]

//! Reference implementations for tests: exhaustive geodesic enumeration,
//! a dense Jacobi eigensolver and adaptive quadrature.


use epivax::Graph;
use rand::Rng;

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(Some(n), edges)
}

/// Graph whose edges are the set bits of `mask` over the pairs of `n`
/// nodes in lexicographic order.
pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((u, v));
            }
            bit += 1;
        }
    }
    Graph::from_edges(Some(n), edges)
}

pub fn adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    a
}

/// All-pairs hop distances by Floyd–Warshall; `usize::MAX` if unreachable.
pub fn distances(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let inf = usize::MAX;
    let mut d = vec![vec![inf; n]; n];
    for v in 0..n {
        d[v][v] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != inf && d[k][j] != inf && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn degree_oracle(g: &Graph) -> Vec<f64> {
    let a = adjacency(g);
    a.iter().map(|row| row.iter().sum()).collect()
}

pub fn closeness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let d = distances(g);
    (0..n)
        .map(|v| {
            let reach: Vec<usize> = (0..n).filter(|&u| u != v && d[v][u] != usize::MAX).map(|u| d[v][u]).collect();
            let total: usize = reach.iter().sum();
            if total == 0 {
                0.0
            } else {
                let r = reach.len() as f64;
                r / total as f64 * r / (n - 1) as f64
            }
        })
        .collect()
}

/// Walks every geodesic from `s` to `t`, counting paths and visits.
fn enumerate_geodesics(
    g: &Graph,
    d: &[Vec<usize>],
    t: usize,
    path: &mut Vec<usize>,
    count: &mut f64,
    through: &mut [f64],
) {
    let cur = *path.last().unwrap();
    if cur == t {
        *count += 1.0;
        for &v in &path[1..path.len() - 1] {
            through[v] += 1.0;
        }
        return;
    }
    for &w in g.neighbors(cur) {
        let w = w as usize;
        if d[w][t] != usize::MAX && d[w][t] + 1 == d[cur][t] {
            path.push(w);
            enumerate_geodesics(g, d, t, path, count, through);
            path.pop();
        }
    }
}

/// Unnormalized betweenness, each unordered pair counted once.
pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let d = distances(g);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            if d[s][t] == usize::MAX {
                continue;
            }
            let mut count = 0.0;
            let mut through = vec![0.0; n];
            enumerate_geodesics(g, &d, t, &mut vec![s], &mut count, &mut through);
            for v in 0..n {
                bc[v] += through[v] / count;
            }
        }
    }
    bc
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues
/// in descending order with unit eigenvectors as columns of the second
/// value (`vecs[i][j]` is component `i` of eigenvector `j`).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vecs)
}

pub fn spectrum(g: &Graph) -> Vec<f64> {
    if g.node_count() == 0 {
        return Vec::new();
    }
    jacobi_eigen(adjacency(g)).0
}

/// Leading eigenvector, unit length, nonnegative orientation, provided the
/// leading eigenvalue is separated from the rest of the spectrum by `gap`.
pub fn leading_eigenvector(g: &Graph, gap: f64) -> Option<Vec<f64>> {
    let (vals, vecs) = jacobi_eigen(adjacency(g));
    if vals.len() < 2 || vals[0] - vals[1] < gap {
        return None;
    }
    let mut x: Vec<f64> = vecs.iter().map(|row| row[0]).collect();
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Some(x.iter().map(|v| (v / norm).max(0.0)).collect())
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Student-t CDF by quadrature. Substituting `t = √ν tan θ` turns the
/// density into `cos^(ν−1) θ` on a finite interval, so no gamma function
/// is needed: `F(t) = 1/2 + sign(t)/2 · ∫₀^θₜ cos^(ν−1) / ∫₀^(π/2) cos^(ν−1)`.
pub fn t_cdf_quadrature(t: f64, df: f64) -> f64 {
    let f = move |theta: f64| theta.cos().powf(df - 1.0);
    let theta_t = (t.abs() / df.sqrt()).atan();
    let part = integrate(&f, 0.0, theta_t, 1e-14);
    let whole = integrate(&f, 0.0, std::f64::consts::FRAC_PI_2, 1e-14);
    0.5 + 0.5 * t.signum() * part / whole
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
