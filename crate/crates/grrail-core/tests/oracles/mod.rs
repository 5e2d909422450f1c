//! Independent oracles for the acceptance suite. Everything here is written
//! against the documented definitions with the most naive machinery
//! available — Floyd-Warshall instead of Dijkstra, exhaustive partition
//! search instead of greedy merging, an explicit min-cost-flow solver
//! instead of the CDF closed form — so agreement is meaningful.

use grrail_core::{ClusterGraph, EdgePolicy, GraphEdge, GraphNode, WeightPolicy};

/// Test-graph constructor shared by the acceptance criteria.
pub fn graph_of(n: usize, edges: &[(usize, usize, f64)]) -> ClusterGraph {
    let nodes = (0..n)
        .map(|i| GraphNode {
            cluster: i,
            centroid: [i as f64, 0.0, 0.0],
            member_count: 1,
            mean_value: i as f64,
            histogram: vec![1.0],
        })
        .collect();
    let mut adjacency = vec![0u8; n * n];
    let edges: Vec<GraphEdge> = edges
        .iter()
        .map(|&(a, b, weight)| {
            adjacency[a * n + b] = 1;
            adjacency[b * n + a] = 1;
            GraphEdge { a: a.min(b), b: a.max(b), weight }
        })
        .collect();
    ClusterGraph {
        nodes,
        edges,
        adjacency,
        edge_policy: EdgePolicy::Complete,
        weight_policy: WeightPolicy::Emd,
        hist_bins: 1,
        hist_bin_width: 1.0,
    }
}

// ---------------------------------------------------------------------------
// Haralick reference: literal formula transcription, no shared plumbing
// ---------------------------------------------------------------------------

fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        p.log2()
    } else {
        0.0
    }
}

/// The 13 features in map order: energy, entropy, contrast, correlation,
/// homogeneity, sum average, sum variance, sum entropy, difference entropy,
/// difference average, difference variance, ICM1, ICM2.
pub fn haralick_reference(b: usize, p: &[f64]) -> [f64; 13] {
    let at = |i: usize, j: usize| p[i * b + j];

    let mut energy = 0.0;
    for i in 0..b {
        for j in 0..b {
            energy += at(i, j) * at(i, j);
        }
    }

    let mut entropy = 0.0;
    for i in 0..b {
        for j in 0..b {
            entropy -= at(i, j) * xlog2(at(i, j));
        }
    }

    let mut contrast = 0.0;
    for i in 0..b {
        for j in 0..b {
            contrast += (i as f64 - j as f64).powi(2) * at(i, j);
        }
    }

    let mut px = vec![0.0; b];
    for i in 0..b {
        for j in 0..b {
            px[i] += at(i, j);
        }
    }
    let mut py = vec![0.0; b];
    for j in 0..b {
        for i in 0..b {
            py[j] += at(i, j);
        }
    }

    let mut mu_x = 0.0;
    for (i, v) in px.iter().enumerate() {
        mu_x += i as f64 * v;
    }
    let mut mu_y = 0.0;
    for (j, v) in py.iter().enumerate() {
        mu_y += j as f64 * v;
    }
    let mut sd_x = 0.0;
    for (i, v) in px.iter().enumerate() {
        sd_x += (i as f64 - mu_x).powi(2) * v;
    }
    sd_x = sd_x.sqrt();
    let mut sd_y = 0.0;
    for (j, v) in py.iter().enumerate() {
        sd_y += (j as f64 - mu_y).powi(2) * v;
    }
    sd_y = sd_y.sqrt();

    let mut correlation = 0.0;
    if sd_x > 0.0 && sd_y > 0.0 {
        for i in 0..b {
            for j in 0..b {
                correlation += (i as f64 - mu_x) * (j as f64 - mu_y) * at(i, j) / (sd_x * sd_y);
            }
        }
    }

    let mut homogeneity = 0.0;
    for i in 0..b {
        for j in 0..b {
            homogeneity += at(i, j) / (1.0 + (i as f64 - j as f64).powi(2));
        }
    }

    let mut p_sum = vec![0.0; 2 * b - 1];
    for i in 0..b {
        for j in 0..b {
            p_sum[i + j] += at(i, j);
        }
    }
    let mut sum_average = 0.0;
    for (k, v) in p_sum.iter().enumerate() {
        sum_average += k as f64 * v;
    }
    let mut sum_variance = 0.0;
    for (k, v) in p_sum.iter().enumerate() {
        sum_variance += (k as f64 - sum_average).powi(2) * v;
    }
    let mut sum_entropy = 0.0;
    for v in &p_sum {
        sum_entropy -= v * xlog2(*v);
    }

    let mut p_diff = vec![0.0; b];
    for i in 0..b {
        for j in 0..b {
            p_diff[(i as i64 - j as i64).unsigned_abs() as usize] += at(i, j);
        }
    }
    let mut difference_average = 0.0;
    for (k, v) in p_diff.iter().enumerate() {
        difference_average += k as f64 * v;
    }
    let mut difference_variance = 0.0;
    for (k, v) in p_diff.iter().enumerate() {
        difference_variance += (k as f64 - difference_average).powi(2) * v;
    }
    let mut difference_entropy = 0.0;
    for v in &p_diff {
        difference_entropy -= v * xlog2(*v);
    }

    let mut hx = 0.0;
    for v in &px {
        hx -= v * xlog2(*v);
    }
    let mut hy = 0.0;
    for v in &py {
        hy -= v * xlog2(*v);
    }
    let hxy = entropy;
    let mut hxy1 = 0.0;
    for i in 0..b {
        for j in 0..b {
            if at(i, j) > 0.0 {
                hxy1 -= at(i, j) * xlog2(px[i] * py[j]);
            }
        }
    }
    let mut hxy2 = 0.0;
    for i in 0..b {
        for j in 0..b {
            hxy2 -= px[i] * py[j] * xlog2(px[i] * py[j]);
        }
    }
    let hmax = if hx > hy { hx } else { hy };
    let icm1 = if hmax > 0.0 { (hxy - hxy1) / hmax } else { 0.0 };
    let inner = 1.0 - (-2.0 * (hxy2 - hxy)).exp();
    let icm2 = if inner > 0.0 { inner.sqrt() } else { 0.0 };

    [
        energy,
        entropy,
        contrast,
        correlation,
        homogeneity,
        sum_average,
        sum_variance,
        sum_entropy,
        difference_entropy,
        difference_average,
        difference_variance,
        icm1,
        icm2,
    ]
}

// ---------------------------------------------------------------------------
// Brute-force graph metrics
// ---------------------------------------------------------------------------

const INF: f64 = f64::INFINITY;

fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)], unit: bool) -> Vec<Vec<f64>> {
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        let w = if unit { 1.0 } else { w };
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn dfs_components(n: usize, edges: &[(usize, usize, f64)], skip: Option<usize>) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, _) in edges {
        if Some(a) != skip && Some(b) != skip {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    fn dfs(u: usize, id: usize, adj: &[Vec<usize>], comp: &mut [usize]) {
        comp[u] = id;
        for &v in &adj[u] {
            if comp[v] == usize::MAX {
                dfs(v, id, adj, comp);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if Some(start) == skip || comp[start] != usize::MAX {
            continue;
        }
        dfs(start, next, &adj, &mut comp);
        next += 1;
    }
    comp
}

/// All set partitions of {0..n-1}.
fn partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for smaller in partitions(n - 1) {
        let last = n - 1;
        for k in 0..smaller.len() {
            let mut p = smaller.clone();
            p[k].push(last);
            out.push(p);
        }
        let mut p = smaller.clone();
        p.push(vec![last]);
        out.push(p);
    }
    out
}

fn modularity_of(n: usize, edges: &[(usize, usize, f64)], parts: &[Vec<usize>]) -> f64 {
    let mut w = vec![vec![0.0; n]; n];
    for &(a, b, wt) in edges {
        w[a][b] += wt;
        w[b][a] += wt;
    }
    let strength: Vec<f64> = (0..n).map(|i| w[i].iter().sum()).collect();
    let two_m: f64 = strength.iter().sum();
    if two_m <= 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for part in parts {
        let mut internal = 0.0;
        let mut total = 0.0;
        for &i in part {
            total += strength[i];
            for &j in part {
                internal += w[i][j];
            }
        }
        q += internal / two_m - (total / two_m).powi(2);
    }
    q
}

/// The 15 metrics computed by exhaustive enumeration, in canonical order.
pub fn graph_features_brute_force(n: usize, edges: &[(usize, usize, f64)]) -> [f64; 15] {
    if n == 1 {
        return [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0, 0.0];
    }
    let nf = n as f64;
    let e = edges.len() as f64;
    let mut adj = vec![vec![false; n]; n];
    let mut degree = vec![0usize; n];
    for &(a, b, _) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
        degree[a] += 1;
        degree[b] += 1;
    }

    let density = 2.0 * e / (nf * (nf - 1.0));
    let comp = dfs_components(n, edges, None);
    let n_components = comp.iter().copied().max().unwrap() + 1;
    let mut sizes = vec![0usize; n_components];
    for &c in &comp {
        sizes[c] += 1;
    }
    // ties go to the component discovered first (contains the lowest index)
    let mut largest = 0usize;
    for (c, &s) in sizes.iter().enumerate() {
        if s > sizes[largest] {
            largest = c;
        }
    }

    let wd = floyd_warshall(n, edges, false);
    let mut diameter: f64 = 0.0;
    let mut radius = INF;
    let mut members = 0;
    for i in 0..n {
        if comp[i] != largest {
            continue;
        }
        members += 1;
        let mut ecc: f64 = 0.0;
        for j in 0..n {
            if comp[j] == largest && i != j {
                ecc = ecc.max(wd[i][j]);
            }
        }
        diameter = diameter.max(ecc);
        radius = radius.min(ecc);
    }
    if members <= 1 {
        radius = 0.0;
    }

    let mut apl_sum = 0.0;
    let mut apl_count = 0;
    let mut eff = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && wd[i][j].is_finite() {
                if i < j {
                    apl_sum += wd[i][j];
                    apl_count += 1;
                }
                if wd[i][j] > 0.0 {
                    eff += 1.0 / wd[i][j];
                }
            }
        }
    }
    let apl = if apl_count > 0 { apl_sum / apl_count as f64 } else { 0.0 };
    let efficiency = eff / (nf * (nf - 1.0));

    let mut triangles = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if adj[i][j] && adj[j][k] && adj[i][k] {
                    triangles += 1;
                }
            }
        }
    }
    // triplets counted as center-vertex neighbor pairs, not via the degree
    // formula, to keep the route independent
    let mut triplets = 0usize;
    for v in 0..n {
        let nbrs: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
        for a in 0..nbrs.len() {
            for _b in (a + 1)..nbrs.len() {
                triplets += 1;
            }
        }
    }
    let clustering = if triplets > 0 { 3.0 * triangles as f64 / triplets as f64 } else { 0.0 };

    let modularity = if edges.is_empty() {
        0.0
    } else {
        partitions(n).iter().map(|p| modularity_of(n, edges, p)).fold(f64::NEG_INFINITY, f64::max)
    };

    let small_worldness = {
        if e == 0.0 || clustering <= 0.0 {
            0.0
        } else {
            let hops = floyd_warshall(n, edges, true);
            let mut s = 0.0;
            let mut c = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    if hops[i][j].is_finite() {
                        s += hops[i][j];
                        c += 1;
                    }
                }
            }
            let l_u = if c > 0 { s / c as f64 } else { 0.0 };
            let mean_deg = 2.0 * e / nf;
            if density <= 0.0 || l_u <= 0.0 || mean_deg.ln() <= 1e-12 {
                0.0
            } else {
                let l_r = nf.ln() / mean_deg.ln();
                if l_r <= 0.0 {
                    0.0
                } else {
                    (clustering / density) / (l_u / l_r)
                }
            }
        }
    };

    let assortativity = {
        if edges.is_empty() {
            0.0
        } else {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &(a, b, _) in edges {
                xs.push(degree[a] as f64);
                ys.push(degree[b] as f64);
                xs.push(degree[b] as f64);
                ys.push(degree[a] as f64);
            }
            let m = xs.len() as f64;
            let mx: f64 = xs.iter().sum::<f64>() / m;
            let my: f64 = ys.iter().sum::<f64>() / m;
            let mut num = 0.0;
            let mut dx = 0.0;
            let mut dy = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                num += (x - mx) * (y - my);
                dx += (x - mx).powi(2);
                dy += (y - my).powi(2);
            }
            if dx <= 0.0 || dy <= 0.0 {
                0.0
            } else {
                num / (dx * dy).sqrt()
            }
        }
    };

    let entropy = {
        let mut counts: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        for &d in &degree {
            *counts.entry(d).or_default() += 1;
        }
        let mut h = 0.0;
        for &c in counts.values() {
            let p = c as f64 / nf;
            h -= p * p.log2();
        }
        h.max(0.0)
    };

    let hubs = {
        let mean: f64 = degree.iter().sum::<usize>() as f64 / nf;
        let var: f64 = degree.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / nf;
        degree.iter().filter(|&&d| d as f64 > mean + var.sqrt()).count() as f64
    };

    let randomness = if clustering == 0.0 {
        10.0
    } else {
        (density / clustering).clamp(0.0, 10.0)
    };

    let resilience = {
        let mut target = 0;
        for i in 1..n {
            if degree[i] > degree[target] {
                target = i;
            }
        }
        let comp2 = dfs_components(n, edges, Some(target));
        let ids: std::collections::HashSet<usize> =
            comp2.iter().enumerate().filter(|&(i, &c)| i != target && c != usize::MAX).map(|(_, &c)| c).collect();
        let mut biggest = 0usize;
        for id in ids {
            let size = comp2
                .iter()
                .enumerate()
                .filter(|&(i, &c)| i != target && c == id)
                .count();
            biggest = biggest.max(size);
        }
        biggest as f64 / (nf - 1.0)
    };

    [
        nf,
        density,
        diameter,
        apl,
        clustering,
        modularity,
        small_worldness,
        n_components as f64,
        assortativity,
        radius,
        efficiency,
        entropy,
        hubs,
        randomness,
        resilience,
    ]
}

// ---------------------------------------------------------------------------
// Transportation-LP oracle for the 1-D EMD
// ---------------------------------------------------------------------------

/// Solves the transportation problem between two normalized histograms on
/// the same grid with ground cost `bin_width * |i - j|`, and certifies the
/// solution optimal by LP duality.
///
/// The primal plan comes from the northwest-corner rule, whose staircase
/// basis (exactly 2n - 1 cells) lets the dual potentials be read off in one
/// pass; the function then checks dual feasibility `u_i + v_j <= c_ij` on
/// every cell — the transportation-simplex optimality criterion — and panics
/// if the certificate fails, so a returned value is a proven LP optimum.
pub fn emd_transport_lp(h1: &[f64], h2: &[f64], bin_width: f64) -> f64 {
    let n = h1.len();
    assert_eq!(n, h2.len());
    let cost = |i: usize, j: usize| bin_width * (i as f64 - j as f64).abs();

    let mut a = h1.to_vec();
    let mut b = h2.to_vec();
    let mut i = 0usize;
    let mut j = 0usize;
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(2 * n - 1);
    let mut total = 0.0;
    loop {
        let x = a[i].min(b[j]);
        cells.push((i, j));
        total += x * cost(i, j);
        a[i] -= x;
        b[j] -= x;
        if i == n - 1 && j == n - 1 {
            break;
        }
        // advance one index per step so the basis stays a spanning staircase
        if a[i] <= 1e-15 && i < n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    assert_eq!(cells.len(), 2 * n - 1, "northwest-corner basis must have 2n - 1 cells");

    // dual potentials from the staircase, then the optimality certificate
    let mut u = vec![f64::NAN; n];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    for &(i, j) in &cells {
        if !u[i].is_nan() && v[j].is_nan() {
            v[j] = cost(i, j) - u[i];
        } else if !v[j].is_nan() && u[i].is_nan() {
            u[i] = cost(i, j) - v[j];
        }
    }
    assert!(
        u.iter().chain(v.iter()).all(|x| !x.is_nan()),
        "staircase basis failed to determine all duals"
    );
    for i in 0..n {
        for j in 0..n {
            assert!(
                u[i] + v[j] <= cost(i, j) + 1e-9,
                "duality certificate failed at ({i}, {j}): {} > {}",
                u[i] + v[j],
                cost(i, j)
            );
        }
    }
    total
}
