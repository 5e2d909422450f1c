//! The 15 global graph features, in fixed order.
//!
//! Shortest-path quantities (diameter, radius, average path length, global
//! efficiency) treat edge weights as distances (Dijkstra); triangle and
//! degree quantities use the unweighted topology; modularity uses the weight
//! matrix. Several features have no standard single definition, so each gets
//! one fixed rule here — the full ledger:
//!
//! | feature                | rule |
//! |------------------------|------|
//! | size                   | node count |
//! | density                | `2E / (V (V-1))`, 0 for a single node |
//! | diameter / radius      | max / min eccentricity on the largest component (ties: component containing the lowest node index), weighted |
//! | avg path length        | mean weighted distance over connected pairs, 0 if none |
//! | clustering coefficient | transitivity: `3 * triangles / connected triplets`, 0 if no triplets |
//! | modularity             | best Q along a greedy agglomerative merge of the weight matrix, ties merge the lexicographically lowest community pair; 0 when total weight is 0 |
//! | small-worldness        | `(C / C_r) / (L_u / L_r)` with `C_r` = density, `L_u` = unweighted average path length, `L_r = ln V / ln(2E/V)`; 0 whenever any term is degenerate |
//! | connected components   | count |
//! | assortativity          | Pearson degree correlation over edge endpoints (both orientations), 0 when undefined |
//! | global efficiency      | mean of `1/d_w` over ordered pairs; disconnected or zero-distance pairs contribute 0 |
//! | network entropy        | Shannon entropy (bits) of the empirical degree distribution |
//! | number of hubs         | nodes with degree > mean + 1 population std |
//! | randomness             | `C_r / C` clamped to [0, 10]; 10 when C = 0 |
//! | network resilience     | largest-component fraction of the remaining graph after deleting the single highest-degree node (lowest index on ties); 0 for a single node |

use crate::graph::ClusterGraph;

pub const GRAPH_METRIC_NAMES: [&str; 15] = [
    "size",
    "density",
    "diameter",
    "avg_path_length",
    "clustering_coefficient",
    "modularity",
    "small_worldness",
    "connected_components",
    "assortativity",
    "radius",
    "global_efficiency",
    "network_entropy",
    "num_hubs",
    "randomness",
    "resilience",
];

/// Row returned for a single-node graph.
pub const SINGLE_NODE_ROW: [f64; 15] =
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0, 0.0];

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GraphFeatureVector {
    pub values: [f64; 15],
}

impl GraphFeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        GRAPH_METRIC_NAMES.iter().position(|&n| n == name).map(|i| self.values[i])
    }
}

/// Plain weighted graph view the metric kernels operate on. Weights are
/// nonnegative distances.
struct Topology {
    n: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, f64)>,
    degree: Vec<usize>,
}

impl Topology {
    fn from_graph(g: &ClusterGraph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0usize; n];
        let mut edges = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
            degree[e.a] += 1;
            degree[e.b] += 1;
            edges.push((e.a, e.b, e.weight));
        }
        Topology { n, adj, edges, degree }
    }

    /// Weighted shortest-path distances from `src` (Dijkstra); `inf` where
    /// unreachable.
    fn dijkstra(&self, src: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n];
        let mut wadj = vec![Vec::new(); self.n];
        for &(a, b, w) in &self.edges {
            wadj[a].push((b, w));
            wadj[b].push((a, w));
        }
        dist[src] = 0.0;
        // ordered-float-free binary heap via Reverse on bit-ordering is
        // overkill at these sizes; linear scan is simpler and exact
        let mut done = vec![false; self.n];
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..self.n {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &(v, w) in &wadj[u] {
                let nd = dist[u] + w;
                if nd < dist[v] {
                    dist[v] = nd;
                }
            }
        }
        dist
    }

    /// Unweighted hop distances from `src` (BFS).
    fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component id per node, ids assigned in discovery order from node 0.
    fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Computes the full 15-feature vector.
pub fn graph_features(g: &ClusterGraph) -> GraphFeatureVector {
    let t = Topology::from_graph(g);
    let n = t.n;
    assert!(n >= 1, "graph must have at least one node");
    if n == 1 {
        return GraphFeatureVector { values: SINGLE_NODE_ROW };
    }
    let e = t.edges.len();
    let nf = n as f64;

    let size = nf;
    let density = 2.0 * e as f64 / (nf * (nf - 1.0));

    let comp = t.components();
    let n_components = comp.iter().copied().max().unwrap() + 1;

    // largest component; ties resolved toward the component holding the
    // lowest node index (= the lowest component id, since ids are assigned
    // in node order)
    let mut comp_sizes = vec![0usize; n_components];
    for &c in &comp {
        comp_sizes[c] += 1;
    }
    let largest = comp_sizes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();

    // weighted all-pairs distances (per-source Dijkstra)
    let wdist: Vec<Vec<f64>> = (0..n).map(|s| t.dijkstra(s)).collect();

    let mut ecc = Vec::new();
    for i in 0..n {
        if comp[i] != largest {
            continue;
        }
        let mut e_i: f64 = 0.0;
        for j in 0..n {
            if comp[j] == largest && i != j {
                e_i = e_i.max(wdist[i][j]);
            }
        }
        ecc.push(e_i);
    }
    let diameter = ecc.iter().copied().fold(0.0, f64::max);
    let radius = if ecc.len() <= 1 { 0.0 } else { ecc.iter().copied().fold(f64::INFINITY, f64::min) };

    let mut apl_sum = 0.0;
    let mut apl_pairs = 0usize;
    let mut eff_sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = wdist[i][j];
            if d.is_finite() {
                if i < j {
                    apl_sum += d;
                    apl_pairs += 1;
                }
                if d > 0.0 {
                    eff_sum += 1.0 / d;
                }
            }
        }
    }
    let avg_path_length = if apl_pairs > 0 { apl_sum / apl_pairs as f64 } else { 0.0 };
    let global_efficiency = eff_sum / (nf * (nf - 1.0));

    // transitivity on the unweighted topology
    let mut triangles = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if g.adjacent(i, j) {
                for k in (j + 1)..n {
                    if g.adjacent(i, k) && g.adjacent(j, k) {
                        triangles += 1;
                    }
                }
            }
        }
    }
    let triplets: usize = t.degree.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    let clustering = if triplets > 0 { 3.0 * triangles as f64 / triplets as f64 } else { 0.0 };

    let modularity = greedy_modularity(&t);

    // small-worldness
    let small_worldness = {
        if e == 0 {
            0.0
        } else {
            let c_r = density;
            let mean_deg = 2.0 * e as f64 / nf;
            let log_deg = mean_deg.ln();
            // unweighted characteristic path length
            let mut lu_sum = 0.0;
            let mut lu_pairs = 0usize;
            for i in 0..n {
                let hops = t.bfs(i);
                for (j, &h) in hops.iter().enumerate() {
                    if j > i && h != usize::MAX {
                        lu_sum += h as f64;
                        lu_pairs += 1;
                    }
                }
            }
            let l_u = if lu_pairs > 0 { lu_sum / lu_pairs as f64 } else { 0.0 };
            if c_r <= 0.0 || clustering <= 0.0 || l_u <= 0.0 || log_deg <= 1e-12 {
                0.0
            } else {
                let l_r = nf.ln() / log_deg;
                if l_r <= 0.0 {
                    0.0
                } else {
                    (clustering / c_r) / (l_u / l_r)
                }
            }
        }
    };

    // assortativity over edge endpoints, both orientations
    let assortativity = {
        if e == 0 {
            0.0
        } else {
            let mut xs = Vec::with_capacity(2 * e);
            let mut ys = Vec::with_capacity(2 * e);
            for &(a, b, _) in &t.edges {
                xs.push(t.degree[a] as f64);
                ys.push(t.degree[b] as f64);
                xs.push(t.degree[b] as f64);
                ys.push(t.degree[a] as f64);
            }
            pearson(&xs, &ys)
        }
    };

    // degree-distribution entropy (bits)
    let network_entropy = {
        let mut counts = std::collections::BTreeMap::new();
        for &d in &t.degree {
            *counts.entry(d).or_insert(0usize) += 1;
        }
        let mut h = 0.0;
        for &c in counts.values() {
            let p = c as f64 / nf;
            h -= p * p.log2();
        }
        h.max(0.0)
    };

    // hubs: degree strictly above mean + 1 population std
    let num_hubs = {
        let mean = t.degree.iter().sum::<usize>() as f64 / nf;
        let var = t.degree.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / nf;
        let thresh = mean + var.sqrt();
        t.degree.iter().filter(|&&d| d as f64 > thresh).count() as f64
    };

    let randomness = if clustering == 0.0 { 10.0 } else { (density / clustering).clamp(0.0, 10.0) };

    // resilience: delete the highest-degree node (lowest index on ties),
    // largest remaining component over |V| - 1
    let resilience = {
        let mut target = 0usize;
        for i in 1..n {
            if t.degree[i] > t.degree[target] {
                target = i;
            }
        }
        let mut comp2 = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if start == target || comp2[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp2[start] = next;
            while let Some(u) = stack.pop() {
                for &v in &t.adj[u] {
                    if v != target && comp2[v] == usize::MAX {
                        comp2[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        let mut sizes = vec![0usize; next.max(1)];
        for (i, &c) in comp2.iter().enumerate() {
            if i != target {
                sizes[c] += 1;
            }
        }
        let biggest = sizes.iter().copied().max().unwrap_or(0);
        biggest as f64 / (nf - 1.0)
    };

    let values = [
        size,
        density,
        diameter,
        avg_path_length,
        clustering,
        modularity,
        small_worldness,
        n_components as f64,
        assortativity,
        radius,
        global_efficiency,
        network_entropy,
        num_hubs,
        randomness,
        resilience,
    ];
    debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite graph feature in {values:?}");
    GraphFeatureVector { values }
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Best modularity found along a deterministic greedy agglomerative merge:
/// start from singletons, always merge the pair with the largest gain
/// (lexicographically lowest community pair on ties, communities labeled by
/// their smallest member), merge to a single community, return the best Q
/// seen anywhere along the way.
fn greedy_modularity(t: &Topology) -> f64 {
    let n = t.n;
    let mut w = vec![0.0f64; n * n];
    for &(a, b, wt) in &t.edges {
        w[a * n + b] += wt;
        w[b * n + a] += wt;
    }
    let strength: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w[i * n + j]).sum()).collect();
    let two_m: f64 = strength.iter().sum();
    if two_m <= 0.0 {
        return 0.0;
    }

    // communities: member lists, labeled by smallest member
    let mut comms: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let q_of = |comms: &[Vec<usize>]| -> f64 {
        let mut q = 0.0;
        for c in comms {
            let mut internal = 0.0;
            let mut total = 0.0;
            for &i in c {
                total += strength[i];
                for &j in c {
                    internal += w[i * n + j];
                }
            }
            q += internal / two_m - (total / two_m) * (total / two_m);
        }
        q
    };

    let mut cur = q_of(&comms);
    let mut best = cur;
    while comms.len() > 1 {
        let mut best_delta = f64::NEG_INFINITY;
        let mut best_pair = (0usize, 1usize);
        for a in 0..comms.len() {
            for b in (a + 1)..comms.len() {
                // merging a and b changes Q by 2*(e_ab/2m - s_a s_b/(2m)^2)
                let mut e_ab = 0.0;
                for &i in &comms[a] {
                    for &j in &comms[b] {
                        e_ab += w[i * n + j];
                    }
                }
                let s_a: f64 = comms[a].iter().map(|&i| strength[i]).sum();
                let s_b: f64 = comms[b].iter().map(|&i| strength[i]).sum();
                let delta = 2.0 * (e_ab / two_m - (s_a / two_m) * (s_b / two_m));
                if delta > best_delta {
                    best_delta = delta;
                    best_pair = (a, b);
                }
            }
        }
        let (a, b) = best_pair;
        let mut merged = comms[a].clone();
        merged.extend_from_slice(&comms[b]);
        merged.sort_unstable();
        comms.remove(b);
        comms.remove(a);
        comms.push(merged);
        // keep communities ordered by smallest member so the tie-break
        // "merge the lowest index pair" is the scan order above
        comms.sort_by_key(|c| c[0]);
        cur += best_delta;
        best = best.max(cur);
    }
    best
}
