//! Degree and shortest-path statistics.

use std::collections::{BTreeMap, VecDeque};

use super::MolecularGraph;
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub degree_min: usize,
    pub degree_max: usize,
    pub degree_mean: f64,
    /// Sample standard deviation (n - 1).
    pub degree_stddev: f64,
    pub degree_median: f64,
    pub degree_histogram: BTreeMap<usize, usize>,
    /// Sizes of all connected components, largest first.
    pub component_sizes: Vec<usize>,
    /// Number of nodes on the longest shortest path (edges + 1).
    pub diameter_nodes: usize,
    /// Mean shortest-path length in edges over unordered pairs.
    pub mean_distance: f64,
    /// Median shortest-path length in edges over unordered pairs.
    pub median_distance: f64,
    pub diameter_endpoints: (usize, usize),
    pub diameter_path: Vec<usize>,
}

/// Degree statistics over the whole graph and distance statistics over its
/// largest connected component.
pub fn compute_stats(g: &MolecularGraph) -> Result<GraphStats> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Invalid("statistics of an empty graph".into()));
    }
    let mut degrees: Vec<usize> = (0..n).map(|u| g.degree(u)).collect();
    let mut degree_histogram = BTreeMap::new();
    for &d in &degrees {
        *degree_histogram.entry(d).or_insert(0) += 1;
    }
    let degree_mean = degrees.iter().sum::<usize>() as f64 / n as f64;
    let degree_stddev = if n > 1 {
        let ss: f64 = degrees.iter().map(|&d| (d as f64 - degree_mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    degrees.sort_unstable();
    let degree_median = if n % 2 == 1 {
        degrees[n / 2] as f64
    } else {
        (degrees[n / 2 - 1] + degrees[n / 2]) as f64 / 2.0
    };

    let components = g.components();
    let mut component_sizes: Vec<usize> = components.iter().map(Vec::len).collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    if components.len() > 1 {
        log::warn!(
            "graph has {} components (sizes {:?}); distance statistics use the largest",
            components.len(),
            &component_sizes[..component_sizes.len().min(8)]
        );
    }
    let largest = largest_component(components);
    let d = distance_summary(g, &largest);

    Ok(GraphStats {
        node_count: n,
        edge_count: g.edge_count(),
        degree_min: degrees[0],
        degree_max: degrees[n - 1],
        degree_mean,
        degree_stddev,
        degree_median,
        degree_histogram,
        component_sizes,
        diameter_nodes: d.path.len(),
        mean_distance: d.mean,
        median_distance: d.median,
        diameter_endpoints: (d.path[0], *d.path.last().unwrap()),
        diameter_path: d.path,
    })
}

/// One longest shortest path of the largest component, as node ids from
/// the smaller-id endpoint. Ties go to the lexicographically smallest
/// `(source, target)` pair.
pub fn longest_path(g: &MolecularGraph) -> Vec<usize> {
    if g.is_empty() {
        return Vec::new();
    }
    let largest = largest_component(g.components());
    distance_summary(g, &largest).path
}

fn largest_component(components: Vec<Vec<usize>>) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for c in components {
        if best.as_ref().is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best.unwrap_or_default()
}

struct DistanceSummary {
    mean: f64,
    median: f64,
    path: Vec<usize>,
}

#[derive(Default)]
struct Partial {
    histogram: Vec<u64>,
    // (distance, source, target), maximal distance with smallest pair
    best: Option<(u32, usize, usize)>,
}

fn distance_summary(g: &MolecularGraph, comp: &[usize]) -> DistanceSummary {
    const CHUNK: usize = 64;
    let n = g.node_count();
    let chunks = comp.len().div_ceil(CHUNK);
    let partials = par::map_indexed(chunks, |c| {
        let mut p = Partial::default();
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for &s in &comp[c * CHUNK..((c + 1) * CHUNK).min(comp.len())] {
            bfs(g, s, &mut dist, &mut queue, None);
            // comp is sorted, so targets t > s are counted once per pair
            for &t in comp.iter().filter(|&&t| t > s) {
                let d = dist[t];
                if p.histogram.len() <= d as usize {
                    p.histogram.resize(d as usize + 1, 0);
                }
                p.histogram[d as usize] += 1;
                if p.best.is_none_or(|(bd, _, _)| d > bd) {
                    p.best = Some((d, s, t));
                }
            }
        }
        p
    });

    let mut histogram: Vec<u64> = Vec::new();
    let mut best: Option<(u32, usize, usize)> = None;
    for p in partials {
        if histogram.len() < p.histogram.len() {
            histogram.resize(p.histogram.len(), 0);
        }
        for (h, x) in histogram.iter_mut().zip(&p.histogram) {
            *h += x;
        }
        if let Some(b) = p.best {
            // chunks arrive in source order, so strict '>' keeps the smallest pair
            if best.is_none_or(|(bd, _, _)| b.0 > bd) {
                best = Some(b);
            }
        }
    }

    let pairs: u64 = histogram.iter().sum();
    let (mean, median) = if pairs == 0 {
        (0.0, 0.0)
    } else {
        let total: u64 = histogram.iter().enumerate().map(|(d, &c)| d as u64 * c).sum();
        let lo = kth_value(&histogram, (pairs - 1) / 2);
        let hi = kth_value(&histogram, pairs / 2);
        (total as f64 / pairs as f64, (lo + hi) as f64 / 2.0)
    };

    let path = match best {
        None => comp.first().map(|&s| vec![s]).unwrap_or_default(),
        Some((_, s, t)) => {
            let mut dist = vec![u32::MAX; n];
            let mut parent = vec![usize::MAX; n];
            bfs(g, s, &mut dist, &mut VecDeque::new(), Some(&mut parent));
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            path
        }
    };
    DistanceSummary { mean, median, path }
}

// value at 0-based rank k of the multiset described by histogram
fn kth_value(histogram: &[u64], k: u64) -> u64 {
    let mut acc = 0;
    for (d, &c) in histogram.iter().enumerate() {
        acc += c;
        if acc > k {
            return d as u64;
        }
    }
    unreachable!("rank beyond multiset")
}

fn bfs(
    g: &MolecularGraph,
    s: usize,
    dist: &mut [u32],
    queue: &mut VecDeque<usize>,
    mut parent: Option<&mut [usize]>,
) {
    dist.fill(u32::MAX);
    queue.clear();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                if let Some(p) = parent.as_deref_mut() {
                    p[v] = u;
                }
                queue.push_back(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagon() {
        let s = compute_stats(&MolecularGraph::cycle(6)).unwrap();
        assert_eq!(s.diameter_nodes, 4);
        assert_eq!(s.degree_mean, 2.0);
        assert_eq!(s.diameter_endpoints, (0, 3));
        assert_eq!(s.diameter_path, vec![0, 1, 2, 3]);
        // pairs: 6 at distance 1, 6 at 2, 3 at 3
        assert!((s.mean_distance - 27.0 / 15.0).abs() < 1e-12);
        assert_eq!(s.median_distance, 2.0);
    }

    #[test]
    fn single_edge() {
        let s = compute_stats(&MolecularGraph::path(2)).unwrap();
        assert_eq!((s.degree_min, s.degree_max, s.diameter_nodes), (1, 1, 2));
    }

    #[test]
    fn single_node() {
        let s = compute_stats(&MolecularGraph::path(1)).unwrap();
        assert_eq!(s.diameter_nodes, 1);
        assert_eq!(s.diameter_path, vec![0]);
        assert_eq!(s.mean_distance, 0.0);
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(compute_stats(&MolecularGraph::path(0)).is_err());
    }

    #[test]
    fn disconnected_uses_largest_component() {
        // isolated node 0, path 1-2-3-4, edge 5-6
        let g = MolecularGraph::from_edges(7, [(1, 2), (2, 3), (3, 4), (5, 6)]).unwrap();
        let s = compute_stats(&g).unwrap();
        assert_eq!(s.component_sizes, vec![4, 2, 1]);
        assert_eq!(s.diameter_path, vec![1, 2, 3, 4]);
        assert_eq!(s.degree_histogram.get(&0), Some(&1));
        assert_eq!(s.degree_histogram.values().sum::<usize>(), 7);
    }

    #[test]
    fn longest_path_of_p5() {
        assert_eq!(longest_path(&MolecularGraph::path(5)), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn even_median_averages_middle_pair() {
        // P3 distances: {1, 1, 2} -> median 1; P4: {1,1,1,2,2,3} -> 1.5
        assert_eq!(compute_stats(&MolecularGraph::path(3)).unwrap().median_distance, 1.0);
        assert_eq!(compute_stats(&MolecularGraph::path(4)).unwrap().median_distance, 1.5);
    }
}
