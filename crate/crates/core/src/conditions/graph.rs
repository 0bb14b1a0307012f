//! Stage dependency graphs.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::tableau::{MgarkTableau, PartitionedMgarkTableau, StageLayout, Tier};

/// Strongly connected components of the graph with an edge `i -> j`
/// whenever node `i` depends on node `j`, ordered so that every component
/// comes after the components it depends on.
pub fn dependency_groups(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for (i, j) in edges {
        g.add_edge(nodes[i], nodes[j], ());
    }
    // Tarjan emits components in reverse topological order of the edge
    // direction, i.e. dependencies first.
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

fn mixes_tiers(group: &[usize], tier: impl Fn(usize) -> Tier) -> bool {
    let mut slow = false;
    let mut fast = false;
    for &i in group {
        match tier(i) {
            Tier::Slow => slow = true,
            Tier::Fast(_) => fast = true,
        }
    }
    slow && fast
}

fn edges_of(a: &crate::tableau::Matrix) -> impl Iterator<Item = (usize, usize)> + '_ {
    let (r, c) = a.shape();
    (0..r)
        .flat_map(move |i| (0..c).map(move |j| (i, j)))
        .filter(move |&(i, j)| a[(i, j)] != 0.0)
}

/// True when no implicit group of stages mixes slow and fast stages, so the
/// tiers can be solved one after the other.
pub fn is_decoupled(t: &MgarkTableau) -> bool {
    let layout = t.layout();
    let a = t.flatten().a;
    dependency_groups(layout.len(), edges_of(&a))
        .iter()
        .all(|g| !mixes_tiers(g, |i| layout.tier_of(i)))
}

/// Decoupling on the graph of coordinate and momentum stages: momentum
/// stage `i` depends on coordinate stage `j` through the tilde half and
/// coordinate stages depend on momentum stages through the bar half.
pub fn is_decoupled_partitioned(t: &PartitionedMgarkTableau) -> bool {
    let f = t.flatten();
    let n = f.layout.len();
    // momentum stages 0..n, coordinate stages n..2n
    let edges = edges_of(&f.tilde.a)
        .map(|(i, j)| (i, n + j))
        .chain(edges_of(&f.bar.a).map(|(i, j)| (n + i, j)))
        .collect::<Vec<_>>();
    let layout: &StageLayout = &f.layout;
    dependency_groups(2 * n, edges)
        .iter()
        .all(|g| !mixes_tiers(g, |i| layout.tier_of(i % n)))
}
