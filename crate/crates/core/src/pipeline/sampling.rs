use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::hypergraph::{canonical_set, Hypergraph, NodeId};

use super::PipelineError;

const CORRUPTION_ATTEMPTS: usize = 100;
const UNIFORM_ATTEMPTS: usize = 10_000;

/// Draws `ratio` negatives per hyperedge, in edge order.
///
/// Each negative keeps `⌈s/2⌉` random members of a positive of size `s` and
/// fills up with distinct uniformly drawn nodes. Sets equal to an observed
/// edge or to an earlier negative are rejected; after 100 rejections the
/// draw falls back to fully uniform `s`-subsets.
pub fn sample_negatives<R: Rng + ?Sized>(
    hg: &Hypergraph,
    ratio: usize,
    rng: &mut R,
) -> Result<Vec<Vec<NodeId>>, PipelineError> {
    let n = hg.num_nodes();
    let mut emitted: HashSet<Vec<NodeId>> = HashSet::new();
    let mut out = Vec::with_capacity(hg.num_edges() * ratio);
    let accept = |set: &Vec<NodeId>, emitted: &HashSet<Vec<NodeId>>| {
        !hg.contains_edge(set) && !emitted.contains(set)
    };
    for edge in hg.edges() {
        let s = edge.len();
        if s >= n {
            return Err(PipelineError::UniverseTooSmall { size: s, num_nodes: n });
        }
        let keep = s.div_ceil(2);
        for _ in 0..ratio {
            let mut found = None;
            for _ in 0..CORRUPTION_ATTEMPTS {
                let mut set: Vec<NodeId> = index::sample(rng, s, keep).into_iter().map(|i| edge[i]).collect();
                while set.len() < s {
                    let v = rng.gen_range(0..n);
                    if !set.contains(&v) {
                        set.push(v);
                    }
                }
                let set = canonical_set(set);
                if accept(&set, &emitted) {
                    found = Some(set);
                    break;
                }
            }
            if found.is_none() {
                for _ in 0..UNIFORM_ATTEMPTS {
                    let set = canonical_set(index::sample(rng, n, s).into_vec());
                    if accept(&set, &emitted) {
                        found = Some(set);
                        break;
                    }
                }
            }
            let set = found.ok_or(PipelineError::UniverseTooSmall { size: s, num_nodes: n })?;
            emitted.insert(set.clone());
            out.push(set);
        }
    }
    Ok(out)
}
