//! Fill-reducing nested dissection on an undirected graph.
//!
//! Separators are BFS level sets grown from a pseudo-peripheral vertex; each
//! subgraph is ordered before the separator that splits it off.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const LEAF_SIZE: usize = 64;

/// Returns `perm` with `perm[new] = old`. `adj[v]` lists the neighbours of `v`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut state = State { adj, owner: vec![0; n], stamp: 0, level: vec![usize::MAX; n] };
    let mut order = Vec::with_capacity(n);
    state.dissect((0..n).collect(), &mut order);
    order
}

struct State<'g> {
    adj: &'g [Vec<usize>],
    /// Stamp of the subproblem a vertex currently belongs to.
    owner: Vec<usize>,
    stamp: usize,
    level: Vec<usize>,
}

impl State<'_> {
    fn claim(&mut self, set: &[usize]) -> usize {
        self.stamp += 1;
        for &v in set {
            self.owner[v] = self.stamp;
        }
        self.stamp
    }

    /// BFS inside the claimed set; returns visited vertices in BFS order and
    /// fills `level`.
    fn bfs(&mut self, root: usize, tag: usize) -> Vec<usize> {
        let mut seen = Vec::new();
        let mut queue = VecDeque::new();
        self.level[root] = 0;
        self.owner[root] = tag + 1;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            seen.push(v);
            for &w in &self.adj[v] {
                if self.owner[w] == tag {
                    self.owner[w] = tag + 1;
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &v in &seen {
            self.owner[v] = tag;
        }
        seen
    }

    fn dissect(&mut self, set: Vec<usize>, order: &mut Vec<usize>) {
        if set.len() <= LEAF_SIZE {
            order.extend_from_slice(&set);
            return;
        }
        let tag = self.claim(&set);
        self.stamp += 1;

        // Pseudo-peripheral root: restart from the last vertex reached until
        // the eccentricity stops growing.
        let mut reach = self.bfs(set[0], tag);
        let mut depth = self.level[*reach.last().unwrap()];
        for _ in 0..4 {
            let far = *reach.last().unwrap();
            let trial = self.bfs(far, tag);
            let d = self.level[*trial.last().unwrap()];
            let improved = d > depth;
            reach = trial;
            depth = d;
            if !improved {
                break;
            }
        }

        if reach.len() < set.len() {
            // Disconnected: handle this component and the rest independently.
            self.stamp += 1;
            let mark = self.stamp;
            for &v in &reach {
                self.owner[v] = mark;
            }
            let rest: Vec<usize> = set.iter().copied().filter(|&v| self.owner[v] != mark).collect();
            self.dissect(reach, order);
            self.dissect(rest, order);
            return;
        }
        if depth < 2 {
            order.extend_from_slice(&set);
            return;
        }

        let half = set.len() / 2;
        let mut cut = 1;
        let mut lvl_count = vec![0usize; depth + 1];
        for &v in &reach {
            lvl_count[self.level[v]] += 1;
        }
        let mut acc = 0;
        for (l, &c) in lvl_count.iter().enumerate() {
            acc += c;
            if acc >= half {
                cut = l.clamp(1, depth - 1);
                break;
            }
        }
        let (mut part_a, mut part_b, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &reach {
            let l = self.level[v];
            if l < cut {
                part_a.push(v);
            } else if l > cut {
                part_b.push(v);
            } else if self.adj[v].iter().any(|&w| self.owner[w] == tag && self.level[w] == cut + 1) {
                sep.push(v);
            } else {
                part_a.push(v);
            }
        }
        self.dissect(part_a, order);
        self.dissect(part_b, order);
        order.extend_from_slice(&sep);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_graph(n: usize) -> Vec<Vec<usize>> {
        let id = |i: usize, j: usize| j * n + i;
        let mut adj = vec![Vec::new(); n * n];
        for j in 0..n {
            for i in 0..n {
                if i + 1 < n {
                    adj[id(i, j)].push(id(i + 1, j));
                    adj[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < n {
                    adj[id(i, j)].push(id(i, j + 1));
                    adj[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        adj
    }

    #[test]
    fn ordering_is_a_permutation() {
        for n in [3, 10, 40] {
            let perm = nested_dissection(&grid_graph(n));
            let mut seen = vec![false; n * n];
            for &p in &perm {
                assert!(!seen[p]);
                seen[p] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn disconnected_graph_is_handled() {
        let mut adj = grid_graph(12);
        let off = adj.len();
        for row in grid_graph(12) {
            adj.push(row.into_iter().map(|v| v + off).collect());
        }
        let perm = nested_dissection(&adj);
        assert_eq!(perm.len(), 288);
    }
}
