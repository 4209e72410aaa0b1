//! Product of a transition system with a specification automaton.
//!
//! A product state pairs a region with an automaton state; moving along a
//! region transition feeds the *source* region's label to the automaton. A
//! run of product states therefore tracks exactly the label word of its
//! region projection, and the run is accepting when that word drives the
//! automaton into an accepting state (the final region's label included).
//!
//! On top of the graph this module provides the planning structure: the
//! target state (the reachable accepting state farthest from the start), the
//! potential `W` (shortest distance to the target), reachability
//! neighborhoods, and the path enumerations both planners consume.

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

use super::TransitionSystem;
use crate::scltl::Fsa;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProductError {
    #[error("transition system and automaton are declared over different atom sets")]
    ApMismatch,
    #[error("specification infeasible: no accepting product state is reachable")]
    Infeasible,
}

/// Distance to the target, with unreachability kept as an explicit variant
/// rather than a float sentinel. `Unreachable` compares greater than every
/// finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Finite(f64),
    Unreachable,
}

impl Potential {
    pub fn is_finite(self) -> bool {
        matches!(self, Potential::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Potential::Finite(v) => Some(v),
            Potential::Unreachable => None,
        }
    }
}

impl PartialOrd for Potential {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Potential::Finite(a), Potential::Finite(b)) => a.partial_cmp(b),
            (Potential::Finite(_), Potential::Unreachable) => Some(Ordering::Less),
            (Potential::Unreachable, Potential::Finite(_)) => Some(Ordering::Greater),
            (Potential::Unreachable, Potential::Unreachable) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Finite(v) => write!(f, "{v}"),
            Potential::Unreachable => write!(f, "inf"),
        }
    }
}

impl Serialize for Potential {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Potential::Finite(v) => serializer.serialize_f64(*v),
            Potential::Unreachable => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match Option::<f64>::deserialize(deserializer)? {
            Some(v) => Potential::Finite(v),
            None => Potential::Unreachable,
        })
    }
}

/// Min-heap entry for Dijkstra; the ordering is reversed so the standard
/// max-heap pops the smallest distance first.
struct MinScored(f64, usize);

impl PartialEq for MinScored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MinScored {}

impl PartialOrd for MinScored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinScored {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .expect("edge weights are validated finite")
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Reachable part of the synchronized product, with states indexed in
/// breadth-first discovery order (the initial state is index 0). Immutable
/// after construction.
#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    region: Vec<usize>,
    fsa_state: Vec<usize>,
    accepting: Vec<bool>,
    succ: Vec<Vec<(usize, f64)>>,
    pred: Vec<Vec<(usize, f64)>>,
}

impl ProductAutomaton {
    /// Builds the product reachable from `(initial region, initial automaton
    /// state)`. Parallel region transitions collapse to the cheapest edge;
    /// successor lists are sorted by state index, which fixes the canonical
    /// (lexicographic) enumeration order everywhere below.
    pub fn build(ts: &TransitionSystem, fsa: &Fsa) -> Result<Self, ProductError> {
        if ts.ap().names() != fsa.ap().names() {
            return Err(ProductError::ApMismatch);
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut region = Vec::new();
        let mut fsa_state = Vec::new();
        let mut raw_succ: Vec<BTreeMap<usize, f64>> = Vec::new();
        let mut queue = VecDeque::new();

        let mut intern = |q: usize,
                          sigma: usize,
                          region: &mut Vec<usize>,
                          fsa_state: &mut Vec<usize>,
                          raw_succ: &mut Vec<BTreeMap<usize, f64>>,
                          queue: &mut VecDeque<usize>| {
            *index.entry((q, sigma)).or_insert_with(|| {
                let id = region.len();
                region.push(q);
                fsa_state.push(sigma);
                raw_succ.push(BTreeMap::new());
                queue.push_back(id);
                id
            })
        };

        intern(
            ts.initial(),
            fsa.initial(),
            &mut region,
            &mut fsa_state,
            &mut raw_succ,
            &mut queue,
        );
        while let Some(id) = queue.pop_front() {
            let q = region[id];
            let sigma_next = fsa.step(fsa_state[id], ts.label(q));
            for &(q_next, weight) in ts.successors(q) {
                let to = intern(
                    q_next,
                    sigma_next,
                    &mut region,
                    &mut fsa_state,
                    &mut raw_succ,
                    &mut queue,
                );
                raw_succ[id]
                    .entry(to)
                    .and_modify(|w| *w = w.min(weight))
                    .or_insert(weight);
            }
        }

        let accepting = region
            .iter()
            .zip(&fsa_state)
            .map(|(&q, &sigma)| fsa.is_accepting(fsa.step(sigma, ts.label(q))))
            .collect();
        let succ: Vec<Vec<(usize, f64)>> = raw_succ
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let mut pred = vec![Vec::new(); succ.len()];
        for (from, list) in succ.iter().enumerate() {
            for &(to, weight) in list {
                pred[to].push((from, weight));
            }
        }

        Ok(ProductAutomaton {
            region,
            fsa_state,
            accepting,
            succ,
            pred,
        })
    }

    pub fn state_count(&self) -> usize {
        self.region.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn region(&self, state: usize) -> usize {
        self.region[state]
    }

    pub fn fsa_state(&self, state: usize) -> usize {
        self.fsa_state[state]
    }

    /// Whether ending a run at `state` yields an accepted label word.
    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn successors(&self, state: usize) -> &[(usize, f64)] {
        &self.succ[state]
    }

    /// Region sequence induced by a product run.
    pub fn project(&self, run: &[usize]) -> Vec<usize> {
        run.iter().map(|&s| self.region[s]).collect()
    }

    /// Shortest weighted distances from `source` to every state.
    pub fn shortest_distances(&self, source: usize) -> Vec<Potential> {
        dijkstra(&self.succ, source)
    }

    /// The reachable accepting state farthest (in shortest-path distance)
    /// from the initial state; ties pick the smallest index. This is the
    /// state the potential is anchored to.
    pub fn select_target(&self) -> Result<usize, ProductError> {
        let dist = self.shortest_distances(self.initial());
        let mut best: Option<(f64, usize)> = None;
        for (state, d) in dist.iter().enumerate() {
            if !self.accepting[state] {
                continue;
            }
            if let Potential::Finite(d) = *d {
                match best {
                    Some((bd, _)) if d <= bd => {}
                    _ => best = Some((d, state)),
                }
            }
        }
        best.map(|(_, state)| state).ok_or(ProductError::Infeasible)
    }

    /// Potential table `W`: shortest weighted distance from each state to
    /// `target` (a reverse-graph Dijkstra). With strictly positive weights,
    /// `W` is zero exactly at the target and every state with finite nonzero
    /// potential has a successor of strictly smaller potential.
    pub fn compute_potential(&self, target: usize) -> Vec<Potential> {
        dijkstra(&self.pred, target)
    }

    /// States reachable from `origin` in at most `n` transitions (`origin`
    /// included), sorted by index.
    pub fn reach_neighborhood(&self, origin: usize, n: usize) -> Vec<usize> {
        let mut seen = vec![false; self.state_count()];
        seen[origin] = true;
        let mut frontier = vec![origin];
        for _ in 0..n {
            let mut next = Vec::new();
            for &u in &frontier {
                for &(v, _) in &self.succ[u] {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen.iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }

    /// The `n`-step neighborhood of `origin`, collapsed to `{target}` as
    /// soon as the target is within reach.
    pub fn constrained_neighborhood(&self, origin: usize, n: usize, target: usize) -> Vec<usize> {
        let ball = self.reach_neighborhood(origin, n);
        if ball.binary_search(&target).is_ok() {
            vec![target]
        } else {
            ball
        }
    }

    /// States from which some accepting state is reachable (in zero or more
    /// transitions). Simple paths never leave this set on their way to an
    /// accepting state, so enumeration can prune everything outside it.
    fn can_reach_accepting(&self) -> Vec<bool> {
        let mut can = self.accepting.clone();
        let mut queue: VecDeque<usize> = (0..self.state_count()).filter(|&s| can[s]).collect();
        while let Some(s) = queue.pop_front() {
            for &(p, _) in &self.pred[s] {
                if !can[p] {
                    can[p] = true;
                    queue.push_back(p);
                }
            }
        }
        can
    }

    /// Calls `visit` with every simple path from the initial state that ends
    /// in an accepting state, in lexicographic order of the index sequence.
    /// A single-state run is included when the initial state itself accepts.
    pub fn visit_accepting_runs(&self, mut visit: impl FnMut(&[usize])) {
        let live = self.can_reach_accepting();
        if !live[self.initial()] {
            return;
        }
        let mut on_path = vec![false; self.state_count()];
        on_path[self.initial()] = true;
        let mut path = vec![self.initial()];
        self.run_dfs(&mut path, &mut on_path, &live, &mut visit);
    }

    fn run_dfs(
        &self,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        live: &[bool],
        visit: &mut impl FnMut(&[usize]),
    ) {
        let cur = *path.last().expect("path never empty");
        if self.accepting[cur] {
            visit(path);
        }
        for &(next, _) in &self.succ[cur] {
            if live[next] && !on_path[next] {
                on_path[next] = true;
                path.push(next);
                self.run_dfs(path, on_path, live, visit);
                path.pop();
                on_path[next] = false;
            }
        }
    }

    /// All accepting runs, materialized. Prefer [`visit_accepting_runs`] when
    /// the run set may be large.
    ///
    /// [`visit_accepting_runs`]: Self::visit_accepting_runs
    pub fn enumerate_accepting_runs(&self) -> Vec<Vec<usize>> {
        let mut runs = Vec::new();
        self.visit_accepting_runs(|run| runs.push(run.to_vec()));
        runs
    }

    /// Bounded-horizon walks from `from`: every walk of exactly `b`
    /// transitions, except that a walk reaching `stop` ends there early and
    /// never continues through it. States other than `from` must avoid
    /// `forbidden`. Walks may revisit states; dead ends shorter than the
    /// horizon are dropped. Lexicographic order.
    pub fn finite_paths(
        &self,
        from: usize,
        b: usize,
        forbidden: &HashSet<usize>,
        stop: Option<usize>,
    ) -> Vec<Vec<usize>> {
        assert!(b >= 1, "horizon must be at least 1");
        let mut out = Vec::new();
        let mut path = vec![from];
        self.extend_walk(&mut path, b, forbidden, stop, &mut out);
        out
    }

    fn extend_walk(
        &self,
        path: &mut Vec<usize>,
        remaining: usize,
        forbidden: &HashSet<usize>,
        stop: Option<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().expect("path never empty");
        if stop == Some(cur) || remaining == 0 {
            out.push(path.clone());
            return;
        }
        for &(next, _) in &self.succ[cur] {
            if !forbidden.contains(&next) {
                path.push(next);
                self.extend_walk(path, remaining - 1, forbidden, stop, out);
                path.pop();
            }
        }
    }

    /// DOT rendering; accepting states are double circles and each node is
    /// annotated with its potential when a table is supplied.
    pub fn to_dot(&self, w: Option<&[Potential]>) -> String {
        let mut out = String::from("digraph product {\n  rankdir=LR;\n  init [shape=point];\n");
        for state in 0..self.state_count() {
            let shape = if self.accepting[state] {
                "doublecircle"
            } else {
                "circle"
            };
            let annot = match w {
                Some(table) => format!("\\nW={}", table[state]),
                None => String::new(),
            };
            out.push_str(&format!(
                "  s{state} [shape={shape}, label=\"q{}/{}{annot}\"];\n",
                self.region[state], self.fsa_state[state]
            ));
        }
        out.push_str("  init -> s0;\n");
        for (from, list) in self.succ.iter().enumerate() {
            for &(to, weight) in list {
                out.push_str(&format!("  s{from} -> s{to} [label=\"{weight}\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self, w: Option<&[Potential]>) -> serde_json::Value {
        let states: Vec<_> = (0..self.state_count())
            .map(|s| {
                json!({
                    "region": self.region[s],
                    "automaton_state": self.fsa_state[s],
                    "accepting": self.accepting[s],
                    "w": w.map(|table| table[s]),
                })
            })
            .collect();
        let mut edges = Vec::new();
        for (from, list) in self.succ.iter().enumerate() {
            for &(to, weight) in list {
                edges.push(json!({ "from": from, "to": to, "weight": weight }));
            }
        }
        json!({ "initial": 0, "states": states, "edges": edges })
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<Potential> {
    let mut dist: Vec<Option<f64>> = vec![None; adj.len()];
    dist[source] = Some(0.0);
    let mut heap = BinaryHeap::new();
    heap.push(MinScored(0.0, source));
    while let Some(MinScored(d, u)) = heap.pop() {
        if dist[u].is_some_and(|best| d > best) {
            continue;
        }
        for &(v, weight) in &adj[u] {
            let candidate = d + weight;
            if dist[v].is_none_or(|best| candidate < best) {
                dist[v] = Some(candidate);
                heap.push(MinScored(candidate, v));
            }
        }
    }
    dist.into_iter()
        .map(|d| match d {
            Some(v) => Potential::Finite(v),
            None => Potential::Unreachable,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Transition;
    use crate::scltl::{parse_formula, translate, word_satisfies, ApSet, Formula, Letter};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Unit-weight TS over the given labels and edges; measurement pairs
    /// mirror the edges (distances are irrelevant to the graph layer).
    fn small_ts(ap: &ApSet, labels: &[&[&str]], edges: &[(usize, usize)]) -> TransitionSystem {
        let letters: Vec<Letter> = labels.iter().map(|l| ap.letter(l).unwrap()).collect();
        let transitions = edges
            .iter()
            .enumerate()
            .map(|(i, &(from, to))| Transition {
                from,
                action: format!("u{i}"),
                to,
                weight: 1.0,
            })
            .collect();
        let meas: Vec<_> = edges
            .iter()
            .filter(|&&(a, b)| a != b)
            .map(|&(a, b)| (a, b, 1.0))
            .collect();
        TransitionSystem::new(ap.clone(), letters, 0, transitions, &meas).unwrap()
    }

    fn product_for(
        formula: &str,
        labels: &[&[&str]],
        edges: &[(usize, usize)],
    ) -> ProductAutomaton {
        let ap = ApSet::new(["a", "b"]).unwrap();
        let ts = small_ts(&ap, labels, edges);
        let fsa = translate(&parse_formula(formula, &ap).unwrap(), &ap);
        ProductAutomaton::build(&ts, &fsa).unwrap()
    }

    #[test]
    fn detection_happens_on_arrival() {
        // Two regions, the second labeled `a`: under `F a` the product state
        // reached after moving into the labeled region is the accepting one.
        let p = product_for("F a", &[&[], &["a"]], &[(0, 1)]);
        assert_eq!(p.state_count(), 2);
        assert!(!p.is_accepting(0));
        assert!(p.is_accepting(1));
        assert_eq!(p.select_target().unwrap(), 1);
        assert_eq!(
            p.compute_potential(1),
            vec![Potential::Finite(1.0), Potential::Finite(0.0)]
        );
        assert_eq!(p.project(&[0, 1]), vec![0, 1]);
    }

    #[test]
    fn trivial_spec_mirrors_transition_system() {
        let p = product_for(
            "true",
            &[&[], &[], &[], &[]],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        );
        assert_eq!(p.state_count(), 4);
        assert!((0..4).all(|s| p.is_accepting(s)));
        assert_eq!(p.successors(0), &[(1, 1.0), (2, 1.0)]);
        assert_eq!(
            p.enumerate_accepting_runs(),
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 1, 3],
                vec![0, 2],
                vec![0, 2, 3],
            ]
        );
    }

    #[test]
    fn chain_potential_counts_hops() {
        let p = product_for("F a", &[&[], &["a"], &["a"]], &[(0, 1), (1, 2)]);
        assert_eq!(p.select_target().unwrap(), 2);
        let w = p.compute_potential(2);
        assert_eq!(
            w,
            vec![
                Potential::Finite(2.0),
                Potential::Finite(1.0),
                Potential::Finite(0.0)
            ]
        );
        // Agrees with an independent all-pairs computation.
        let fw = floyd_warshall(&p);
        for s in 0..p.state_count() {
            assert_eq!(w[s].value(), fw[s][2]);
        }
    }

    #[test]
    fn target_ties_break_to_smallest_index() {
        let p = product_for("true", &[&[], &[], &[]], &[(0, 1), (0, 2)]);
        assert_eq!(p.select_target().unwrap(), 1);
    }

    #[test]
    fn unreachable_goal_is_infeasible() {
        let p = product_for("F a", &[&[]], &[(0, 0)]);
        assert_eq!(p.select_target(), Err(ProductError::Infeasible));
    }

    #[test]
    fn mismatched_atom_sets_are_rejected() {
        let ap = ApSet::new(["a", "b"]).unwrap();
        let other = ApSet::new(["a"]).unwrap();
        let ts = small_ts(&ap, &[&[]], &[]);
        let fsa = translate(&parse_formula("F a", &other).unwrap(), &other);
        assert_eq!(
            ProductAutomaton::build(&ts, &fsa).unwrap_err(),
            ProductError::ApMismatch
        );
    }

    #[test]
    fn neighborhoods_grow_with_radius() {
        let p = product_for("F a", &[&[], &["a"], &["a"]], &[(0, 1), (1, 2)]);
        assert_eq!(p.reach_neighborhood(0, 0), vec![0]);
        assert_eq!(p.reach_neighborhood(0, 1), vec![0, 1]);
        assert_eq!(p.reach_neighborhood(0, 5), vec![0, 1, 2]);
        assert_eq!(p.constrained_neighborhood(0, 1, 2), vec![0, 1]);
        assert_eq!(p.constrained_neighborhood(0, 2, 2), vec![2]);
        assert_eq!(p.constrained_neighborhood(2, 1, 2), vec![2]);
    }

    /// Reference enumeration of bounded walks by filtering every index
    /// sequence, mirroring the documented semantics directly.
    fn walks_oracle(
        p: &ProductAutomaton,
        from: usize,
        b: usize,
        forbidden: &HashSet<usize>,
        stop: Option<usize>,
    ) -> Vec<Vec<usize>> {
        let n = p.state_count();
        let mut out = Vec::new();
        for len in 1..=(b + 1) {
            let mut seq = vec![0usize; len];
            loop {
                let ok = seq[0] == from
                    && seq
                        .windows(2)
                        .all(|w| p.successors(w[0]).iter().any(|&(to, _)| to == w[1]))
                    && seq[1..].iter().all(|s| !forbidden.contains(s))
                    && seq[..len - 1].iter().all(|&s| stop != Some(s))
                    && (len == b + 1 || stop == Some(seq[len - 1]));
                if ok {
                    out.push(seq.clone());
                }
                // Odometer over state indices.
                let mut i = len;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    seq[i] += 1;
                    if seq[i] < n {
                        break;
                    }
                    seq[i] = 0;
                }
                if seq.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn bounded_walks_match_brute_force() {
        // A graph with a cycle so walks can revisit states.
        let p = product_for(
            "F b",
            &[&[], &[], &[], &["b"]],
            &[(0, 1), (1, 0), (1, 2), (2, 3), (0, 3)],
        );
        let no_forbidden = HashSet::new();
        let forbidden: HashSet<usize> = [2].into_iter().collect();
        for b in 1..=4 {
            for (fb, stop) in [
                (&no_forbidden, None),
                (&no_forbidden, Some(3)),
                (&forbidden, None),
                (&forbidden, Some(3)),
            ] {
                let got = p.finite_paths(0, b, fb, stop);
                let mut sorted = got.clone();
                sorted.sort();
                assert_eq!(sorted, got, "walks must come out in lexicographic order");
                assert_eq!(got, walks_oracle(&p, 0, b, fb, stop), "b={b}");
            }
        }
        // Starting on the stop state yields just the trivial walk.
        assert_eq!(p.finite_paths(3, 2, &no_forbidden, Some(3)), vec![vec![3]]);
    }

    fn floyd_warshall(p: &ProductAutomaton) -> Vec<Vec<Option<f64>>> {
        let n = p.state_count();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0.0);
        }
        for (from, row) in d.iter_mut().enumerate() {
            for &(to, weight) in p.successors(from) {
                if row[to].is_none_or(|cur| weight < cur) {
                    row[to] = Some(weight);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|cur| a + b < cur) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    #[test]
    fn random_products_satisfy_potential_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a7f);
        let ap = ApSet::new(["a", "b"]).unwrap();
        let mut feasible = 0;
        while feasible < 60 {
            let n = rng.gen_range(2..6);
            let mut edges = Vec::new();
            for from in 0..n {
                for to in 0..n {
                    if from != to && rng.gen_bool(0.35) {
                        edges.push((from, to));
                    }
                }
            }
            let label_pool: [&[&str]; 4] = [&[], &["a"], &["b"], &["a", "b"]];
            let labels: Vec<&[&str]> = (0..n).map(|_| label_pool[rng.gen_range(0..4)]).collect();
            let ts = small_ts(&ap, &labels, &edges);
            let formula = Formula::sample(&mut rng, 2, 3);
            let fsa = translate(&formula, &ap);
            let p = ProductAutomaton::build(&ts, &fsa).unwrap();
            assert!(p.state_count() <= ts.state_count() * fsa.state_count());

            let Ok(target) = p.select_target() else {
                continue;
            };
            feasible += 1;
            let w = p.compute_potential(target);

            let fw = floyd_warshall(&p);
            for s in 0..p.state_count() {
                // Exact distance agreement with the all-pairs oracle.
                assert_eq!(w[s].value(), fw[s][target]);
                // Zero exactly at the target.
                assert_eq!(w[s] == Potential::Finite(0.0), s == target);
                // Finite exactly when the target is reachable.
                assert_eq!(w[s].is_finite(), fw[s][target].is_some());
                // Strict descent step available away from the target.
                if let Potential::Finite(v) = w[s] {
                    if v > 0.0 {
                        assert!(p
                            .successors(s)
                            .iter()
                            .any(|&(next, _)| matches!(w[next], Potential::Finite(nv) if nv < v)));
                    }
                }
            }

            // Every enumerated accepting run projects to a connected region
            // path whose label word satisfies the formula.
            let mut checked = 0;
            p.visit_accepting_runs(|run| {
                if checked >= 50 {
                    return;
                }
                checked += 1;
                let regions = p.project(run);
                for pair in regions.windows(2) {
                    assert!(ts.is_edge(pair[0], pair[1]));
                }
                let word = ts.label_word(&regions);
                assert_eq!(word_satisfies(&formula, &word), Ok(true));
            });
        }
    }

    #[test]
    fn exports_carry_structure() {
        let p = product_for("F a", &[&[], &["a"]], &[(0, 1)]);
        let w = p.compute_potential(1);
        let dot = p.to_dot(Some(&w));
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("W=1"));
        assert!(dot.contains("init -> s0"));
        let v = p.to_json(Some(&w));
        assert_eq!(v["states"][1]["accepting"], serde_json::json!(true));
        assert_eq!(v["states"][1]["w"], serde_json::json!(0.0));
        assert_eq!(v["edges"][0]["from"], serde_json::json!(0));
    }
}
