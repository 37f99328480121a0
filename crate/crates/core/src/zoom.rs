//! The discrete magnification flow over the neighborhood graph.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::neighborhood::{NeighborhoodGraph, StationaryDistribution};

pub const DEFAULT_HISTORY_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZoomError {
    #[error("child label {label} is outside 1..={m}")]
    BadChild { label: u8, m: usize },
    #[error("neighborhood {0} has no predecessor with positive stationary mass")]
    NoPredecessor(usize),
    #[error("neighborhood index {0} is out of range")]
    BadIndex(usize),
}

/// Successors, predecessors and stationary masses: everything the flow needs.
#[derive(Clone, Debug)]
pub struct ZoomModel {
    m: usize,
    successor: Vec<u32>,
    predecessors: Vec<Vec<(usize, u8)>>,
    p: Vec<f64>,
}

impl ZoomModel {
    pub fn new(ng: &NeighborhoodGraph, p: &StationaryDistribution) -> ZoomModel {
        let successor = (0..ng.len())
            .flat_map(|k| ng.successors(k).iter().copied())
            .collect();
        ZoomModel {
            m: ng.m(),
            successor,
            predecessors: ng.predecessor_lists(),
            p: p.p.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn successor(&self, k: usize, label: u8) -> usize {
        self.successor[k * self.m + label as usize - 1] as usize
    }

    pub fn stationary(&self) -> &[f64] {
        &self.p
    }
}

/// One step of the flow, for trajectory logs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    In(u8),
    Out,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::In(i) => write!(f, "in:{i}"),
            Action::Out => write!(f, "out"),
        }
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Action, String> {
        match s {
            "out" => Ok(Action::Out),
            _ => s
                .strip_prefix("in:")
                .and_then(|d| d.parse().ok())
                .map(Action::In)
                .ok_or_else(|| format!("expected in:<label> or out, got {s:?}")),
        }
    }
}

/// Current neighborhood plus the stack of `(parent, child label)` pairs that led to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZoomState {
    pub current: usize,
    pub history: VecDeque<(usize, u8)>,
    pub rng_seed: u64,
    pub step_count: u64,
    pub history_cap: usize,
    /// Label of `current` inside its parent after the most recent zoom-out.
    pub return_child: Option<u8>,
}

impl ZoomState {
    pub fn new(start: usize, rng_seed: u64) -> ZoomState {
        ZoomState {
            current: start,
            history: VecDeque::new(),
            rng_seed,
            step_count: 0,
            history_cap: DEFAULT_HISTORY_CAP,
            return_child: None,
        }
    }

    pub fn zoom_in(&self, model: &ZoomModel, child: u8) -> Result<ZoomState, ZoomError> {
        self.apply(model, Action::In(child))
    }

    /// Pops the history, or samples a superpiece with probability proportional to
    /// `p_j` per incoming labeled edge `(j, i)`.
    pub fn zoom_out(&self, model: &ZoomModel) -> Result<ZoomState, ZoomError> {
        self.apply(model, Action::Out)
    }

    pub fn apply(&self, model: &ZoomModel, action: Action) -> Result<ZoomState, ZoomError> {
        let mut next = self.clone();
        next.step(model, action)?;
        Ok(next)
    }

    /// In-place transition; on error the state is unchanged.
    pub fn step(&mut self, model: &ZoomModel, action: Action) -> Result<(), ZoomError> {
        match action {
            Action::In(child) => {
                if child == 0 || child as usize > model.m {
                    return Err(ZoomError::BadChild {
                        label: child,
                        m: model.m,
                    });
                }
                self.history.push_back((self.current, child));
                if self.history.len() > self.history_cap {
                    self.history.pop_front();
                }
                self.current = model.successor(self.current, child);
                self.return_child = None;
            }
            Action::Out => {
                if let Some((parent, child)) = self.history.pop_back() {
                    self.current = parent;
                    self.return_child = Some(child);
                } else {
                    let (parent, child) = self.sample_parent(model)?;
                    self.current = parent;
                    self.return_child = Some(child);
                }
            }
        }
        self.step_count += 1;
        Ok(())
    }

    fn sample_parent(&self, model: &ZoomModel) -> Result<(usize, u8), ZoomError> {
        let incoming = &model.predecessors[self.current];
        let total: f64 = incoming.iter().map(|&(j, _)| model.p[j]).sum();
        if total <= 0.0 {
            return Err(ZoomError::NoPredecessor(self.current));
        }
        let mut rng = step_rng(self.rng_seed, self.step_count);
        let mut target = rng.gen::<f64>() * total;
        let mut pick = None;
        for &(j, i) in incoming {
            if model.p[j] <= 0.0 {
                continue;
            }
            pick = Some((j, i));
            target -= model.p[j];
            if target < 0.0 {
                break;
            }
        }
        Ok(pick.expect("positive total mass"))
    }
}

/// Independent stream per step, so replaying a command sequence replays the draws.
fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// One line of a trajectory log: `step, nbhIndex, action, childLabel`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryEntry {
    pub step: u64,
    /// 1-based neighborhood index after the action.
    pub nbh: usize,
    pub action: Action,
    pub child_label: u8,
}

impl fmt::Display for TrajectoryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}, {}, {}, {}",
            self.step, self.nbh, self.action, self.child_label
        )
    }
}

/// Applies `actions` in order, calling `on_step` after each, and returns the log.
pub fn run_script(
    model: &ZoomModel,
    state: &mut ZoomState,
    actions: &[Action],
    mut on_step: impl FnMut(&ZoomState),
) -> Result<Vec<TrajectoryEntry>, ZoomError> {
    let mut log = Vec::with_capacity(actions.len());
    for &action in actions {
        state.step(model, action)?;
        let child_label = match action {
            Action::In(i) => i,
            Action::Out => state.return_child.unwrap_or(0),
        };
        log.push(TrajectoryEntry {
            step: state.step_count,
            nbh: state.current + 1,
            action,
            child_label,
        });
        on_step(state);
    }
    Ok(log)
}

/// Forward walk with uniformly random children; the result starts with `start`.
pub fn random_walk(model: &ZoomModel, start: usize, steps: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(steps + 1);
    let mut k = start;
    path.push(k);
    for _ in 0..steps {
        let child = rng.gen_range(1..=model.m as u8);
        k = model.successor(k, child);
        path.push(k);
    }
    path
}

/// `steps` zoom-ins with uniformly random children.
pub fn random_script(m: usize, steps: usize, seed: u64) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps)
        .map(|_| Action::In(rng.gen_range(1..=m as u8)))
        .collect()
}

/// Fraction of visits to each neighborhood along a path.
pub fn empirical_frequencies(path: &[usize], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &v in path {
        counts[v] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / path.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::presets;
    use crate::interior::{find_interior_word, Word, DEFAULT_FRONTIER_CAP};
    use crate::neighbor::{build_neighbor_graph, NeighborFilter, DEFAULT_CANDIDATE_CAP};
    use crate::neighborhood::build_neighborhood_graph;

    fn model(name: &str, seed: Option<&str>) -> (NeighborhoodGraph, ZoomModel) {
        let g = build_neighbor_graph(&presets::load(name), DEFAULT_CANDIDATE_CAP).unwrap();
        let f = NeighborFilter::Continuum;
        let seed = match seed {
            Some(s) => Word::from(s),
            None => find_interior_word(&g, f, DEFAULT_FRONTIER_CAP).unwrap(),
        };
        let ng = build_neighborhood_graph(&g, &seed, f, usize::MAX).unwrap();
        let p = ng.substitution_matrix().stationary_distribution().unwrap();
        let zm = ZoomModel::new(&ng, &p);
        (ng, zm)
    }

    #[test]
    fn chair_loop_under_label_one() {
        let (_, zm) = model("chair", Some("21"));
        let st = ZoomState::new(0, 7).zoom_in(&zm, 1).unwrap();
        assert_eq!(st.current, 0);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn round_trip_restores_state() {
        let (_, zm) = model("chair", Some("21"));
        let st = ZoomState::new(0, 7).zoom_in(&zm, 4).unwrap();
        for i in 1..=4 {
            let back = st.zoom_in(&zm, i).unwrap().zoom_out(&zm).unwrap();
            assert_eq!((back.current, &back.history), (st.current, &st.history));
        }
    }

    #[test]
    fn sampled_zoom_out_on_chair_is_labeled_one_at_n1() {
        // Every chair neighborhood maps to N¹ under label 1, and nothing else does.
        let (_, zm) = model("chair", Some("21"));
        for seed in 0..50 {
            let st = ZoomState::new(0, seed).zoom_out(&zm).unwrap();
            assert_eq!(st.return_child, Some(1));
            assert_eq!(zm.successor(st.current, 1), 0);
        }
    }

    #[test]
    fn sampled_zoom_out_then_in_returns() {
        let (ng, zm) = model("fractal-square", None);
        for k in 0..ng.len() {
            let st = ZoomState::new(k, 11).zoom_out(&zm).unwrap();
            let back = st.zoom_in(&zm, st.return_child.unwrap()).unwrap();
            assert_eq!(back.current, k);
        }
    }

    #[test]
    fn zoom_out_without_mass_fails() {
        let zm = ZoomModel {
            m: 2,
            successor: vec![1, 1, 1, 1],
            predecessors: vec![vec![], vec![(0, 1), (0, 2), (1, 1), (1, 2)]],
            p: vec![0.0, 1.0],
        };
        assert_eq!(
            ZoomState::new(0, 1).zoom_out(&zm),
            Err(ZoomError::NoPredecessor(0))
        );
    }

    #[test]
    fn bad_child_is_rejected() {
        let (_, zm) = model("chair", Some("21"));
        assert!(ZoomState::new(0, 0).zoom_in(&zm, 5).is_err());
        assert!(ZoomState::new(0, 0).zoom_in(&zm, 0).is_err());
    }

    #[test]
    fn history_cap_truncates_bottom() {
        let (_, zm) = model("chair", Some("21"));
        let mut st = ZoomState::new(0, 3);
        st.history_cap = 2;
        for _ in 0..5 {
            st = st.zoom_in(&zm, 1).unwrap();
        }
        assert_eq!(st.history.len(), 2);
    }

    #[test]
    fn replay_is_deterministic() {
        let (_, zm) = model("fractal-square", None);
        let script: Vec<Action> = "in:1 out out out in:2 out out"
            .split(' ')
            .map(|s| s.parse().unwrap())
            .collect();
        let run = || {
            let mut st = ZoomState::new(3, 99);
            let mut seen = Vec::new();
            let log = run_script(&zm, &mut st, &script, |s| seen.push(s.current)).unwrap();
            (st, seen, log)
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.2[0].to_string(), format!("1, {}, in:1, 1", a.1[0] + 1));
        assert_eq!(a.0.step_count, 7);
    }

    #[test]
    fn walk_frequencies_approach_stationary() {
        let (ng, zm) = model("chair", Some("21"));
        let path = random_walk(&zm, 0, 200_000, 5);
        let freq = empirical_frequencies(&path, ng.len());
        for (a, b) in freq.iter().zip(zm.stationary()) {
            assert!((a - b).abs() < 0.01);
        }
    }

    #[test]
    fn action_parsing() {
        assert_eq!("in:3".parse::<Action>(), Ok(Action::In(3)));
        assert_eq!("out".parse::<Action>(), Ok(Action::Out));
        assert!("up".parse::<Action>().is_err());
    }
}
