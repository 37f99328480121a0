//! The neighborhood graph (interior automaton), its substitution matrix, and
//! the stationary frequencies of neighborhood types.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::Scalar;
use crate::interior::{neighborhood_with_table, Neighborhood, SuccessorTable, Word};
use crate::neighbor::{NeighborFilter, NeighborGraph};
use crate::spectral::{strongly_connected_components, SparseRows, SpectralProfile};

/// Largest class size solved in exact rational arithmetic.
pub const EXACT_SOLVE_LIMIT: usize = 512;
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;
pub const POWER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeighborhoodError {
    #[error("seed word {0} is not interior")]
    SeedNotInterior(String),
    #[error("worklist cap of {cap} neighborhoods exceeded")]
    CapExceeded { cap: usize },
    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("the Markov chain has {0} closed classes; the stationary vector is not unique")]
    NotIrreducible(usize),
}

/// Interned interior neighborhoods with their `K × m` successor table.
/// Neighborhood indices are 0-based here; exports shift them to `1..=K`.
#[derive(Clone, Debug)]
pub struct NeighborhoodGraph {
    pub nbhs: Vec<Neighborhood>,
    successor: Vec<u32>,
    m: usize,
    pub seed: Word,
    pub filter: NeighborFilter,
}

/// Runs the worklist from the seed's neighborhood until every interned
/// neighborhood has its `m` successors. `cap` bounds the number of neighborhoods.
pub fn build_neighborhood_graph(
    g: &NeighborGraph,
    seed: &Word,
    filter: NeighborFilter,
    cap: usize,
) -> Result<NeighborhoodGraph, NeighborhoodError> {
    let table = SuccessorTable::new(g, filter);
    if seed.is_empty() || !table.is_interior(seed) {
        return Err(NeighborhoodError::SeedNotInterior(seed.to_string()));
    }
    let m = g.m();
    let start = neighborhood_with_table(&table, seed);
    let mut nbhs = vec![start.clone()];
    let mut index: HashMap<Neighborhood, u32> = HashMap::from([(start, 0)]);
    let mut successor: Vec<u32> = Vec::new();
    let mut next = 0;
    while next < nbhs.len() {
        for label in 1..=m as u8 {
            let child = table.child_neighborhood(&nbhs[next], label);
            let k = match index.get(&child) {
                Some(&k) => k,
                None => {
                    if nbhs.len() >= cap {
                        return Err(NeighborhoodError::CapExceeded { cap });
                    }
                    let k = nbhs.len() as u32;
                    nbhs.push(child.clone());
                    index.insert(child, k);
                    k
                }
            };
            successor.push(k);
        }
        next += 1;
    }
    Ok(NeighborhoodGraph {
        nbhs,
        successor,
        m,
        seed: seed.clone(),
        filter,
    })
}

impl NeighborhoodGraph {
    /// Number of neighborhood types `K`.
    pub fn len(&self) -> usize {
        self.nbhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nbhs.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Successor of neighborhood `k` under child label `label` (1-based).
    pub fn successor(&self, k: usize, label: u8) -> usize {
        self.successor[k * self.m + label as usize - 1] as usize
    }

    pub fn successors(&self, k: usize) -> &[u32] {
        &self.successor[k * self.m..(k + 1) * self.m]
    }

    /// Edges counted with label multiplicity: always `K·m`.
    pub fn edge_count(&self) -> usize {
        self.successor.len()
    }

    pub fn index_of(&self, nbh: &Neighborhood) -> Option<usize> {
        self.nbhs.iter().position(|n| n == nbh)
    }

    /// Neighborhood reached from `start` by following `word`.
    pub fn follow(&self, start: usize, word: &Word) -> usize {
        word.letters()
            .iter()
            .fold(start, |k, &l| self.successor(k, l))
    }

    /// `(parent, label)` pairs with `successor(parent, label) == k`.
    pub fn incoming(&self, k: usize) -> Vec<(usize, u8)> {
        (0..self.len())
            .flat_map(|j| (1..=self.m as u8).map(move |l| (j, l)))
            .filter(|&(j, l)| self.successor(j, l) == k)
            .collect()
    }

    pub fn predecessor_lists(&self) -> Vec<Vec<(usize, u8)>> {
        let mut pred = vec![Vec::new(); self.len()];
        for j in 0..self.len() {
            for l in 1..=self.m as u8 {
                pred[self.successor(j, l)].push((j, l));
            }
        }
        pred
    }

    pub fn substitution_matrix(&self) -> SubstitutionMatrix {
        let rows = (0..self.len())
            .map(|k| {
                let mut row: Vec<(usize, u32)> = Vec::new();
                for &p in self.successors(k) {
                    match row.iter_mut().find(|x| x.0 == p as usize) {
                        Some(x) => x.1 += 1,
                        None => row.push((p as usize, 1)),
                    }
                }
                row.sort_unstable();
                row
            })
            .collect();
        SubstitutionMatrix { rows, m: self.m }
    }
}

/// `s[k][p]` = number of labels `i` with `successor(k, i) = p`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    pub rows: Vec<Vec<(usize, u32)>>,
    pub m: usize,
}

impl SubstitutionMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, k: usize, p: usize) -> u32 {
        self.rows[k]
            .iter()
            .find(|x| x.0 == p)
            .map_or(0, |x| x.1)
    }

    pub fn row_sum(&self, k: usize) -> u32 {
        self.rows[k].iter().map(|x| x.1).sum()
    }

    /// Nonzero entries as `(row, column, count)` triples.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().map(move |&(p, c)| (k, p, c)))
    }

    fn float_rows(&self) -> SparseRows {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(p, c)| (p, c as f64)).collect())
            .collect()
    }

    /// Perron root; equals `m` whenever every row sums to `m`.
    pub fn leading_eigenvalue(&self) -> f64 {
        SpectralProfile::new(&self.float_rows()).spectral_radius()
    }

    /// Left eigenvector of `S/m` for eigenvalue 1, normalized to sum 1.
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution, NeighborhoodError> {
        let k = self.len();
        let adj: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.0).collect())
            .collect();
        let comps = strongly_connected_components(&adj);
        let mut comp_of = vec![0; k];
        for (c, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[v] = c;
            }
        }
        let closed: Vec<usize> = (0..comps.len())
            .filter(|&c| comps[c].iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == c)))
            .collect();
        if closed.len() != 1 {
            return Err(NeighborhoodError::NotIrreducible(closed.len()));
        }
        let class = &comps[closed[0]];
        if k <= EXACT_SOLVE_LIMIT {
            let exact = self.exact_on_class(class);
            let mut values = vec![Scalar::zero(); k];
            for (&v, x) in class.iter().zip(exact) {
                values[v] = x;
            }
            let p = values.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
            Ok(StationaryDistribution {
                p,
                exact: Some(values),
            })
        } else {
            self.power_iteration().map(|p| StationaryDistribution { p, exact: None })
        }
    }

    /// Solves `p (mI - S) = 0`, `Σ p = 1` on a closed class by sparse rational
    /// Gaussian elimination.
    fn exact_on_class(&self, class: &[usize]) -> Vec<Scalar> {
        let n = class.len();
        let local: HashMap<usize, usize> = class.iter().enumerate().map(|(a, &v)| (v, a)).collect();
        let m = BigRational::from_integer(BigInt::from(self.m));
        // Equation for column b: Σ_a p_a (m δ_ab - s_ab) = 0, as sparse rows over unknowns a.
        let mut eqs: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); n];
        for (a, &v) in class.iter().enumerate() {
            eqs[a].push((a, m.clone()));
            for &(w, c) in &self.rows[v] {
                let b = local[&w];
                let coeff = -BigRational::from_integer(BigInt::from(c));
                match eqs[b].iter_mut().find(|x| x.0 == a) {
                    Some(x) => x.1 += coeff,
                    None => eqs[b].push((a, coeff)),
                }
            }
        }
        // The equations are dependent; swap one for the normalization.
        eqs[n - 1] = (0..n).map(|a| (a, Scalar::one())).collect();
        let mut rhs = vec![Scalar::zero(); n];
        rhs[n - 1] = Scalar::one();
        for row in &mut eqs {
            row.retain(|x| !x.1.is_zero());
            row.sort_by_key(|x| x.0);
        }

        let mut used = vec![false; n];
        let mut pivot_row = vec![usize::MAX; n];
        for (col, slot) in pivot_row.iter_mut().enumerate() {
            let pivot = (0..n)
                .filter(|&r| !used[r] && coeff_of(&eqs[r], col).is_some())
                .min_by_key(|&r| eqs[r].len())
                .expect("nonsingular system");
            used[pivot] = true;
            *slot = pivot;
            let pv = coeff_of(&eqs[pivot], col).unwrap().clone();
            let prow = std::mem::take(&mut eqs[pivot]);
            let prhs = rhs[pivot].clone();
            for r in 0..n {
                if r == pivot {
                    continue;
                }
                if let Some(c) = coeff_of(&eqs[r], col) {
                    let factor = c / &pv;
                    eqs[r] = axpy(&eqs[r], &prow, &factor);
                    rhs[r] = &rhs[r] - &factor * &prhs;
                }
            }
            eqs[pivot] = prow;
        }
        (0..n)
            .map(|col| {
                let r = pivot_row[col];
                &rhs[r] / coeff_of(&eqs[r], col).unwrap()
            })
            .collect()
    }

    fn power_iteration(&self) -> Result<Vec<f64>, NeighborhoodError> {
        let k = self.len();
        let m = self.m as f64;
        let mut x = vec![1.0 / k as f64; k];
        let mut y = vec![0.0; k];
        let mut residual = f64::INFINITY;
        for iter in 0..MAX_POWER_ITERATIONS {
            y.iter_mut().for_each(|v| *v = 0.0);
            for (j, row) in self.rows.iter().enumerate() {
                let share = x[j] / m;
                for &(p, c) in row {
                    y[p] += share * c as f64;
                }
            }
            residual = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            if residual < POWER_TOLERANCE {
                let total: f64 = y.iter().sum();
                return Ok(y.into_iter().map(|v| v / total).collect());
            }
            // Lazy step (x + xP)/2: same fixed point, no periodic oscillation.
            for j in 0..k {
                x[j] = 0.5 * (x[j] + y[j]);
            }
            if iter % 1024 == 0 {
                let total: f64 = x.iter().sum();
                x.iter_mut().for_each(|v| *v /= total);
            }
        }
        Err(NeighborhoodError::NonConvergence {
            residual,
            iterations: MAX_POWER_ITERATIONS,
        })
    }
}

fn coeff_of(row: &[(usize, Scalar)], col: usize) -> Option<&Scalar> {
    row.binary_search_by_key(&col, |x| x.0).ok().map(|i| &row[i].1)
}

/// `row - factor·pivot`, merging two sorted sparse rows.
fn axpy(row: &[(usize, Scalar)], pivot: &[(usize, Scalar)], factor: &Scalar) -> Vec<(usize, Scalar)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < pivot.len() {
        let ca = row.get(a).map_or(usize::MAX, |x| x.0);
        let cb = pivot.get(b).map_or(usize::MAX, |x| x.0);
        let (col, value) = if ca < cb {
            a += 1;
            (ca, row[a - 1].1.clone())
        } else if cb < ca {
            b += 1;
            (cb, -(factor * &pivot[b - 1].1))
        } else {
            a += 1;
            b += 1;
            (ca, &row[a - 1].1 - factor * &pivot[b - 1].1)
        };
        if !value.is_zero() {
            out.push((col, value));
        }
    }
    out
}

/// Stationary frequencies of neighborhood types.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution {
    pub p: Vec<f64>,
    /// Rational values when the exact solver was used.
    pub exact: Option<Vec<Scalar>>,
}

impl StationaryDistribution {
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `‖p·(S/m) − p‖₁`.
    pub fn residual(&self, s: &SubstitutionMatrix) -> f64 {
        let mut y = vec![0.0; self.p.len()];
        for (j, row) in s.rows.iter().enumerate() {
            for &(p, c) in row {
                y[p] += self.p[j] * c as f64 / s.m as f64;
            }
        }
        y.iter().zip(&self.p).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Stationary-weighted profile of the interior.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub k: usize,
    pub min_neighbors: usize,
    pub max_neighbors: usize,
    pub avg_neighbors: f64,
    /// Probability of exactly 1, 2 and 3 neighbors.
    pub bucket_freq: [f64; 3],
    /// Probability of more than two thirds of `max_neighbors`.
    pub heavy_freq: f64,
    /// Top three `(index, p_k)`, 0-based indices.
    pub leading: Vec<(usize, f64)>,
}

pub fn stats(ng: &NeighborhoodGraph, p: &StationaryDistribution) -> StatsReport {
    let sizes: Vec<usize> = ng.nbhs.iter().map(Neighborhood::len).collect();
    let min_neighbors = sizes.iter().copied().min().unwrap_or(0);
    let max_neighbors = sizes.iter().copied().max().unwrap_or(0);
    let avg_neighbors = sizes.iter().zip(&p.p).map(|(&s, &q)| s as f64 * q).sum();
    let mut bucket_freq = [0.0; 3];
    let mut heavy_freq = 0.0;
    for (&s, &q) in sizes.iter().zip(&p.p) {
        if (1..=3).contains(&s) {
            bucket_freq[s - 1] += q;
        }
        if 3 * s > 2 * max_neighbors {
            heavy_freq += q;
        }
    }
    let mut order: Vec<usize> = (0..ng.len()).collect();
    order.sort_by(|&a, &b| p.p[b].total_cmp(&p.p[a]).then(a.cmp(&b)));
    let leading = order.iter().take(3).map(|&k| (k, p.p[k])).collect();
    StatsReport {
        k: ng.len(),
        min_neighbors,
        max_neighbors,
        avg_neighbors,
        bucket_freq,
        heavy_freq,
        leading,
    }
}
