//! Spectral radii of nonnegative sparse matrices and strongly connected components.

/// Sparse nonnegative matrix given by rows of `(column, weight)`.
pub type SparseRows = Vec<Vec<(usize, f64)>>;

/// Strongly connected components, returned in reverse topological order of the
/// condensation (a component only points to components listed before it).
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    // Iterative Tarjan; the neighborhood graphs can have ~10⁵ vertices.
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next == 0 && index[v] == UNSEEN {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

const TOLERANCE: f64 = 1e-13;
const MAX_ITER: usize = 1_000_000;

/// Perron root of an irreducible block, by power iteration on `B = A + I`
/// (primitive, so the iteration converges) with Collatz–Wielandt bounds
/// `min (Bx)_i/x_i ≤ ρ(B) ≤ max (Bx)_i/x_i` as the stopping rule.
fn perron_root_irreducible(rows: &SparseRows, members: &[usize], local: &[usize]) -> f64 {
    let k = members.len();
    let mut x = vec![1.0f64; k];
    let mut y = vec![0.0f64; k];
    let mut estimate = 0.0;
    for _ in 0..MAX_ITER {
        for (a, &v) in members.iter().enumerate() {
            let mut s = x[a];
            for &(w, weight) in &rows[v] {
                let b = local[w];
                if b != usize::MAX {
                    s += weight * x[b];
                }
            }
            y[a] = s;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for a in 0..k {
            let q = y[a] / x[a];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        estimate = 0.5 * (lo + hi);
        if hi - lo <= TOLERANCE * hi {
            break;
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for a in 0..k {
            x[a] = y[a] / norm;
        }
    }
    estimate - 1.0
}

/// Per-component spectral radii plus, for every vertex, the spectral radius of
/// the submatrix reachable from it.
pub struct SpectralProfile {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub component_radius: Vec<f64>,
    pub reachable_radius: Vec<f64>,
}

impl SpectralProfile {
    pub fn new(rows: &SparseRows) -> SpectralProfile {
        let n = rows.len();
        let adj: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| r.iter().filter(|e| e.1 > 0.0).map(|e| e.0).collect())
            .collect();
        let components = strongly_connected_components(&adj);
        let mut component_of = vec![0; n];
        for (c, comp) in components.iter().enumerate() {
            for &v in comp {
                component_of[v] = c;
            }
        }
        let mut local = vec![usize::MAX; n];
        let mut component_radius = Vec::with_capacity(components.len());
        for comp in &components {
            for (a, &v) in comp.iter().enumerate() {
                local[v] = a;
            }
            let internal = comp
                .iter()
                .any(|&v| adj[v].iter().any(|&w| local[w] != usize::MAX));
            let rho = if !internal {
                0.0
            } else if comp.len() == 1 {
                rows[comp[0]]
                    .iter()
                    .filter(|e| e.0 == comp[0])
                    .map(|e| e.1)
                    .sum()
            } else {
                perron_root_irreducible(rows, comp, &local)
            };
            component_radius.push(rho);
            for &v in comp {
                local[v] = usize::MAX;
            }
        }
        // Components come sinks-first, so successors are final when visited.
        let mut reach_comp = component_radius.clone();
        for (c, comp) in components.iter().enumerate() {
            let mut best = component_radius[c];
            for &v in comp {
                for &w in &adj[v] {
                    let d = component_of[w];
                    if d != c {
                        best = best.max(reach_comp[d]);
                    }
                }
            }
            reach_comp[c] = best;
        }
        let reachable_radius = (0..n).map(|v| reach_comp[component_of[v]]).collect();
        SpectralProfile {
            components,
            component_of,
            component_radius,
            reachable_radius,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.component_radius.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn spectral_radius(rows: &SparseRows) -> f64 {
    SpectralProfile::new(rows).spectral_radius()
}
