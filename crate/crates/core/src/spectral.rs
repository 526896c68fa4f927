//! Depth-k word graphs and Perron roots of their weighted matrices.
//!
//! States are admissible words `v = (v₁ … v_k)`; the matrix has
//! `M[v, (v₂ … v_k, w)] = e_v`. Products with `M` cost one pass over the
//! states because every row of `M` is `e_v` times an indicator of the block
//! of states sharing the prefix `(v₂ … v_k)`.

use crate::error::{Error, Result};
use crate::interval::{down, up};
use std::collections::HashMap;

/// Default cap on the number of depth-k states.
pub const DEFAULT_MAX_STATES: usize = 4_000_000;

/// A depth-k word graph over a finite alphabet of indices `0..m`.
#[derive(Clone, Debug)]
pub struct WordGraph {
    pub k: usize,
    pub states: Vec<Vec<u32>>,
    /// Id of the (k−1)-prefix of each state (k ≥ 2).
    prefix_id: Vec<u32>,
    /// Id of the (k−1)-suffix of each state (k ≥ 2).
    suffix_id: Vec<u32>,
    groups: usize,
    /// For k = 1: per symbol, its successors (or predecessors), stored as a
    /// complement when that list is shorter.
    out_lists: Vec<NeighborList>,
    in_lists: Vec<NeighborList>,
    pub period: usize,
}

impl WordGraph {
    /// All admissible words of length `k` over the symbols listed in `class`
    /// (indices into `adj`), which must form an irreducible class.
    pub fn build(adj: &[Vec<bool>], class: &[usize], k: usize, max_states: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("depth must be at least 1".into()));
        }
        if class.is_empty() {
            return Err(Error::DegenerateTruncation("empty recurrent class".into()));
        }
        let local: Vec<Vec<bool>> =
            class.iter().map(|&i| class.iter().map(|&j| adj[i][j]).collect()).collect();
        let m = class.len();
        let mut states: Vec<Vec<u32>> = (0..m as u32).map(|i| vec![i]).collect();
        for _ in 1..k {
            let mut next = Vec::new();
            for s in &states {
                let last = *s.last().expect("nonempty") as usize;
                for (j, &ok) in local[last].iter().enumerate() {
                    if ok {
                        if next.len() >= max_states {
                            return Err(Error::TooManyStates { states: next.len() + 1, limit: max_states });
                        }
                        let mut w = s.clone();
                        w.push(j as u32);
                        next.push(w);
                    }
                }
            }
            states = next;
        }
        if states.len() > max_states {
            return Err(Error::TooManyStates { states: states.len(), limit: max_states });
        }
        // Map back to the caller's indices.
        for s in &mut states {
            for x in s.iter_mut() {
                *x = class[*x as usize] as u32;
            }
        }
        let mut prefix_id = Vec::new();
        let mut suffix_id = Vec::new();
        let mut groups = 0;
        let (mut out_lists, mut in_lists) = (Vec::new(), Vec::new());
        if k >= 2 {
            let mut ids: HashMap<&[u32], u32> = HashMap::new();
            for s in &states {
                let n = ids.len() as u32;
                ids.entry(&s[..k - 1]).or_insert(n);
            }
            prefix_id = states.iter().map(|s| ids[&s[..k - 1]]).collect();
            suffix_id = states
                .iter()
                .map(|s| ids.get(&s[1..]).copied().unwrap_or(u32::MAX))
                .collect();
            groups = ids.len();
        } else {
            out_lists = (0..m).map(|i| NeighborList::new((0..m).map(|j| local[i][j]))).collect();
            in_lists = (0..m).map(|j| NeighborList::new((0..m).map(|i| local[i][j]))).collect();
        }
        let period = class_period(&local);
        Ok(WordGraph { k, states, prefix_id, suffix_id, groups, out_lists, in_lists, period })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `y = M x` for state weights `e`.
    pub fn apply(&self, e: &[f64], x: &[f64], y: &mut [f64]) {
        if self.k == 1 {
            let total: f64 = x.iter().sum();
            for v in 0..self.len() {
                y[v] = e[v] * self.out_lists[v].sum(self.len(), total, |j| x[j]);
            }
            return;
        }
        let mut block = vec![0.0; self.groups];
        for (v, &g) in self.prefix_id.iter().enumerate() {
            block[g as usize] += x[v];
        }
        for v in 0..self.len() {
            let g = self.suffix_id[v];
            y[v] = if g == u32::MAX { 0.0 } else { e[v] * block[g as usize] };
        }
    }

    /// `y = Mᵀ x` for state weights `e`.
    pub fn apply_transpose(&self, e: &[f64], x: &[f64], y: &mut [f64]) {
        if self.k == 1 {
            let total: f64 = x.iter().zip(e).map(|(a, b)| a * b).sum();
            for w in 0..self.len() {
                y[w] = self.in_lists[w].sum(self.len(), total, |i| x[i] * e[i]);
            }
            return;
        }
        let mut block = vec![0.0; self.groups];
        for v in 0..self.len() {
            let g = self.suffix_id[v];
            if g != u32::MAX {
                block[g as usize] += x[v] * e[v];
            }
        }
        for (w, &g) in self.prefix_id.iter().enumerate() {
            y[w] = block[g as usize];
        }
    }

    /// Successor lists of every state.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        if self.k == 1 {
            return (0..self.len())
                .map(|v| (0..self.len()).filter(|&w| self.out_lists[v].contains(w as u32)).collect())
                .collect();
        }
        let mut by_prefix = vec![Vec::new(); self.groups];
        for (w, &g) in self.prefix_id.iter().enumerate() {
            by_prefix[g as usize].push(w);
        }
        self.suffix_id
            .iter()
            .map(|&g| if g == u32::MAX { Vec::new() } else { by_prefix[g as usize].clone() })
            .collect()
    }

    /// Whether `v → w` is an edge.
    pub fn is_edge(&self, v: usize, w: usize) -> bool {
        if self.k == 1 {
            return self.out_lists[v].contains(w as u32);
        }
        self.suffix_id[v] == self.prefix_id[w]
    }
}

/// Below this fraction of the total, a complement sum is recomputed term by term.
const COMPLEMENT_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
enum NeighborList {
    Listed(Vec<u32>),
    AllBut(Vec<u32>),
}

impl NeighborList {
    fn new(row: impl Iterator<Item = bool> + Clone) -> Self {
        let yes: Vec<u32> = row.clone().enumerate().filter(|p| p.1).map(|p| p.0 as u32).collect();
        let no: Vec<u32> = row.enumerate().filter(|p| !p.1).map(|p| p.0 as u32).collect();
        if no.len() < yes.len() {
            NeighborList::AllBut(no)
        } else {
            NeighborList::Listed(yes)
        }
    }

    fn sum(&self, n: usize, total: f64, f: impl Fn(usize) -> f64) -> f64 {
        match self {
            NeighborList::Listed(v) => v.iter().map(|&j| f(j as usize)).sum(),
            NeighborList::AllBut(v) => {
                let rest = total - v.iter().map(|&j| f(j as usize)).sum::<f64>();
                if rest >= COMPLEMENT_FLOOR * total {
                    return rest;
                }
                // Cancellation would swamp the remainder; add it up directly.
                (0..n).filter(|j| !v.contains(&(*j as u32))).map(f).sum()
            }
        }
    }

    fn contains(&self, j: u32) -> bool {
        match self {
            NeighborList::Listed(v) => v.contains(&j),
            NeighborList::AllBut(v) => !v.contains(&j),
        }
    }
}

/// Period (gcd of cycle lengths) of an irreducible 0/1 matrix.
fn class_period(local: &[Vec<bool>]) -> usize {
    let n = local.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g = 0usize;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !local[i][j] {
                continue;
            }
            if level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            } else {
                g = num_integer::gcd(g, level[i] + 1 - level[j]);
            }
        }
    }
    g.max(1)
}

/// Stopping rule for the Perron iteration.
#[derive(Clone, Copy, Debug)]
pub struct PerronParams {
    /// Stop once `(hi − lo)/lo ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronParams {
    fn default() -> Self {
        PerronParams { tol: 1e-10, max_iter: 100_000 }
    }
}

/// Collatz–Wielandt bracket of a Perron root, with the final positive vector.
#[derive(Clone, Debug)]
pub struct PerronResult {
    /// `log` of the lower bound on ρ(M).
    pub log_lower: f64,
    /// `log` of the upper bound on ρ(M).
    pub log_upper: f64,
    pub iterations: usize,
    pub converged: bool,
    pub vector: Vec<f64>,
}

/// Relative error allowance for one matrix-vector product.
const MATVEC_SLOP: f64 = 1e-12;

/// Perron root of `diag(e)·A` (or its transpose) by power iteration.
///
/// `log_e` are log-weights; they are shifted by their maximum before
/// exponentiation and the shift is added back. The bracket is
/// `min_i (Mx)_i/x_i ≤ ρ ≤ max_i (Mx)_i/x_i`, tightened monotonically.
pub fn perron(g: &WordGraph, log_e: &[f64], transpose: bool, p: PerronParams) -> Result<PerronResult> {
    let n = g.len();
    if n == 0 {
        return Err(Error::DegenerateTruncation("no states".into()));
    }
    if log_e.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Domain("weights must be finite".into()));
    }
    let shift = log_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(PerronResult {
            log_lower: f64::NEG_INFINITY,
            log_upper: f64::NEG_INFINITY,
            iterations: 0,
            converged: true,
            vector: vec![1.0 / n as f64; n],
        });
    }
    let floor = log_e.iter().copied().filter(|v| v.is_finite()).fold(shift, f64::min);
    if shift - floor > LOG_SPREAD_LIMIT {
        return perron_log(g, log_e, transpose, p);
    }
    let e: Vec<f64> = log_e.iter().map(|v| (v - shift).exp()).collect();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    // Periodic classes: iterate M + σI, which has the same Perron vector.
    let mut sigma = if g.period > 1 { e.iter().copied().fold(0.0, f64::max) } else { 0.0 };
    let (mut best_lo, mut best_hi) = (0.0f64, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iter {
        iterations += 1;
        if transpose {
            g.apply_transpose(&e, &x, &mut y);
        } else {
            g.apply(&e, &x, &mut y);
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut all_positive = true;
        for i in 0..n {
            // A zero row leaves the spectral radius of the rest unchanged.
            if e[i] == 0.0 {
                continue;
            }
            if x[i] > 0.0 {
                let r = y[i] / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            } else {
                all_positive = false;
            }
        }
        if !all_positive {
            hi = f64::INFINITY;
        }
        best_lo = best_lo.max(lo * (1.0 - MATVEC_SLOP));
        best_hi = best_hi.min(hi * (1.0 + MATVEC_SLOP));
        debug_assert!(best_lo <= best_hi * (1.0 + 1e-9));
        let scale = y.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::DegenerateTruncation("iteration collapsed to zero".into()));
        }
        if g.period == 1 && iterations >= DAMP_AFTER {
            // Slow convergence means a rival eigenvalue near the circle; M + λ₋I pushes it inward.
            sigma = y.iter().sum::<f64>() / x.iter().sum::<f64>();
        }
        for i in 0..n {
            x[i] = (y[i] + sigma * x[i]) / (scale + sigma);
        }
        if best_hi.is_finite() && best_hi - best_lo <= p.tol * best_lo {
            converged = true;
            break;
        }
    }
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    Ok(PerronResult {
        log_lower: down(best_lo.ln() + shift),
        log_upper: up(best_hi.ln() + shift),
        iterations,
        converged,
        vector: x,
    })
}

/// Undamped iterations before switching to `M + σI`.
const DAMP_AFTER: usize = 200;

/// Weight spreads (in log) beyond which `exp` would flush states to zero.
const LOG_SPREAD_LIMIT: f64 = 600.0;

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// The same iteration carried out on logarithms of the vector entries.
fn perron_log(g: &WordGraph, log_e: &[f64], transpose: bool, p: PerronParams) -> Result<PerronResult> {
    let n = g.len();
    let shift = log_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_e.iter().map(|v| v - shift).collect();
    let log_e = &shifted[..];
    let succ = g.successors();
    let pred = if transpose {
        let mut pred = vec![Vec::new(); n];
        for (v, ws) in succ.iter().enumerate() {
            for &w in ws {
                pred[w].push(v);
            }
        }
        pred
    } else {
        Vec::new()
    };
    let mut log_sigma = if g.period > 1 { log_e.iter().copied().fold(f64::NEG_INFINITY, f64::max) } else { f64::NEG_INFINITY };
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let (mut best_lo, mut best_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iter {
        iterations += 1;
        for v in 0..n {
            y[v] = if transpose {
                log_sum_exp(pred[v].iter().map(|&i| x[i] + log_e[i]))
            } else {
                log_e[v] + log_sum_exp(succ[v].iter().map(|&w| x[w]))
            };
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in 0..n {
            if log_e[v] == f64::NEG_INFINITY {
                continue;
            }
            if x[v] == f64::NEG_INFINITY {
                hi = f64::INFINITY;
            } else {
                let r = y[v] - x[v];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        // Relative error of the inner sums, plus a few ulps of the logs themselves.
        let slop = MATVEC_SLOP + 8.0 * f64::EPSILON * lo.abs().max(hi.abs()).min(f64::MAX);
        best_lo = best_lo.max(lo - slop);
        best_hi = best_hi.min(hi + slop);
        let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::DegenerateTruncation("iteration collapsed to zero".into()));
        }
        if g.period == 1 && iterations >= DAMP_AFTER {
            log_sigma = log_sum_exp(y.iter().copied()) - log_sum_exp(x.iter().copied());
        }
        let denom = log_sum_exp([top, log_sigma].into_iter());
        for v in 0..n {
            x[v] = log_sum_exp([y[v], log_sigma + x[v]].into_iter()) - denom;
        }
        if best_hi.is_finite() && best_hi - best_lo <= p.tol {
            converged = true;
            break;
        }
    }
    let top = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut vector: Vec<f64> = x.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = vector.iter().sum();
    for v in &mut vector {
        *v /= total;
    }
    Ok(PerronResult { log_lower: down(best_lo + shift), log_upper: up(best_hi + shift), iterations, converged, vector })
}
