//! Stationary Markov measures on finite truncations: the RPF equilibrium
//! measure of a potential, random measures, entropy and integrals, the lift
//! to the suspension flow, and Gibbs/variational checks.

use crate::error::{Error, Result};
use crate::interval::{down, up, CertifiedInterval};
use crate::potential::{CylinderPotential, Term};
use crate::shift::{FiniteShift, Symbol};
use crate::spectral::{perron, PerronParams, WordGraph, DEFAULT_MAX_STATES};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RpfFromPotential,
    UserSupplied,
    Random,
}

/// A stationary Markov chain on the depth-k words of a finite shift.
#[derive(Clone, Debug, Serialize)]
pub struct MarkovMeasure {
    pub depth: usize,
    pub states: Vec<Vec<Symbol>>,
    /// Row-stochastic transitions as `(target, probability)` lists.
    pub transitions: Vec<Vec<(usize, f64)>>,
    pub stationary: Vec<f64>,
    pub provenance: Provenance,
    /// Log Perron root of the midpoint matrix, for RPF measures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_root: Option<CertifiedInterval>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MarkovMeasure {
    /// Build from explicit transitions; the stationary vector is computed.
    pub fn from_transitions(
        depth: usize,
        states: Vec<Vec<Symbol>>,
        transitions: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        if states.is_empty() || states.len() != transitions.len() {
            return Err(Error::Domain("states and transition rows must match".into()));
        }
        for (v, row) in transitions.iter().enumerate() {
            let s: f64 = row.iter().map(|p| p.1).sum();
            if row.iter().any(|&(w, p)| w >= states.len() || !(p >= 0.0) || !p.is_finite())
                || (s - 1.0).abs() > 1e-12
            {
                return Err(Error::Domain(format!("row {v} is not a probability vector")));
            }
            for &(w, _) in row {
                if states[v][1..] != states[w][..depth - 1] {
                    return Err(Error::Domain(format!("transition {v} -> {w} is not admissible")));
                }
            }
        }
        let stationary = stationary_vector(&transitions, None);
        Ok(MarkovMeasure {
            depth,
            states,
            transitions,
            stationary,
            provenance: Provenance::UserSupplied,
            log_root: None,
            notes: Vec::new(),
        })
    }

    /// `‖πP − π‖₁`.
    pub fn stationarity_residual(&self) -> f64 {
        let next = step(&self.transitions, &self.stationary);
        next.iter().zip(&self.stationary).map(|(a, b)| (a - b).abs()).sum()
    }

    /// `(word, weight)` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,weight\n");
        for (s, p) in self.states.iter().zip(&self.stationary) {
            let w: Vec<String> = s.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "{},{:.17e}", w.join(" "), p);
        }
        out
    }
}

fn step(p: &[Vec<(usize, f64)>], pi: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; pi.len()];
    for (v, row) in p.iter().enumerate() {
        for &(w, q) in row {
            next[w] += pi[v] * q;
        }
    }
    next
}

/// Stationary vector by lazy power iteration `π ← π(P + I)/2`, which also
/// handles periodic chains.
fn stationary_vector(p: &[Vec<(usize, f64)>], start: Option<Vec<f64>>) -> Vec<f64> {
    let n = p.len();
    let mut pi = start.unwrap_or_else(|| vec![1.0 / n as f64; n]);
    for _ in 0..200_000 {
        let next = step(p, &pi);
        let mut new: Vec<f64> = next.iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect();
        let s: f64 = new.iter().sum();
        new.iter_mut().for_each(|x| *x /= s);
        let diff: f64 = new.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = new;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

fn words(shift: &FiniteShift, g: &WordGraph) -> Vec<Vec<Symbol>> {
    g.states.iter().map(|s| s.iter().map(|&i| shift.symbols[i as usize]).collect()).collect()
}

fn midpoints(pot: &CylinderPotential, states: &[Vec<Symbol>]) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|w| {
            let v = pot.eval_word(w)?;
            if !v.is_finite() {
                return Err(Error::Domain(format!("potential not finite on {w:?}")));
            }
            Ok(v.midpoint())
        })
        .collect()
}

fn measure_params() -> PerronParams {
    PerronParams { tol: 5e-12, max_iter: 200_000 }
}

/// The equilibrium (Parry–Gibbs) measure of the midpoint potential on the
/// depth-k words of a finite shift, from left and right Perron vectors.
pub fn rpf_measure(shift: &FiniteShift, pot: &CylinderPotential, depth: usize) -> Result<MarkovMeasure> {
    let k = depth.max(pot.depth);
    let mut best: Option<(f64, WordGraph, Vec<f64>, CertifiedInterval)> = None;
    for class in &shift.recurrent_classes {
        let g = WordGraph::build(&shift.adjacency, class, k, DEFAULT_MAX_STATES)?;
        let psi = midpoints(pot, &words(shift, &g))?;
        let r = perron(&g, &psi, false, measure_params())?;
        let root = CertifiedInterval::new(r.log_lower, r.log_upper);
        if best.as_ref().is_none_or(|b| root.midpoint() > b.0) {
            best = Some((root.midpoint(), g, psi, root));
        }
    }
    let (_, g, psi, root) =
        best.ok_or_else(|| Error::DegenerateTruncation("no recurrent class".into()))?;
    let mut notes = Vec::new();
    if shift.recurrent_classes.len() > 1 || shift.recurrent_classes[0].len() < shift.len() {
        notes.push("input reducible: restricted to the irreducible class of largest pressure".into());
    }
    let right = perron(&g, &psi, false, measure_params())?.vector;
    let left = perron(&g, &psi, true, measure_params())?.vector;
    let succ = g.successors();
    let transitions: Vec<Vec<(usize, f64)>> = succ
        .iter()
        .map(|row| {
            let s: f64 = row.iter().map(|&w| right[w]).sum();
            row.iter().map(|&w| (w, right[w] / s)).collect()
        })
        .collect();
    let start: Vec<f64> = {
        let v: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    };
    let stationary = stationary_vector(&transitions, Some(start));
    Ok(MarkovMeasure {
        depth: k,
        states: words(shift, &g),
        transitions,
        stationary,
        provenance: Provenance::RpfFromPotential,
        log_root: Some(root),
        notes,
    })
}

/// A random stationary Markov measure supported on the admissible depth-k
/// transitions of the largest recurrent class.
pub fn random_measure(shift: &FiniteShift, depth: usize, rng: &mut impl Rng) -> Result<MarkovMeasure> {
    let class = shift
        .recurrent_class()
        .ok_or_else(|| Error::DegenerateTruncation("no recurrent class".into()))?;
    let g = WordGraph::build(&shift.adjacency, class, depth, DEFAULT_MAX_STATES)?;
    let transitions: Vec<Vec<(usize, f64)>> = g
        .successors()
        .iter()
        .map(|row| {
            let raw: Vec<f64> = row.iter().map(|_| rng.gen::<f64>().powi(3) + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            row.iter().zip(raw).map(|(&w, x)| (w, x / s)).collect()
        })
        .collect();
    let stationary = stationary_vector(&transitions, None);
    Ok(MarkovMeasure {
        depth,
        states: words(shift, &g),
        transitions,
        stationary,
        provenance: Provenance::Random,
        log_root: None,
        notes: Vec::new(),
    })
}

/// Entropy rate `−Σ_v π_v Σ_w P_vw log P_vw`.
pub fn entropy_of(m: &MarkovMeasure) -> f64 {
    let mut h = 0.0;
    for (v, row) in m.transitions.iter().enumerate() {
        for &(_, p) in row {
            if p > 0.0 {
                h -= m.stationary[v] * p * p.ln();
            }
        }
    }
    h
}

/// `∫ pot dm` as an interval, for potentials of depth at most `depth + 1`.
pub fn integrate(m: &MarkovMeasure, pot: &CylinderPotential) -> Result<CertifiedInterval> {
    if pot.terms.iter().all(|t| matches!(t, Term::Constant { .. })) {
        let c: f64 = pot.terms.iter().map(|t| if let Term::Constant { value } = t { *value } else { 0.0 }).sum();
        return Ok(CertifiedInterval::point(c));
    }
    let (mut lo, mut hi, mut mag) = (0.0, 0.0, 0.0);
    let mut add = |w: f64, v: CertifiedInterval| {
        lo += w * v.lower;
        hi += w * v.upper;
        mag += w * (v.lower.abs().max(v.upper.abs()));
    };
    if pot.depth <= m.depth {
        for (s, &w) in m.states.iter().zip(&m.stationary) {
            add(w, pot.eval_word(s)?);
        }
    } else if pot.depth == m.depth + 1 {
        for (v, row) in m.transitions.iter().enumerate() {
            for &(t, p) in row {
                let mut word = m.states[v].clone();
                word.push(*m.states[t].last().expect("nonempty state"));
                add(m.stationary[v] * p, pot.eval_word(&word)?);
            }
        }
    } else {
        return Err(Error::Domain(format!(
            "potential depth {} exceeds measure depth {} + 1",
            pot.depth, m.depth
        )));
    }
    let err = mag * 1e-13 + 1e-300;
    Ok(CertifiedInterval::new(down(lo - err), up(hi + err)))
}

/// A base measure seen through the suspension: roof integral, flow entropy
/// and the flow integral of `F` with `∫ Δ_F` given by `base_integrand`.
#[derive(Clone, Debug, Serialize)]
pub struct FlowMeasureStats {
    pub base_entropy: f64,
    pub roof_integral: CertifiedInterval,
    pub base_integral: CertifiedInterval,
    pub flow_entropy: CertifiedInterval,
    pub flow_integral: CertifiedInterval,
}

/// `x / y` for an interval `y` bounded away from zero.
fn div(x: CertifiedInterval, y: CertifiedInterval) -> Result<CertifiedInterval> {
    if y.lower <= 0.0 {
        return Err(Error::Domain("roof integral must be positive".into()));
    }
    // Quotients that are exact in floating point need no outward rounding.
    let q = |a: f64, b: f64| {
        let c = a / b;
        (c, c.mul_add(b, -a) == 0.0)
    };
    let c = [q(x.lower, y.lower), q(x.lower, y.upper), q(x.upper, y.lower), q(x.upper, y.upper)];
    // On ties keep the inexact candidate so it gets rounded outward.
    let pick = |better: fn(f64, f64) -> bool, init: f64| {
        c.iter().copied().fold((init, true), |m, v| {
            if better(v.0, m.0) || (v.0 == m.0 && !v.1) {
                v
            } else {
                m
            }
        })
    };
    let lo = pick(|a, b| a < b, f64::INFINITY);
    let hi = pick(|a, b| a > b, f64::NEG_INFINITY);
    let lo = if lo.1 { lo.0 } else { down(lo.0) };
    let hi = if hi.1 { hi.0 } else { up(hi.0) };
    Ok(CertifiedInterval::new(lo, hi))
}

pub fn lift(
    m: &MarkovMeasure,
    roof: &CylinderPotential,
    base_integrand: &CylinderPotential,
) -> Result<FlowMeasureStats> {
    let h = entropy_of(m);
    let roof_integral = integrate(m, roof)?;
    let base_integral = integrate(m, base_integrand)?;
    Ok(FlowMeasureStats {
        base_entropy: h,
        roof_integral,
        base_integral,
        flow_entropy: div(CertifiedInterval::point(h), roof_integral)?,
        flow_integral: div(base_integral, roof_integral)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsDepth {
    pub depth: usize,
    pub log_min_ratio: f64,
    pub log_max_ratio: f64,
    /// `max ratio / min ratio`.
    pub spread: f64,
    /// Spread after dividing each ratio by `l(s₀) e^{−ψ(s₀)} r(sₙ)`, the
    /// boundary factor of the potential's left and right Perron vectors.
    /// Exactly 1 for the RPF measure of the same potential.
    pub normalized_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsReport {
    pub pressure: f64,
    pub depths: Vec<GibbsDepth>,
    /// Largest spread over all depths: a Gibbs constant `C` works with `C² ≥` this.
    pub max_spread: f64,
    /// Whether the normalized spread never grows by more than a factor `1 + 1e-6`.
    pub bounded: bool,
}

/// Extremes of `μ(C_{s₀…sₙ}) / exp(−nP + Σ_{i=0}^{n} ψ(s_i))` over all
/// cylinders of `n + 1` states, where `ψ` is the potential's midpoint on a
/// state's word.
///
/// Computed by max-plus and min-plus dynamic programming over paths.
pub fn gibbs_ratio_check(
    m: &MarkovMeasure,
    pot: &CylinderPotential,
    p: f64,
    depths: std::ops::RangeInclusive<usize>,
) -> Result<GibbsReport> {
    if *depths.start() == 0 {
        return Err(Error::Domain("depths start at 1".into()));
    }
    if pot.depth > m.depth {
        return Err(Error::Domain("potential deeper than the measure's states".into()));
    }
    let psi = midpoints(pot, &m.states)?;
    let n = m.states.len();
    let (ln_l, ln_r) = boundary_vectors(m, &psi)?;
    let init: Vec<f64> = m
        .stationary
        .iter()
        .zip(&psi)
        .map(|(&x, &f)| if x > 0.0 { x.ln() - f } else { f64::NAN })
        .collect();
    // Raw and boundary-normalized paths share the increments.
    let init_norm: Vec<f64> = init.iter().zip(&psi).zip(&ln_l).map(|((&a, &f), &l)| a + f - l).collect();
    let (mut hi, mut lo) = (init.clone(), init);
    let (mut nhi_, mut nlo_) = (init_norm.clone(), init_norm);
    let mut out = Vec::new();
    for d in 1..=*depths.end() {
        let step = |from: &[f64], pick_max: bool| {
            let mut next = vec![f64::NAN; n];
            for v in 0..n {
                if from[v].is_nan() {
                    continue;
                }
                for &(w, q) in &m.transitions[v] {
                    if q <= 0.0 {
                        continue;
                    }
                    let a = from[v] + q.ln() - psi[w] + p;
                    if next[w].is_nan() || (pick_max && a > next[w]) || (!pick_max && a < next[w]) {
                        next[w] = a;
                    }
                }
            }
            next
        };
        hi = step(&hi, true);
        lo = step(&lo, false);
        nhi_ = step(&nhi_, true);
        nlo_ = step(&nlo_, false);
        if depths.contains(&d) {
            let mx = hi.iter().copied().filter(|x| !x.is_nan()).fold(f64::NEG_INFINITY, f64::max);
            let mn = lo.iter().copied().filter(|x| !x.is_nan()).fold(f64::INFINITY, f64::min);
            let nmx = nhi_.iter().zip(&ln_r).map(|(a, r)| a - r).filter(|x| !x.is_nan()).fold(f64::NEG_INFINITY, f64::max);
            let nmn = nlo_.iter().zip(&ln_r).map(|(a, r)| a - r).filter(|x| !x.is_nan()).fold(f64::INFINITY, f64::min);
            out.push(GibbsDepth {
                depth: d,
                log_min_ratio: mn,
                log_max_ratio: mx,
                spread: (mx - mn).exp(),
                normalized_spread: (nmx - nmn).exp(),
            });
        }
    }
    let max_spread = out.iter().map(|g| g.spread).fold(0.0, f64::max);
    let nmax = out.iter().map(|g| g.normalized_spread).fold(0.0, f64::max);
    let nmin = out.iter().map(|g| g.normalized_spread).fold(f64::INFINITY, f64::min);
    Ok(GibbsReport { pressure: p, depths: out, max_spread, bounded: nmax <= nmin * (1.0 + 1e-6) })
}

/// Logs of the left and right Perron vectors of `K_{vw} = e^{ψ(w)}` on the
/// measure's support, scaled so that `Σ l r = 1`.
fn boundary_vectors(m: &MarkovMeasure, psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = psi.len();
    let top = psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = psi.iter().map(|f| (f - top).exp()).collect();
    let edges: Vec<(usize, usize)> = m
        .transitions
        .iter()
        .enumerate()
        .flat_map(|(v, row)| row.iter().filter(|t| t.1 > 0.0).map(move |&(w, _)| (v, w)))
        .collect();
    // Damped power iteration: (K + λI) has the same Perron vectors and no rival eigenvalue on the circle.
    let iterate = |left: bool| -> Result<Vec<f64>> {
        let mut x = vec![1.0 / n as f64; n];
        let mut lambda = 1.0;
        for _ in 0..MAX_BOUNDARY_ITER {
            let mut y: Vec<f64> = x.iter().map(|&a| lambda * a).collect();
            let mut kx = vec![0.0; n];
            for &(v, w) in &edges {
                if left {
                    kx[w] += x[v] * e[w];
                } else {
                    kx[v] += e[w] * x[w];
                }
            }
            lambda = kx.iter().sum::<f64>() / x.iter().sum::<f64>();
            for i in 0..n {
                y[i] += kx[i];
            }
            let total: f64 = y.iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::DegenerateTruncation("boundary vector collapsed".into()));
            }
            let mut change = 0.0f64;
            for i in 0..n {
                let v = y[i] / total;
                change = change.max((v - x[i]).abs() / v.max(f64::MIN_POSITIVE));
                x[i] = v;
            }
            if change < 1e-15 {
                break;
            }
        }
        Ok(x)
    };
    let l = iterate(true)?;
    let r = iterate(false)?;
    let dot: f64 = l.iter().zip(&r).map(|(a, b)| a * b).sum();
    let half = 0.5 * dot.ln();
    Ok((l.iter().map(|a| a.ln() - half).collect(), r.iter().map(|b| b.ln() - half).collect()))
}

const MAX_BOUNDARY_ITER: usize = 200_000;

#[derive(Clone, Debug, Serialize)]
pub struct VariationalSample {
    pub entropy: f64,
    pub integral: CertifiedInterval,
    /// `h + upper(∫ pot)`.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    pub seed: u64,
    /// Enclosure of the truncation pressure (lower/upper endpoint matrices).
    pub pressure: CertifiedInterval,
    /// Pressure of the midpoint potential.
    pub midpoint_pressure: CertifiedInterval,
    pub samples: Vec<VariationalSample>,
    /// Largest `h + ∫ pot − upper(pressure)` over the samples.
    pub max_excess: f64,
    pub all_below: bool,
    /// `h + ∫ψ` for the RPF measure of the midpoint potential `ψ`.
    pub rpf_value: f64,
    pub rpf_gap: f64,
    pub rpf_attains: bool,
}

/// Variational inequality on a finite shift: random stationary Markov
/// measures stay below the pressure; the RPF measure attains it.
pub fn variational_check(
    shift: &FiniteShift,
    pot: &CylinderPotential,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<VariationalReport> {
    if samples == 0 {
        return Err(Error::Domain("at least one sample".into()));
    }
    let k = depth.max(pot.depth);
    let params = crate::pressure::PressureParams::with_depth(k);
    let pressure = crate::pressure::pressure_truncated(shift, pot, params)?.enclosure;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..samples {
        let m = random_measure(shift, k, &mut rng)?;
        let h = entropy_of(&m);
        let integral = integrate(&m, pot)?;
        let value = h + integral.upper;
        max_excess = max_excess.max(value - pressure.upper);
        out.push(VariationalSample { entropy: h, integral, value });
    }
    let rpf = rpf_measure(shift, pot, k)?;
    let mids = midpoints(pot, &rpf.states)?;
    let rpf_value = entropy_of(&rpf) + rpf.stationary.iter().zip(&mids).map(|(a, b)| a * b).sum::<f64>();
    let root = rpf.log_root.expect("rpf measures carry their root");
    let rpf_gap = (rpf_value - root.midpoint()).abs();
    Ok(VariationalReport {
        seed,
        pressure,
        midpoint_pressure: root,
        samples: out,
        max_excess,
        all_below: max_excess <= 1e-9,
        rpf_value,
        rpf_gap,
        rpf_attains: rpf_gap <= 1e-8,
    })
}

/// Central difference of `t ↦ log ρ(ψ_base − t ψ_τ)` against `−∫ ψ_τ dν_t`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub t: f64,
    pub step: f64,
    pub finite_difference: f64,
    pub minus_roof_integral: f64,
    pub error: f64,
}

pub fn derivative_check(
    shift: &FiniteShift,
    base: &CylinderPotential,
    t: f64,
    step: f64,
    depth: usize,
) -> Result<DerivativeReport> {
    let at = |s: f64| -> Result<f64> {
        let m = rpf_measure(shift, &base.plus_tau(-s), depth)?;
        Ok(m.log_root.expect("rpf root").midpoint())
    };
    let fd = (at(t + step)? - at(t - step)?) / (2.0 * step);
    let m = rpf_measure(shift, &base.plus_tau(-t), depth)?;
    let tau = midpoints(&CylinderPotential::tau(1.0), &m.states)?;
    let integral: f64 = m.stationary.iter().zip(&tau).map(|(a, b)| a * b).sum();
    Ok(DerivativeReport {
        t,
        step,
        finite_difference: fd,
        minus_roof_integral: -integral,
        error: (fd + integral).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{truncate, TransitionRule};

    fn two_block() -> FiniteShift {
        FiniteShift::full_block(vec![4, 5])
    }

    #[test]
    fn bernoulli_half() {
        let m = rpf_measure(&two_block(), &CylinderPotential::zero(), 1).unwrap();
        for row in &m.transitions {
            for &(_, p) in row {
                assert!((p - 0.5).abs() < 1e-12);
            }
        }
        assert!((entropy_of(&m) - 2f64.ln()).abs() < 1e-12);
        assert!(m.stationarity_residual() < 1e-12);
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.3, -0.4);
        let mut values = std::collections::BTreeMap::new();
        values.insert(vec![4], CertifiedInterval::point(a));
        values.insert(vec![5], CertifiedInterval::point(b));
        let pot = CylinderPotential::from_terms(vec![crate::potential::Term::Table { depth: 1, values }]);
        let m = rpf_measure(&two_block(), &pot, 1).unwrap();
        // Bernoulli(e^a, e^b)/Z.
        let z = a.exp() + b.exp();
        assert!((m.stationary[0] - a.exp() / z).abs() < 1e-10);
        let total = entropy_of(&m) + integrate(&m, &pot).unwrap().midpoint();
        assert!((total - z.ln()).abs() < 1e-10);
    }

    #[test]
    fn deterministic_cycle_has_zero_entropy() {
        let m = MarkovMeasure::from_transitions(1, vec![vec![4], vec![5]], vec![vec![(1, 1.0)], vec![(0, 1.0)]])
            .unwrap();
        assert_eq!(entropy_of(&m), 0.0);
        assert!((m.stationary[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_integrates_to_itself() {
        let s = truncate(&TransitionRule::positive_geodesic(), 9).unwrap();
        let m = random_measure(&s, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let v = integrate(&m, &CylinderPotential::constant(1.25)).unwrap();
        assert!(v.contains(1.25) && v.width() < 1e-11);
    }

    #[test]
    fn inadmissible_user_transitions_rejected() {
        let r = MarkovMeasure::from_transitions(
            2,
            vec![vec![4, 5], vec![5, 4]],
            vec![vec![(0, 1.0)], vec![(1, 1.0)]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn unit_roof_keeps_entropy() {
        let s = truncate(&TransitionRule::positive_geodesic(), 8).unwrap();
        let m = rpf_measure(&s, &CylinderPotential::tau(-0.8), 1).unwrap();
        let f = lift(&m, &CylinderPotential::constant(1.0), &CylinderPotential::zero()).unwrap();
        assert!(f.flow_entropy.contains(entropy_of(&m)));
        assert_eq!(f.flow_entropy, CertifiedInterval::point(entropy_of(&m)));
    }

    #[test]
    fn rpf_ratios_exact_on_two_block() {
        let m = rpf_measure(&two_block(), &CylinderPotential::zero(), 1).unwrap();
        let g = gibbs_ratio_check(&m, &CylinderPotential::zero(), 2f64.ln(), 1..=5).unwrap();
        // The ratio is μ(C)/exp(−nP) with n + 1 symbols in C: identically 1/2.
        for d in &g.depths {
            assert!((d.log_max_ratio + 2f64.ln()).abs() < 1e-10);
            assert!((d.log_min_ratio + 2f64.ln()).abs() < 1e-10);
        }
        assert!(g.bounded);
        assert!(g.depths.iter().all(|d| (d.normalized_spread - 1.0).abs() < 1e-10));
    }

    #[test]
    fn rpf_normalized_ratios_are_one() {
        let s = truncate(&TransitionRule::positive_geodesic(), 10).unwrap();
        let pot = CylinderPotential::tau(-0.8);
        for k in 1..=2 {
            let m = rpf_measure(&s, &pot, k).unwrap();
            let p = m.log_root.unwrap().midpoint();
            let g = gibbs_ratio_check(&m, &pot, p, 1..=4).unwrap();
            for d in &g.depths {
                assert!((d.normalized_spread - 1.0).abs() < 1e-8, "k = {k}: {d:?}");
            }
        }
    }

    #[test]
    fn csv_has_a_row_per_state() {
        let m = rpf_measure(&two_block(), &CylinderPotential::zero(), 2).unwrap();
        assert_eq!(m.to_csv().lines().count(), 1 + m.states.len());
    }
}
