//! Gurevich pressure of cylinder potentials: finite truncations, a periodic
//! orbit oracle, one-cylinder series and the combined countable-alphabet
//! enclosure.

use crate::error::{Error, Result};
use crate::interval::CertifiedInterval;
use crate::minus_cf::Digit;
use crate::potential::CylinderPotential;
use crate::series::{log_sum, one_cylinder_sum, DivergenceWitness, SeriesSum, SumEnclosure, DEFAULT_EXPLICIT_TERMS};
use crate::shift::{truncate, FiniteShift, Symbol, TransitionRule};
use crate::spectral::{perron, PerronParams, WordGraph, DEFAULT_MAX_STATES};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Default budget for the periodic orbit oracle (`states² · n` operations).
pub const DEFAULT_ORACLE_CAP: f64 = 1e10;

/// Knobs shared by all pressure computations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PressureParams {
    /// Word length of the matrix states; raised to the potential's depth if smaller.
    pub depth: usize,
    #[serde(skip)]
    pub perron: PerronParams,
    pub max_states: usize,
    /// Terms summed explicitly before the tail bound in one-cylinder series.
    pub explicit_terms: u64,
}

impl Default for PressureParams {
    fn default() -> Self {
        PressureParams {
            depth: 1,
            perron: PerronParams::default(),
            max_states: DEFAULT_MAX_STATES,
            explicit_terms: DEFAULT_EXPLICIT_TERMS,
        }
    }
}

impl PressureParams {
    pub fn with_depth(depth: usize) -> Self {
        PressureParams { depth, ..Default::default() }
    }
}

/// A finite enclosure or `+∞` with evidence.
#[derive(Clone, Debug, PartialEq)]
pub enum PressureValue {
    Finite(CertifiedInterval),
    Infinite(DivergenceWitness),
}

impl PressureValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, PressureValue::Infinite(_))
    }

    pub fn finite(&self) -> Option<CertifiedInterval> {
        match self {
            PressureValue::Finite(c) => Some(*c),
            PressureValue::Infinite(_) => None,
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            PressureValue::Finite(c) => c.lower,
            PressureValue::Infinite(_) => f64::INFINITY,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            PressureValue::Finite(c) => c.upper,
            PressureValue::Infinite(_) => f64::INFINITY,
        }
    }
}

impl Serialize for PressureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PressureValue::Finite(c) => c.serialize(s),
            PressureValue::Infinite(w) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("infinite", &true)?;
                m.serialize_entry("witness", w)?;
                m.end()
            }
        }
    }
}

/// Outcome of [`pressure_truncated`].
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedPressure {
    pub enclosure: CertifiedInterval,
    pub depth: usize,
    pub states: usize,
    pub iterations: usize,
    /// False when the Perron bracket did not reach the tolerance; the
    /// enclosure is still valid, only wider.
    pub converged: bool,
    pub classes: usize,
}

/// What produced each side of a [`pressure`] enclosure.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PressureDiagnostics {
    pub truncation: Option<Symbol>,
    pub depth: usize,
    pub states: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Plain finite truncation `truncate(rule, N)`.
    pub truncated: Option<CertifiedInterval>,
    /// Truncation with every symbol above `N` lumped into one state.
    pub lumped: Option<CertifiedInterval>,
    /// `log Σ_n e^{sup φ|C_n}` over the whole alphabet.
    pub domination_upper: Option<f64>,
    pub lower_source: String,
    pub upper_source: String,
    pub tail_sum: Option<SumEnclosure>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureResult {
    pub value: PressureValue,
    pub diagnostics: PressureDiagnostics,
}

/// Log weights of a word graph's states for the lower and upper matrices.
fn state_weights(
    g: &WordGraph,
    weight: impl Fn(&[u32]) -> Result<CertifiedInterval>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = Vec::with_capacity(g.len());
    let mut hi = Vec::with_capacity(g.len());
    for s in &g.states {
        let v = weight(s)?;
        if v.upper == f64::INFINITY {
            return Err(Error::TailNotCertifiable(format!(
                "potential is unbounded above on a matrix state {s:?}"
            )));
        }
        lo.push(v.lower);
        hi.push(v.upper);
    }
    Ok((lo, hi))
}

struct Bracket {
    enclosure: CertifiedInterval,
    states: usize,
    iterations: usize,
    converged: bool,
}

fn bracket(g: &WordGraph, lo: &[f64], hi: &[f64], p: PerronParams) -> Result<Bracket> {
    let a = perron(g, lo, false, p)?;
    let b = perron(g, hi, false, p)?;
    let lower = a.log_lower;
    let upper = b.log_upper.max(lower);
    Ok(Bracket {
        enclosure: CertifiedInterval::new(lower, upper),
        states: g.len(),
        iterations: a.iterations + b.iterations,
        converged: a.converged && b.converged,
    })
}

/// Log spectral radius enclosure of the depth-k weighted matrix of a finite
/// shift, maximized over its irreducible classes.
pub fn pressure_truncated(
    shift: &FiniteShift,
    pot: &CylinderPotential,
    params: PressureParams,
) -> Result<TruncatedPressure> {
    if shift.recurrent_classes.is_empty() {
        return Err(Error::DegenerateTruncation("no recurrent class".into()));
    }
    let k = params.depth.max(pot.depth);
    let mut best: Option<Bracket> = None;
    let (mut states, mut iterations, mut converged) = (0, 0, true);
    for class in &shift.recurrent_classes {
        let g = WordGraph::build(&shift.adjacency, class, k, params.max_states)?;
        let (lo, hi) = state_weights(&g, |s| {
            let w: Vec<Symbol> = s.iter().map(|&i| shift.symbols[i as usize]).collect();
            pot.eval_word(&w)
        })?;
        let b = bracket(&g, &lo, &hi, params.perron)?;
        states += b.states;
        iterations += b.iterations;
        converged &= b.converged;
        best = Some(match best {
            None => b,
            Some(prev) => {
                let e = CertifiedInterval::new(
                    prev.enclosure.lower.max(b.enclosure.lower),
                    prev.enclosure.upper.max(b.enclosure.upper),
                );
                Bracket { enclosure: e, ..prev }
            }
        });
    }
    let enclosure = best.expect("at least one class").enclosure;
    Ok(TruncatedPressure {
        enclosure,
        depth: k,
        states,
        iterations,
        converged,
        classes: shift.recurrent_classes.len(),
    })
}

/// `(1/n) log Σ_{cyclic words of length n} exp(cyclic Birkhoff sum)` using
/// the midpoint of the potential on each depth-d cylinder, `d = pot.depth`.
///
/// The sum is the trace of the n-th power of the midpoint matrix, computed
/// by an explicit path sum from every start state.
pub fn pressure_periodic_oracle(
    shift: &FiniteShift,
    pot: &CylinderPotential,
    n: usize,
    cap: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("period must be positive".into()));
    }
    let d = pot.depth;
    let all: Vec<usize> = (0..shift.len()).collect();
    // Words over the whole alphabet: transient symbols carry no cycles, but
    // keeping them makes the oracle independent of the class decomposition.
    let g = match WordGraph::build(&shift.adjacency, &all, d, params_states(cap)) {
        Err(Error::TooManyStates { states, .. }) => {
            return Err(Error::OracleScaleExceeded { requested: (states as f64).powi(2) * n as f64, cap })
        }
        other => other?,
    };
    let work = (g.len() as f64).powi(2) * n as f64;
    if work > cap {
        return Err(Error::OracleScaleExceeded { requested: work, cap });
    }
    let mid: Vec<f64> = g
        .states
        .iter()
        .map(|s| {
            let w: Vec<Symbol> = s.iter().map(|&i| shift.symbols[i as usize]).collect();
            pot.eval_word(&w).map(|v| v.midpoint())
        })
        .collect::<Result<_>>()?;
    let shift_log = mid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift_log.is_finite() {
        return Err(Error::Domain("oracle needs finite cylinder midpoints".into()));
    }
    let e: Vec<f64> = mid.iter().map(|m| (m - shift_log).exp()).collect();
    // Σ_v (Mⁿ)_{vv}, with each start's path vector rescaled as it goes.
    let mut terms: Vec<f64> = Vec::new();
    let mut x = vec![0.0; g.len()];
    let mut y = vec![0.0; g.len()];
    for v in 0..g.len() {
        x.iter_mut().for_each(|t| *t = 0.0);
        x[v] = 1.0;
        let mut log_scale = 0.0;
        for _ in 0..n {
            g.apply_transpose(&e, &x, &mut y);
            let m = y.iter().copied().fold(0.0, f64::max);
            if m == 0.0 {
                break;
            }
            for (a, b) in x.iter_mut().zip(&y) {
                *a = b / m;
            }
            log_scale += m.ln();
        }
        if x[v] > 0.0 && y.iter().any(|&t| t > 0.0) {
            terms.push(x[v].ln() + log_scale);
        }
    }
    if terms.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    Ok((top + sum.ln()) / n as f64 + shift_log)
}

fn params_states(cap: f64) -> usize {
    cap.sqrt().min(DEFAULT_MAX_STATES as f64) as usize
}

/// `log Σ_{n ≥ from} e^{φ(C_n)}`: the pressure of a potential that depends on
/// the first symbol only, on the full shift over `{from, from+1, …}`.
pub fn full_shift_series_pressure(
    pot: &CylinderPotential,
    from: Symbol,
    explicit: u64,
) -> Result<PressureResult> {
    if pot.depth != 1 {
        return Err(Error::Domain("series pressure needs a depth-1 potential".into()));
    }
    let mut diagnostics = PressureDiagnostics {
        depth: 1,
        converged: true,
        lower_source: "series".into(),
        upper_source: "series".into(),
        ..Default::default()
    };
    if pot.has_tau() {
        diagnostics.warnings.push(
            "tau depends on the whole sequence; the series gives a bound, not the pressure".into(),
        );
    }
    let value = match one_cylinder_sum(pot, from, explicit)? {
        SeriesSum::Diverges(w) => PressureValue::Infinite(w),
        SeriesSum::Converges(s) => {
            diagnostics.tail_sum = Some(s);
            let (lo, hi) = log_sum(&s);
            PressureValue::Finite(CertifiedInterval::new(lo, hi))
        }
    };
    Ok(PressureResult { value, diagnostics })
}

/// Pressure on the countable shift of `rule`, truncated at symbol `n_max`.
///
/// Lower bound: the truncation with all symbols above `n_max` lumped into a
/// single state weighted by the lower tail sum (never below the plain
/// truncation, which is also reported). Upper bound: the smaller of the
/// lumped system with upper weights and full-shift domination. A divergent
/// tail gives `+∞`.
pub fn pressure(
    rule: &TransitionRule,
    pot: &CylinderPotential,
    n_max: Symbol,
    params: PressureParams,
) -> Result<PressureResult> {
    rule.validate()?;
    if let Some(max) = rule.alphabet_max {
        let shift = truncate(rule, max)?;
        let t = pressure_truncated(&shift, pot, params)?;
        let diagnostics = PressureDiagnostics {
            truncation: Some(max),
            depth: t.depth,
            states: t.states,
            iterations: t.iterations,
            converged: t.converged,
            truncated: Some(t.enclosure),
            lower_source: "finite alphabet".into(),
            upper_source: "finite alphabet".into(),
            warnings: if max != n_max {
                vec![format!("finite alphabet: truncation {n_max} ignored, using {max}")]
            } else {
                Vec::new()
            },
            ..Default::default()
        };
        return Ok(PressureResult { value: PressureValue::Finite(t.enclosure), diagnostics });
    }
    let free = rule.free_from();
    if n_max + 1 < free || n_max < rule.alphabet_min {
        return Err(Error::Domain(format!(
            "truncation {n_max} too small: symbols above it must all be free (need >= {})",
            (free.max(1) - 1).max(rule.alphabet_min)
        )));
    }
    let mut diag = PressureDiagnostics {
        truncation: Some(n_max),
        depth: params.depth.max(pot.depth),
        ..Default::default()
    };

    let tail = match one_cylinder_sum(pot, n_max + 1, params.explicit_terms)? {
        SeriesSum::Diverges(w) => {
            diag.lower_source = "divergent tail".into();
            diag.upper_source = "divergent tail".into();
            return Ok(PressureResult { value: PressureValue::Infinite(w), diagnostics: diag });
        }
        SeriesSum::Converges(s) => s,
    };
    diag.tail_sum = Some(tail);

    let shift = truncate(rule, n_max)?;
    match pressure_truncated(&shift, pot, params) {
        Ok(t) => diag.truncated = Some(t.enclosure),
        Err(Error::DegenerateTruncation(m)) => diag.warnings.push(m),
        Err(e) => return Err(e),
    }

    let lumped = lumped_pressure(rule, pot, n_max, &tail, params)?;
    diag.states = lumped.states;
    diag.iterations = lumped.iterations;
    diag.converged = lumped.converged;
    diag.lumped = Some(lumped.enclosure);
    if !lumped.converged {
        diag.warnings.push("Perron iteration hit its cap; enclosure widened".into());
    }

    match one_cylinder_sum(pot, rule.alphabet_min, params.explicit_terms) {
        Ok(SeriesSum::Converges(s)) => diag.domination_upper = Some(log_sum(&s).1),
        Ok(SeriesSum::Diverges(_)) => {}
        Err(e) => diag.warnings.push(format!("domination bound unavailable: {e}")),
    }

    let mut lower = lumped.enclosure.lower;
    diag.lower_source = "lumped truncation".into();
    if let Some(t) = diag.truncated {
        if t.lower > lower {
            lower = t.lower;
            diag.lower_source = "truncation".into();
        }
    }
    let mut upper = lumped.enclosure.upper;
    diag.upper_source = "lumped truncation".into();
    if let Some(d) = diag.domination_upper {
        if d < upper {
            upper = d;
            diag.upper_source = "full-shift domination".into();
        }
    }
    if upper < lower {
        diag.warnings.push(format!("bounds crossed ({lower} > {upper}); widened"));
        std::mem::swap(&mut lower, &mut upper);
    }
    Ok(PressureResult { value: PressureValue::Finite(CertifiedInterval::new(lower, upper)), diagnostics: diag })
}

/// The truncation `{alphabet_min..=n_max}` plus a state `★` standing for
/// all larger symbols. States starting with `★` carry the tail sum of
/// `e^{φ|C_n}` over `n > n_max`; other states carry `φ` on their cylinder
/// with `★` read as "any symbol above `n_max`".
fn lumped_pressure(
    rule: &TransitionRule,
    pot: &CylinderPotential,
    n_max: Symbol,
    tail: &SumEnclosure,
    params: PressureParams,
) -> Result<Bracket> {
    let symbols: Vec<Symbol> = (rule.alphabet_min..=n_max).collect();
    let m = symbols.len();
    let star = m;
    let mut adj = vec![vec![true; m + 1]; m + 1];
    for (i, &a) in symbols.iter().enumerate() {
        for (j, &b) in symbols.iter().enumerate() {
            adj[i][j] = !rule.forbidden_pairs.contains(&(a, b));
        }
    }
    let class: Vec<usize> = (0..=m).collect();
    let k = params.depth.max(pot.depth);
    let g = WordGraph::build(&adj, &class, k, params.max_states)?;
    let (z_lo, z_hi) = log_sum(tail);
    let from = n_max + 1;
    let (lo, hi) = state_weights(&g, |s| {
        if s[0] as usize == star {
            return Ok(CertifiedInterval::new(z_lo, z_hi));
        }
        let pat: Vec<Digit> = s
            .iter()
            .map(|&i| if i as usize == star { Digit::Tail { from } } else { Digit::Sym(symbols[i as usize]) })
            .collect();
        pot.eval(&pat)
    })?;
    bracket(&g, &lo, &hi, params.perron)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Term;
    use crate::shift::{periodic_words, FiniteShift};

    fn two_block() -> FiniteShift {
        FiniteShift::full_block(vec![4, 5])
    }

    #[test]
    fn two_block_zero_potential() {
        let t = pressure_truncated(&two_block(), &CylinderPotential::zero(), PressureParams::default()).unwrap();
        assert!(t.enclosure.contains(2f64.ln()));
        assert!(t.enclosure.width() < 1e-10);
    }

    #[test]
    fn truncation_at_five_is_two_block() {
        let s = truncate(&TransitionRule::positive_geodesic(), 5).unwrap();
        let t = pressure_truncated(&s, &CylinderPotential::zero(), PressureParams::default()).unwrap();
        assert!(t.enclosure.contains(2f64.ln()) && t.enclosure.width() < 1e-10);
    }

    #[test]
    fn constant_potential_shifts_pressure() {
        let p = PressureParams::default();
        let a = pressure_truncated(&two_block(), &CylinderPotential::constant(0.7), p).unwrap();
        assert!(a.enclosure.contains(2f64.ln() + 0.7));
    }

    #[test]
    fn oracle_on_two_block() {
        let v = pressure_periodic_oracle(&two_block(), &CylinderPotential::zero(), 5, 1e6).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn oracle_matches_enumeration() {
        // Independent count of cyclic words with weights.
        let s = truncate(&TransitionRule::positive_geodesic(), 6).unwrap();
        let pot = CylinderPotential::tau(-0.5);
        for n in 1..=5 {
            let words = periodic_words(&s, n).unwrap();
            let mut total = 0.0;
            for w in &words {
                let mut acc = 0.0;
                for &d in &w.digits {
                    acc += pot.eval_word(&[d]).unwrap().midpoint();
                }
                total += f64::exp(acc);
            }
            let v = pressure_periodic_oracle(&s, &pot, n, 1e6).unwrap();
            assert!((v - total.ln() / n as f64).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn oracle_three_self_loops() {
        let s = truncate(&TransitionRule::positive_geodesic(), 6).unwrap();
        let v = pressure_periodic_oracle(&s, &CylinderPotential::zero(), 1, 1e6).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn oracle_cap() {
        let s = truncate(&TransitionRule::positive_geodesic(), 60).unwrap();
        assert!(matches!(
            pressure_periodic_oracle(&s, &CylinderPotential::zero(), 12, 1e3),
            Err(Error::OracleScaleExceeded { .. })
        ));
    }

    #[test]
    fn geometric_series_pressure_is_zero() {
        let l2 = 2f64.ln();
        let pot = CylinderPotential::from_terms(vec![Term::Geometric { intercept: -l2, slope: -l2 }]);
        let r = full_shift_series_pressure(&pot, 0, 64).unwrap();
        let c = r.value.finite().unwrap();
        assert!(c.contains(0.0) && c.width() < 1e-10, "{c}");
    }

    #[test]
    fn p_series_below_one_diverges() {
        let pot = CylinderPotential::from_terms(vec![Term::PowerLog { a: 0.8, b: 0.0 }]);
        let r = full_shift_series_pressure(&pot, 3, 1000).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn tau_pressure_diverges_below_half() {
        let r = pressure(&TransitionRule::positive_geodesic(), &CylinderPotential::tau(-0.4), 30, PressureParams::default())
            .unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn tau_pressure_negative_at_085() {
        let r = pressure(
            &TransitionRule::positive_geodesic(),
            &CylinderPotential::tau(-0.85),
            100,
            PressureParams::with_depth(2),
        )
        .unwrap();
        assert!(r.value.upper() < 0.0, "{:?}", r.value);
    }

    #[test]
    fn small_truncation_rejected() {
        assert!(pressure(&TransitionRule::positive_geodesic(), &CylinderPotential::zero(), 4, PressureParams::default())
            .is_err());
    }
}
