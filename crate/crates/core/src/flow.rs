//! Pressure of the suspension flow over the coding shift with roof `τ`:
//! `P_Φ(F) = inf{t : P(Δ_F − tτ) ≤ 0}`, the flow entropy, equilibrium
//! diagnosis, the small-oscillation criterion and pressure curves.

use crate::error::{Error, Result};
use crate::interval::{down, up, CertifiedInterval};
use crate::measures::{integrate, rpf_measure};
use crate::minus_cf::tail_sup;
use crate::potential::{CylinderPotential, TailModel};
use crate::pressure::{pressure, pressure_truncated, PressureParams, PressureValue};
use crate::series::{divergence_witness, one_cylinder_sum, tail_upper_bound, DivergenceWitness, SeriesSum};
use crate::shift::{truncate, Symbol, TransitionRule};
use serde::Serialize;

/// A flow potential given through `Δ_F`, with roof `τ`.
#[derive(Clone, Debug, Serialize)]
pub struct FlowPotentialSpec {
    pub rule: TransitionRule,
    pub base: CylinderPotential,
    /// `(inf F, sup F)` when `F` is declared bounded.
    pub bounds: Option<(f64, f64)>,
}

impl FlowPotentialSpec {
    pub fn new(base: CylinderPotential) -> Self {
        FlowPotentialSpec { rule: TransitionRule::positive_geodesic(), base, bounds: None }
    }

    pub fn zero() -> Self {
        Self::new(CylinderPotential::zero()).with_bounds(0.0, 0.0)
    }

    pub fn with_bounds(mut self, inf: f64, sup: f64) -> Self {
        self.bounds = Some((inf, sup));
        self
    }

    pub fn with_rule(mut self, rule: TransitionRule) -> Self {
        self.rule = rule;
        self
    }

    /// `Δ_F − tτ`.
    pub fn potential_at(&self, t: f64) -> CylinderPotential {
        self.base.plus_tau(-t)
    }

    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        if self.rule.alphabet_min < 3 {
            return Err(Error::Domain("the roof needs every digit to be at least 3".into()));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain("bounds must be finite with inf <= sup".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowParams {
    pub n_max: Symbol,
    pub pressure: PressureParams,
    /// Target width of each bisection.
    pub tol: f64,
    pub t_range: (f64, f64),
    /// How many times the scan range may double.
    pub max_extensions: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            n_max: 200,
            pressure: PressureParams::with_depth(2),
            tol: 1e-6,
            t_range: (0.0, 5.0),
            max_extensions: 6,
        }
    }
}

impl FlowParams {
    pub fn new(n_max: Symbol, depth: usize) -> Self {
        FlowParams { n_max, pressure: PressureParams::with_depth(depth), ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    /// Upper pressure bound ≤ 0.
    In,
    /// Lower bound > 0 or the pressure is infinite.
    Out,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    pub t: f64,
    pub pressure: PressureValue,
    pub membership: Membership,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    RootExists,
    NoRootGap,
    Infinite,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootDiagnosis {
    pub kind: RootKind,
    /// Finiteness threshold: `P(Δ_F − tτ) = ∞` for `t < t*`.
    pub t_star: CertifiedInterval,
    /// Whether the pressure is finite at `t*` itself.
    pub finite_at_t_star: bool,
    #[serde(rename = "P_Phi")]
    pub p_phi: CertifiedInterval,
    /// Pressure of `Δ_F − tτ` over the whole enclosure `t ∈ p_phi`.
    pub pressure_at_root: CertifiedInterval,
    pub evaluations: Vec<Evaluation>,
    /// Every certified-out point lies below every certified-in point.
    pub root_set_consistent: bool,
    pub params: FlowParams,
}

fn classify(p: &PressureValue) -> Membership {
    match p {
        PressureValue::Infinite(_) => Membership::Out,
        PressureValue::Finite(c) if c.lower > 0.0 => Membership::Out,
        PressureValue::Finite(c) if c.upper <= 0.0 => Membership::In,
        PressureValue::Finite(_) => Membership::Undecided,
    }
}

/// Exponents of the base potential on `C_n` for large `n`.
fn base_tail(spec: &FlowPotentialSpec, n_max: Symbol) -> Result<TailModel> {
    spec.base.tail_model(n_max.max(spec.rule.alphabet_min) + 1)
}

/// Threshold `t*` from the tail model of `Δ_F`: the series over 1-cylinders
/// of `e^{Δ_F − tτ}` behaves like `Σ n^{−(s₀ + 2t)} (log n)^{−b₀} e^{β₀ n}`.
fn threshold(m: &TailModel) -> (f64, bool) {
    if m.beta > 0.0 {
        (f64::INFINITY, false)
    } else if m.beta < 0.0 {
        (f64::NEG_INFINITY, true)
    } else {
        ((1.0 - m.s) / 2.0, m.b > 1.0)
    }
}

struct Evaluator<'a> {
    spec: &'a FlowPotentialSpec,
    params: FlowParams,
    log: Vec<Evaluation>,
}

impl Evaluator<'_> {
    fn eval(&mut self, t: f64) -> Result<Evaluation> {
        if let Some(e) = self.log.iter().find(|e| e.t == t) {
            return Ok(e.clone());
        }
        let r = pressure(&self.spec.rule, &self.spec.potential_at(t), self.params.n_max, self.params.pressure)?;
        let e = Evaluation { t, membership: classify(&r.value), pressure: r.value };
        self.log.push(e.clone());
        Ok(e)
    }
}

/// Largest `t` with `pred(t)` between `lo` (true) and `hi` (false), to width `tol`.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

pub fn flow_pressure(spec: &FlowPotentialSpec, params: FlowParams) -> Result<RootDiagnosis> {
    spec.validate()?;
    if !(params.tol > 0.0) || !(params.t_range.0 < params.t_range.1) {
        return Err(Error::Domain("tolerance must be positive and the t-range nonempty".into()));
    }
    let model = base_tail(spec, params.n_max)?;
    let (t_star, finite_at) = threshold(&model);
    let t_star_iv = if t_star.is_finite() {
        CertifiedInterval::new(down(t_star), up(t_star))
    } else {
        CertifiedInterval::new(t_star, t_star)
    };
    let mut ev = Evaluator { spec, params, log: Vec::new() };
    let finish = |kind, p_phi, at_root, ev: Evaluator| {
        let consistent = root_set_consistent(&ev.log);
        Ok(RootDiagnosis {
            kind,
            t_star: t_star_iv,
            finite_at_t_star: finite_at,
            p_phi,
            pressure_at_root: at_root,
            evaluations: ev.log,
            root_set_consistent: consistent,
            params,
        })
    };
    if t_star == f64::INFINITY {
        let inf = CertifiedInterval::new(f64::INFINITY, f64::INFINITY);
        return finish(RootKind::Infinite, inf, inf, ev);
    }

    // Lower side: a point at or below the infimum.
    let out_t = if t_star.is_finite() {
        let e = ev.eval(t_star)?;
        if e.membership == Membership::In {
            let c = e.pressure.finite().expect("in implies finite");
            let kind = if c.upper < 0.0 { RootKind::NoRootGap } else { RootKind::RootExists };
            return finish(kind, CertifiedInterval::point(t_star), c, ev);
        }
        t_star
    } else {
        let (mut t, mut width) = (params.t_range.0, params.t_range.1 - params.t_range.0);
        let mut found = None;
        for _ in 0..=params.max_extensions {
            if ev.eval(t)?.membership == Membership::Out {
                found = Some(t);
                break;
            }
            t -= width;
            width *= 2.0;
        }
        found.ok_or(Error::Unbracketed { lo: t, hi: params.t_range.1, missing: "out" })?
    };

    // Upper side: a certified-in point.
    let mut in_t = None;
    let (mut lo, mut hi) = (params.t_range.0.max(out_t), params.t_range.1.max(out_t + 1.0));
    'scan: for _ in 0..=params.max_extensions {
        let step = (hi - lo) / 16.0;
        for i in 1..=16 {
            let t = lo + step * i as f64;
            if ev.eval(t)?.membership == Membership::In {
                in_t = Some(t);
                break 'scan;
            }
        }
        lo = hi;
        hi += 2.0 * (hi - params.t_range.0.max(out_t));
    }
    let in_t = in_t.ok_or(Error::Unbracketed { lo: out_t, hi, missing: "in" })?;
    // Start from the largest out-point already seen below the in-point.
    let start_out = ev
        .log
        .iter()
        .filter(|e| e.membership == Membership::Out && e.t < in_t)
        .map(|e| e.t)
        .fold(out_t, f64::max);

    let tol = params.tol;
    let (lower_end, _) = bisect(start_out, in_t, tol, |t| Ok(ev.eval(t)?.membership == Membership::Out))?;
    let start_not_in = ev
        .log
        .iter()
        .filter(|e| e.membership != Membership::In && e.t < in_t)
        .map(|e| e.t)
        .fold(lower_end, f64::max);
    let (_, upper_end) = bisect(start_not_in, in_t, tol, |t| Ok(ev.eval(t)?.membership != Membership::In))?;

    let at_upper = ev.eval(upper_end)?.pressure;
    let at_lower = ev.eval(lower_end)?.pressure;
    let at_root = CertifiedInterval::new(at_upper.lower().min(at_lower.upper()), at_lower.upper());
    finish(RootKind::RootExists, CertifiedInterval::new(lower_end, upper_end), at_root, ev)
}

fn root_set_consistent(log: &[Evaluation]) -> bool {
    let max_out = log
        .iter()
        .filter(|e| e.membership == Membership::Out)
        .map(|e| e.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_in = log
        .iter()
        .filter(|e| e.membership == Membership::In)
        .map(|e| e.t)
        .fold(f64::INFINITY, f64::min);
    max_out < min_in
}

/// Entropy of the flow with both one-sided bounds reported.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub enclosure: CertifiedInterval,
    /// `h ≥` this: largest `t` where the plain truncation is certified positive.
    pub truncation_lower: f64,
    /// `h ≤` this: smallest `t` where full-shift domination is certified `≤ 0`.
    pub domination_upper: f64,
    pub diagnosis: RootDiagnosis,
}

pub fn entropy(params: FlowParams) -> Result<EntropyReport> {
    entropy_for(&TransitionRule::positive_geodesic(), params)
}

pub fn entropy_for(rule: &TransitionRule, params: FlowParams) -> Result<EntropyReport> {
    let spec = FlowPotentialSpec::zero().with_rule(rule.clone());
    let diagnosis = flow_pressure(&spec, params)?;
    let shift = truncate(rule, params.n_max)?;
    let trunc_pos = |t: f64| -> Result<bool> {
        let r = pressure_truncated(&shift, &CylinderPotential::tau(-t), params.pressure)?;
        Ok(r.enclosure.lower > 0.0)
    };
    let (hi0, lo0) = (params.t_range.1, params.t_range.0);
    let truncation_lower = if trunc_pos(lo0)? && !trunc_pos(hi0)? {
        bisect(lo0, hi0, params.tol, trunc_pos)?.0
    } else {
        f64::NAN
    };
    let dom_not_in = |t: f64| -> Result<bool> {
        Ok(match one_cylinder_sum(&CylinderPotential::tau(-t), rule.alphabet_min, params.pressure.explicit_terms)? {
            SeriesSum::Diverges(_) => true,
            SeriesSum::Converges(s) => crate::series::log_sum(&s).1 > 0.0,
        })
    };
    let domination_upper = if dom_not_in(lo0)? && !dom_not_in(hi0)? {
        bisect(lo0, hi0, params.tol, dom_not_in)?.1
    } else {
        f64::NAN
    };
    Ok(EntropyReport { enclosure: diagnosis.p_phi, truncation_lower, domination_upper, diagnosis })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumVerdict {
    EquilibriumCertified,
    NoEquilibriumCertified,
    Inconclusive,
}

/// `∫ τ dμ` restricted to `C_n`, `n > cutoff`, for the Gibbs measure `μ`.
#[derive(Clone, Debug, Serialize)]
pub struct TailIntegrability {
    pub cutoff: Symbol,
    /// `μ(C_n) τ|C_n ≍ n^{−s} (log n)^{−b}`.
    pub s: f64,
    pub b: f64,
    pub integrable: bool,
    /// Upper bound on the tail sum up to the Gibbs constant, when finite.
    pub tail_upper: Option<f64>,
    pub divergence: Option<DivergenceWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumReport {
    pub diagnosis: RootDiagnosis,
    pub t: f64,
    pub zero_in_pressure: bool,
    /// `∫ τ dν` for the RPF measure of `Δ_F − tτ` on the truncation.
    pub truncation_tau_integral: Option<CertifiedInterval>,
    pub tail: Option<TailIntegrability>,
    pub verdict: EquilibriumVerdict,
    pub reason: String,
}

/// Tail of `Σ_n τ|C_n · e^{φ|C_n − P}` with `τ|C_n ≤ 2 log n`.
fn tau_tail(pot: &CylinderPotential, p: CertifiedInterval, cutoff: Symbol) -> Result<TailIntegrability> {
    let m = pot.tail_model(cutoff)?;
    let mf = cutoff as f64;
    let shrink = 2.0 * down((mf - tail_sup(3)) / mf).ln();
    let lk = m.log_k + CertifiedInterval::new(down(2f64.ln() + shrink), up(2f64.ln()))
        - CertifiedInterval::new(p.lower, p.upper);
    let weighted = TailModel { log_k: lk, b: m.b - 1.0, ..m };
    let integrable = weighted.converges();
    let (tail_upper, divergence) = if integrable {
        (Some(tail_upper_bound(&weighted)?), None)
    } else {
        (None, Some(divergence_witness(&weighted)?))
    };
    Ok(TailIntegrability { cutoff, s: weighted.s, b: weighted.b, integrable, tail_upper, divergence })
}

pub fn equilibrium_diagnosis(spec: &FlowPotentialSpec, params: FlowParams) -> Result<EquilibriumReport> {
    let diagnosis = flow_pressure(spec, params)?;
    if diagnosis.kind == RootKind::Infinite {
        return Ok(EquilibriumReport {
            t: f64::INFINITY,
            zero_in_pressure: false,
            truncation_tau_integral: None,
            tail: None,
            verdict: EquilibriumVerdict::Inconclusive,
            reason: "pressure is infinite for every t".into(),
            diagnosis,
        });
    }
    let t = if diagnosis.p_phi.width() == 0.0 { diagnosis.p_phi.lower } else { diagnosis.p_phi.midpoint() };
    let pot = spec.potential_at(t);
    let zero_in = diagnosis.pressure_at_root.contains(0.0);
    let shift = truncate(&spec.rule, params.n_max)?;
    let truncation_tau_integral = match rpf_measure(&shift, &pot, params.pressure.depth) {
        Ok(m) => Some(integrate(&m, &CylinderPotential::tau(1.0))?),
        Err(_) => None,
    };
    let p_at = if diagnosis.pressure_at_root.is_finite() {
        diagnosis.pressure_at_root
    } else {
        CertifiedInterval::point(0.0)
    };
    let tail = tau_tail(&pot, p_at, params.n_max + 1)?;
    let above_threshold = diagnosis.p_phi.lower > diagnosis.t_star.upper;
    let (verdict, reason) = match diagnosis.kind {
        RootKind::NoRootGap => (
            EquilibriumVerdict::NoEquilibriumCertified,
            format!(
                "pressure at the infimum is strictly negative (upper bound {:.6})",
                diagnosis.pressure_at_root.upper
            ),
        ),
        RootKind::RootExists if above_threshold && tail.integrable => (
            EquilibriumVerdict::EquilibriumCertified,
            "root above the finiteness threshold and the roof is integrable for the Gibbs measure".into(),
        ),
        RootKind::RootExists if !tail.integrable && !zero_in => (
            EquilibriumVerdict::NoEquilibriumCertified,
            "roof not integrable for the Gibbs measure".into(),
        ),
        _ => (
            EquilibriumVerdict::Inconclusive,
            "root not separated from the finiteness threshold within the enclosures".into(),
        ),
    };
    Ok(EquilibriumReport {
        diagnosis,
        t,
        zero_in_pressure: zero_in,
        truncation_tau_integral,
        tail: Some(tail),
        verdict,
        reason,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallOscillationReport {
    pub oscillation: f64,
    pub entropy: CertifiedInterval,
    /// `lower(h) − 1/2 − (sup F − inf F)`.
    pub margin: f64,
    pub holds: bool,
    /// `(1/2 + sup F, lower(h) + inf F)` when nonempty.
    pub interval: Option<(f64, f64)>,
    /// Pressure of `Δ_F − sτ` at the interval's midpoint `s`.
    pub probe: Option<(f64, PressureValue)>,
    /// The probe is finite and strictly positive.
    pub bracket_verified: bool,
}

pub fn small_oscillation_check(spec: &FlowPotentialSpec, params: FlowParams) -> Result<SmallOscillationReport> {
    spec.validate()?;
    let (inf_f, sup_f) = spec
        .bounds
        .ok_or_else(|| Error::Domain("condition inapplicable: F has no declared bounds".into()))?;
    let h = entropy_for(&spec.rule, params)?.enclosure;
    let oscillation = sup_f - inf_f;
    let margin = h.lower - 0.5 - oscillation;
    let holds = margin > 0.0;
    let (mut interval, mut probe, mut bracket_verified) = (None, None, false);
    if holds {
        let (a, b) = (0.5 + sup_f, h.lower + inf_f);
        interval = Some((a, b));
        let s = 0.5 * (a + b);
        let r = pressure(&spec.rule, &spec.potential_at(s), params.n_max, params.pressure)?;
        bracket_verified = matches!(r.value, PressureValue::Finite(c) if c.lower > 0.0);
        probe = Some((s, r.value));
    }
    Ok(SmallOscillationReport { oscillation, entropy: h, margin, holds, interval, probe, bracket_verified })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveReport {
    pub points: Vec<Evaluation>,
    /// Some choice of values inside the enclosures is nonincreasing.
    pub monotone: bool,
    /// Some choice inside the enclosures is convex on every consecutive triple.
    pub convex: bool,
    /// Consecutive grid points where the pressure changes sign.
    pub sign_change: Option<(f64, f64)>,
}

pub fn pressure_curve(spec: &FlowPotentialSpec, grid: &[f64], params: FlowParams) -> Result<CurveReport> {
    spec.validate()?;
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain("t-grid must be sorted".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let r = pressure(&spec.rule, &spec.potential_at(t), params.n_max, params.pressure)?;
        points.push(Evaluation { t, membership: classify(&r.value), pressure: r.value });
    }
    let monotone = points.windows(2).all(|w| match (&w[0].pressure, &w[1].pressure) {
        (PressureValue::Infinite(_), _) => true,
        (PressureValue::Finite(_), PressureValue::Infinite(_)) => false,
        (PressureValue::Finite(a), PressureValue::Finite(b)) => a.upper >= b.lower,
    });
    let convex = points.windows(3).all(|w| {
        let (t1, t2, t3) = (w[0].t, w[1].t, w[2].t);
        if t3 == t1 {
            return true;
        }
        match (w[0].pressure.finite(), w[1].pressure.finite(), w[2].pressure.finite()) {
            (Some(p1), Some(p2), Some(p3)) => {
                let lam = (t3 - t2) / (t3 - t1);
                let chord = lam * p1.upper + (1.0 - lam) * p3.upper;
                p2.lower <= up(chord) + 1e-12 * chord.abs().max(1.0)
            }
            // Infinite values sit to the left of finite ones; monotonicity covers the rest.
            _ => true,
        }
    });
    let sign_change = points.windows(2).find_map(|w| {
        let a = &w[0].membership;
        let b = &w[1].membership;
        (*a == Membership::Out && *b == Membership::In).then_some((w[0].t, w[1].t))
    });
    Ok(CurveReport { points, monotone, convex, sign_change })
}
