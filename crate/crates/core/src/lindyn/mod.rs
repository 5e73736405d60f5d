//! Linear two-layer dynamics under the forward-only rule.
//!
//! Network `y = W·A·x`, target map `T`, error matrix `E = T − W·A`. With
//! isotropic inputs the expected updates are `ΔW = η·E·Aᵀ` and
//! `ΔA = −η·A·F·E`, both added to the weights. Phase 1 freezes `W` and
//! trains `A`; phase 2 freezes `A` and trains `W`.
//!
//! Two identities are tracked along phase 2:
//! - the scalar form `tr(F·Ẇ·A) = ‖A‖²·tr(F·E)`;
//! - the exact Gram form `tr(F·Ẇ·A) = tr(F·E·Aᵀ·A)`.
//!
//! The scalar form holds only when `AᵀA` is a multiple of the identity
//! scaled to its trace, so it is reported rather than assumed.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{sample_normal, Concern, Rng, Tensor};
use crate::trainer::make_f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Default for LinDims {
    fn default() -> Self {
        LinDims { input: 10, hidden: 20, output: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearDynState {
    /// `[hidden × input]`
    pub a: Tensor,
    /// `[output × hidden]`
    pub w: Tensor,
    /// `[input × output]`
    pub f: Tensor,
    /// `[output × input]`
    pub t: Tensor,
    e: Tensor,
}

impl LinearDynState {
    pub fn new(a: Tensor, w: Tensor, f: Tensor, t: Tensor) -> Result<Self> {
        let (h, i) = a.dims2()?;
        let (o, h2) = w.dims2()?;
        if h2 != h {
            return Err(Error::shape("W·A", w.shape(), a.shape()));
        }
        if f.shape() != [i, o] {
            return Err(Error::shape("F", f.shape(), &[i, o]));
        }
        if t.shape() != [o, i] {
            return Err(Error::shape("T", t.shape(), &[o, i]));
        }
        let e = t.sub(&w.matmul(&a)?)?;
        Ok(LinearDynState { a, w, f, t, e })
    }

    /// `A, W ~ N(0, 0.1²)`, `T ~ N(0, 1)`, `F` uniform with the default scale.
    pub fn random(dims: LinDims, seed: u64) -> Result<Self> {
        let mut rng = Rng::for_concern(seed, Concern::LinearDynamics);
        let a = sample_normal(&mut rng, 0.0, 0.1, &[dims.hidden, dims.input])?;
        let w = sample_normal(&mut rng, 0.0, 0.1, &[dims.output, dims.hidden])?;
        let t = sample_normal(&mut rng, 0.0, 1.0, &[dims.output, dims.input])?;
        let f = make_f(dims.input, dims.output, 0.05, &mut rng)?;
        LinearDynState::new(a, w, f, t)
    }

    pub fn e(&self) -> &Tensor {
        &self.e
    }

    /// Largest deviation of the stored `E` from `T − W·A`.
    pub fn e_consistency(&self) -> f64 {
        let fresh = self.t.sub(&self.w.matmul(&self.a).expect("shapes")).expect("shapes");
        fresh.max_abs_diff(&self.e).expect("shapes")
    }

    pub fn a_norm_sq(&self) -> f64 {
        self.a.frobenius_norm().powi(2)
    }

    pub fn tr_fe(&self) -> f64 {
        self.f.matmul(&self.e).and_then(|m| m.trace()).expect("shapes")
    }

    pub fn tr_fwa(&self) -> f64 {
        self.f.matmul(&self.w).and_then(|m| m.matmul(&self.a)).and_then(|m| m.trace()).expect("shapes")
    }

    /// `tr(F·E·Aᵀ·A)`, the exact `tr(F·Ẇ·A)` with `Ẇ = E·Aᵀ`.
    pub fn tr_feata(&self) -> f64 {
        let gram = self.a.t_matmul(&self.a).expect("shapes");
        self.f.matmul(&self.e).and_then(|m| m.matmul(&gram)).and_then(|m| m.trace()).expect("shapes")
    }

    fn apply(&mut self, dw: Option<&Tensor>, da: Option<&Tensor>, step: usize) -> Result<()> {
        if let Some(dw) = dw {
            self.w = self.w.add(dw)?;
        }
        if let Some(da) = da {
            self.a = self.a.add(da)?;
        }
        self.e = self.t.sub(&self.w.matmul(&self.a)?)?;
        for (q, m) in [("A", &self.a), ("W", &self.w)] {
            if !m.is_finite() {
                return Err(Error::Divergence {
                    quantity: if q == "A" { "hidden weights A" } else { "output weights W" },
                    site: crate::error::DivergenceSite { step: Some(step), ..Default::default() },
                });
            }
        }
        Ok(())
    }
}

/// Expected updates under identity input covariance: `(η·E·Aᵀ, −η·A·F·E)`.
pub fn lin_updates(state: &LinearDynState, eta: f64) -> Result<(Tensor, Tensor)> {
    let dw = state.e.matmul_t(&state.a)?.scale(eta);
    let da = state.a.matmul(&state.f)?.matmul(&state.e)?.scale(-eta);
    Ok((dw, da))
}

/// Sample-mean updates over the rows of `xs` (`[batch × input]`):
/// `(η·E·C·Aᵀ, −η·A·F·E·C)` with `C = XᵀX / batch`.
pub fn empirical_lin_updates_from(state: &LinearDynState, eta: f64, xs: &Tensor) -> Result<(Tensor, Tensor)> {
    let (b, i) = xs.dims2()?;
    if b == 0 || i != state.a.shape()[1] {
        return Err(Error::shape("input batch", xs.shape(), &[b.max(1), state.a.shape()[1]]));
    }
    let c = xs.t_matmul(xs)?.scale(1.0 / b as f64);
    let ec = state.e.matmul(&c)?;
    let dw = ec.matmul_t(&state.a)?.scale(eta);
    let da = state.a.matmul(&state.f)?.matmul(&ec)?.scale(-eta);
    Ok((dw, da))
}

/// [`empirical_lin_updates_from`] on `batch` standard-normal inputs.
pub fn empirical_lin_updates(state: &LinearDynState, eta: f64, batch: usize, rng: &mut Rng) -> Result<(Tensor, Tensor)> {
    if batch == 0 {
        return Err(Error::Parameter("batch must be at least 1".into()));
    }
    let xs = sample_normal(rng, 0.0, 1.0, &[batch, state.a.shape()[1]])?;
    empirical_lin_updates_from(state, eta, &xs)
}

/// Per-step records of phase 1; index 0 is the entry state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Phase1Trace {
    pub a_norm_sq: Vec<f64>,
    pub tr_fe: Vec<f64>,
    pub max_e_consistency: f64,
}

impl Phase1Trace {
    /// `‖A‖` strictly increased at every step.
    pub fn a_grew_monotonically(&self) -> bool {
        self.a_norm_sq.windows(2).all(|w| w[1] > w[0])
    }
}

/// `W` frozen, `A ← A + ΔA`.
pub fn run_phase1(state: &mut LinearDynState, eta: f64, steps: usize) -> Result<Phase1Trace> {
    let mut tr = Phase1Trace { a_norm_sq: vec![state.a_norm_sq()], tr_fe: vec![state.tr_fe()], max_e_consistency: 0.0 };
    for step in 0..steps {
        let (_, da) = lin_updates(state, eta)?;
        state.apply(None, Some(&da), step)?;
        tr.a_norm_sq.push(state.a_norm_sq());
        tr.tr_fe.push(state.tr_fe());
        tr.max_e_consistency = tr.max_e_consistency.max(state.e_consistency());
    }
    Ok(tr)
}

/// Per-step records of phase 2; `tr_fwa[0]` is the entry value, the other
/// vectors have one entry per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Phase2Trace {
    pub tr_fwa: Vec<f64>,
    /// `tr(F·E·Aᵀ·A)` before each step.
    pub derivative: Vec<f64>,
    /// `‖A‖²·tr(F·E)` before each step.
    pub scalar_form: Vec<f64>,
    /// `|Δtr(FWA)/η − tr(F·E·Aᵀ·A)|` per step.
    pub gram_residual: Vec<f64>,
    /// `|tr(F·E·Aᵀ·A) − ‖A‖²·tr(F·E)|` per step.
    pub scalar_residual: Vec<f64>,
    pub max_e_consistency: f64,
}

impl Phase2Trace {
    pub fn strictly_decreasing(&self) -> bool {
        self.tr_fwa.windows(2).all(|w| w[1] < w[0])
    }

    pub fn max_gram_residual(&self) -> f64 {
        self.gram_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_scalar_residual(&self) -> f64 {
        self.scalar_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// `A` frozen, `W ← W + ΔW`.
pub fn run_phase2(state: &mut LinearDynState, eta: f64, steps: usize) -> Result<Phase2Trace> {
    let mut tr = Phase2Trace { tr_fwa: vec![state.tr_fwa()], ..Default::default() };
    for step in 0..steps {
        let exact = state.tr_feata();
        let scalar = state.a_norm_sq() * state.tr_fe();
        let before = state.tr_fwa();
        let (dw, _) = lin_updates(state, eta)?;
        state.apply(Some(&dw), None, step)?;
        let after = state.tr_fwa();
        tr.tr_fwa.push(after);
        tr.derivative.push(exact);
        tr.scalar_form.push(scalar);
        if eta != 0.0 {
            tr.gram_residual.push(((after - before) / eta - exact).abs());
        }
        tr.scalar_residual.push((exact - scalar).abs());
        tr.max_e_consistency = tr.max_e_consistency.max(state.e_consistency());
    }
    Ok(tr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub seeds: Vec<u64>,
    pub dims: LinDims,
    pub eta: f64,
    pub phase1_steps: usize,
    pub phase2_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seeds: (0..100).collect(),
            dims: LinDims::default(),
            eta: 1e-3,
            phase1_steps: 1000,
            phase2_steps: 1000,
        }
    }
}

/// One seed of the sweep. Flags are `None` when the run had no steps to judge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub dims: LinDims,
    pub eta: f64,
    pub phase1_steps: usize,
    pub phase2_steps: usize,
    pub a_growth: Option<bool>,
    pub initial_tr_fe: f64,
    pub final_tr_fe: f64,
    pub tr_fe_negative: Option<bool>,
    pub fwa_decreasing: Option<bool>,
    pub max_scalar_residual: f64,
    pub max_gram_residual: f64,
    pub max_e_consistency: f64,
}

pub fn run_seed(cfg: &SweepConfig, seed: u64) -> Result<SweepRow> {
    let mut st = LinearDynState::random(cfg.dims, seed)?;
    let initial_tr_fe = st.tr_fe();
    let p1 = run_phase1(&mut st, cfg.eta, cfg.phase1_steps)?;
    let final_tr_fe = st.tr_fe();
    let p2 = run_phase2(&mut st, cfg.eta, cfg.phase2_steps)?;
    let judged1 = cfg.phase1_steps > 0;
    Ok(SweepRow {
        seed,
        dims: cfg.dims,
        eta: cfg.eta,
        phase1_steps: cfg.phase1_steps,
        phase2_steps: cfg.phase2_steps,
        a_growth: judged1.then(|| p1.a_grew_monotonically()),
        initial_tr_fe,
        final_tr_fe,
        tr_fe_negative: judged1.then_some(final_tr_fe < 0.0),
        fwa_decreasing: (cfg.phase2_steps > 0).then(|| p2.strictly_decreasing()),
        max_scalar_residual: p2.max_scalar_residual(),
        max_gram_residual: p2.max_gram_residual(),
        max_e_consistency: p1.max_e_consistency.max(p2.max_e_consistency),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    /// Runs whose `‖A‖` grew at every phase-1 step.
    pub growth_runs: usize,
    /// Among growth runs: fraction ending phase 1 with `tr(FE) < 0`.
    pub tr_fe_negative_fraction: Option<f64>,
    /// Among growth runs: fraction with `tr(FWA)` strictly decreasing in phase 2.
    pub fwa_decreasing_fraction: Option<f64>,
    pub max_scalar_residual: f64,
    pub max_gram_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub tr_fe_fraction: f64,
    pub fwa_fraction: f64,
    pub identity_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tr_fe_fraction: 0.95, fwa_fraction: 1.0, identity_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "reasons", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(Vec<String>),
    Inconclusive(Vec<String>),
}

impl SweepSummary {
    pub fn from_rows(rows: &[SweepRow]) -> Self {
        let growth: Vec<&SweepRow> = rows.iter().filter(|r| r.a_growth == Some(true)).collect();
        let frac = |f: &dyn Fn(&SweepRow) -> Option<bool>| -> Option<f64> {
            let judged: Vec<bool> = growth.iter().filter_map(|r| f(r)).collect();
            (!judged.is_empty()).then(|| judged.iter().filter(|&&b| b).count() as f64 / judged.len() as f64)
        };
        SweepSummary {
            runs: rows.len(),
            growth_runs: growth.len(),
            tr_fe_negative_fraction: frac(&|r| r.tr_fe_negative),
            fwa_decreasing_fraction: frac(&|r| r.fwa_decreasing),
            max_scalar_residual: rows.iter().map(|r| r.max_scalar_residual).fold(0.0, f64::max),
            max_gram_residual: rows.iter().map(|r| r.max_gram_residual).fold(0.0, f64::max),
        }
    }

    pub fn verdict(&self, th: &Thresholds, phase2_steps: usize) -> Verdict {
        let (Some(fe), Some(fwa)) = (self.tr_fe_negative_fraction, self.fwa_decreasing_fraction) else {
            return Verdict::Inconclusive(vec!["no run had steps and monotone ‖A‖ growth to judge".into()]);
        };
        let mut reasons = Vec::new();
        if fe < th.tr_fe_fraction {
            reasons.push(format!("tr(FE) < 0 in {:.1}% of growth runs (need {:.1}%)", 100.0 * fe, 100.0 * th.tr_fe_fraction));
        }
        if fwa < th.fwa_fraction {
            reasons.push(format!(
                "tr(FWA) strictly decreasing in {:.1}% of growth runs (need {:.1}%)",
                100.0 * fwa,
                100.0 * th.fwa_fraction
            ));
        }
        if phase2_steps > 0 && self.max_scalar_residual > th.identity_tolerance {
            reasons.push(format!(
                "tr(FẆA) = ‖A‖²·tr(FE) violated by up to {:.3e} (tolerance {:.0e})",
                self.max_scalar_residual, th.identity_tolerance
            ));
        }
        if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(reasons)
        }
    }
}

/// Runs every seed (in parallel; rows keep seed order).
pub fn sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRow>, SweepSummary)> {
    if cfg.seeds.is_empty() {
        return Err(Error::Parameter("sweep needs at least one seed".into()));
    }
    if !(cfg.eta.is_finite() && cfg.eta >= 0.0) {
        return Err(Error::Parameter(format!("η = {} must be finite and ≥ 0", cfg.eta)));
    }
    let rows = cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Result<Vec<_>>>()?;
    let summary = SweepSummary::from_rows(&rows);
    Ok((rows, summary))
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "not_evaluated",
    }
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let io = |e| Error::io(format!("writing {}", path.display()), e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(
        f,
        "seed,input,hidden,output,eta,phase1_steps,phase2_steps,a_norm_growth,initial_tr_fe,final_tr_fe,tr_fe_negative,tr_fwa_decreasing,max_scalar_identity_residual,max_gram_identity_residual"
    )
    .map_err(io)?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.dims.input,
            r.dims.hidden,
            r.dims.output,
            r.eta,
            r.phase1_steps,
            r.phase2_steps,
            flag(r.a_growth),
            r.initial_tr_fe,
            r.final_tr_fe,
            flag(r.tr_fe_negative),
            flag(r.fwa_decreasing),
            r.max_scalar_residual,
            r.max_gram_residual
        )
        .map_err(io)?;
    }
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> LinearDynState {
        let a = Tensor::from_rows(&[[1.0, 0.5], [-0.5, 2.0]]).unwrap();
        let w = Tensor::from_rows(&[[0.3, 0.0], [0.1, -0.2]]).unwrap();
        let f = Tensor::from_rows(&[[0.1, -0.2], [0.05, 0.3]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        LinearDynState::new(a, w, f, t).unwrap()
    }

    #[test]
    fn hand_updates() {
        let s = hand();
        // W·A = [[0.3, 0.15], [0.2, −0.35]]; E = [[0.7, −0.15], [−0.2, 1.35]]
        let e = Tensor::from_rows(&[[0.7, -0.15], [-0.2, 1.35]]).unwrap();
        assert!(s.e().max_abs_diff(&e).unwrap() < 1e-12);
        let (dw, da) = lin_updates(&s, 0.1).unwrap();
        // E·Aᵀ = [[0.625, −0.65], [0.475, 2.8]]
        let dw_hand = Tensor::from_rows(&[[0.0625, -0.065], [0.0475, 0.28]]).unwrap();
        assert!(dw.max_abs_diff(&dw_hand).unwrap() < 1e-12);
        // A·F = [[0.125, −0.05], [0.05, 0.7]]; (A·F)·E = [[0.0975, −0.08625], [−0.105, 0.9375]]
        let da_hand = Tensor::from_rows(&[[-0.00975, 0.008625], [0.0105, -0.09375]]).unwrap();
        assert!(da.max_abs_diff(&da_hand).unwrap() < 1e-12);
    }

    #[test]
    fn zero_factors_give_zero_updates() {
        let mut s = hand();
        s.a = Tensor::zeros(vec![2, 2]);
        s.e = s.t.sub(&s.w.matmul(&s.a).unwrap()).unwrap();
        let (dw, da) = lin_updates(&s, 0.1).unwrap();
        assert!(dw.data().iter().chain(da.data()).all(|&v| v == 0.0));

        let s = hand();
        let t = s.w.matmul(&s.a).unwrap();
        let s = LinearDynState::new(s.a, s.w, s.f, t).unwrap();
        let (dw, da) = lin_updates(&s, 0.1).unwrap();
        assert!(dw.data().iter().chain(da.data()).all(|&v| v == 0.0));
        let (dw, da) = empirical_lin_updates(&s, 0.1, 7, &mut Rng::new(1)).unwrap();
        assert!(dw.data().iter().chain(da.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn monte_carlo_converges() {
        let s = LinearDynState::random(LinDims { input: 2, hidden: 4, output: 3 }, 5).unwrap();
        let (dw, da) = lin_updates(&s, 0.01).unwrap();
        let (mw, ma) = empirical_lin_updates(&s, 0.01, 100_000, &mut Rng::new(9)).unwrap();
        assert!(mw.sub(&dw).unwrap().frobenius_norm() / dw.frobenius_norm() <= 0.02);
        assert!(ma.sub(&da).unwrap().frobenius_norm() / da.frobenius_norm() <= 0.02);
    }

    #[test]
    fn basis_input_activates_one_column() {
        let s = hand();
        let x = Tensor::from_rows(&[[0.0, 1.0]]).unwrap();
        let (_, da) = empirical_lin_updates_from(&s, 0.1, &x).unwrap();
        let (_, full) = lin_updates(&s, 0.1).unwrap();
        let afe = full.data();
        assert_eq!(da.get2(0, 0), 0.0);
        assert_eq!(da.get2(1, 0), 0.0);
        // column j of A·F·E·e_j e_jᵀ is column j of A·F·E
        assert!((da.get2(0, 1) - afe[1]).abs() < 1e-15 && (da.get2(1, 1) - afe[3]).abs() < 1e-15);
    }

    #[test]
    fn degenerate_phases() {
        let mut s = hand();
        s.f = Tensor::zeros(vec![2, 2]);
        let a0 = s.a.clone();
        run_phase1(&mut s, 1e-2, 20).unwrap();
        assert_eq!(s.a, a0);

        let mut s = hand();
        let tr = run_phase1(&mut s, 0.0, 10).unwrap();
        assert!(tr.a_norm_sq.windows(2).all(|w| w[0] == w[1]));

        let s = hand();
        let t = s.w.matmul(&s.a).unwrap();
        let mut s = LinearDynState::new(s.a, s.w, s.f, t).unwrap();
        let tr = run_phase2(&mut s, 1e-2, 10).unwrap();
        assert!(tr.tr_fwa.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn phase2_step_is_linear_in_eta() {
        // A is frozen, so Δtr(FWA) = η·tr(F·E·Aᵀ·A) exactly.
        let base = hand();
        let mut deltas = Vec::new();
        for eta in [1e-4, 5e-5] {
            let mut s = base.clone();
            let tr = run_phase2(&mut s, eta, 1).unwrap();
            assert!(tr.max_gram_residual() < 1e-9);
            deltas.push(tr.tr_fwa[1] - tr.tr_fwa[0]);
        }
        let ratio = deltas[0] / deltas[1];
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn scalar_form_holds_for_scaled_orthogonal_rows() {
        // A = c·[1] in one dimension: AᵀA = ‖A‖².
        let s = LinearDynState::new(
            Tensor::from_rows(&[[1.5]]).unwrap(),
            Tensor::from_rows(&[[0.2]]).unwrap(),
            Tensor::from_rows(&[[0.3]]).unwrap(),
            Tensor::from_rows(&[[1.0]]).unwrap(),
        )
        .unwrap();
        assert!((s.tr_feata() - s.a_norm_sq() * s.tr_fe()).abs() < 1e-15);
    }

    #[test]
    fn sweep_rows_and_zero_case() {
        let cfg = SweepConfig { seeds: (0..100).collect(), phase1_steps: 5, phase2_steps: 5, ..Default::default() };
        let (rows, _) = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 100);

        let z = Tensor::zeros(vec![3, 3]);
        let mut s = LinearDynState::new(z.clone(), z.clone(), hand_f3(), z).unwrap();
        let p1 = run_phase1(&mut s, 1e-3, 5).unwrap();
        let p2 = run_phase2(&mut s, 1e-3, 5).unwrap();
        assert!(p1.tr_fe.iter().chain(&p2.tr_fwa).all(|&v| v == 0.0));
    }

    fn hand_f3() -> Tensor {
        Tensor::full(vec![3, 3], 0.01)
    }

    #[test]
    fn zero_steps_are_inconclusive() {
        let cfg = SweepConfig { seeds: vec![1, 2], phase1_steps: 0, phase2_steps: 0, ..Default::default() };
        let (rows, summary) = sweep(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.a_growth.is_none() && r.fwa_decreasing.is_none()));
        assert!(matches!(summary.verdict(&Thresholds::default(), 0), Verdict::Inconclusive(_)));
    }
}
