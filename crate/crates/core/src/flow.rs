//! Generalized bracket flow and its scalar-normalized variant.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::courant::{
    big_theta, bismut_ricci, dstar_h_norm, gen_ricci, gen_scalar, laplacian, rc_minus_a,
    DorfmanBracket, Tangent, CONSTRUCTION_TOL,
};
use crate::error::{Error, Result};
use crate::liealg::{jacobiator, scalar_curvature};
use crate::multilinear::{multi_indices, rho_action, theta_action, Convention};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowOptions {
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    pub normalized: bool,
    /// Record a sample every this many accepted steps (the final state is
    /// always recorded).
    pub monitor_every: usize,
    pub blowup_norm_cap: f64,
    /// Stop normalized runs once convergence is declared.
    pub stop_on_convergence: bool,
    /// Pull the state back onto `Jacobi = 0, dH = 0` (minimal-norm
    /// correction) when the residuals exceed `project_tol * max(1, |mud|^2)`.
    pub project_invariants: bool,
    pub project_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 1_000_000,
            min_step: 1e-14,
            normalized: false,
            monitor_every: 1,
            blowup_norm_cap: 1e8,
            stop_on_convergence: true,
            project_invariants: true,
            project_tol: 1e-12,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.rtol > 0.0 && self.atol > 0.0 && self.min_step > 0.0) {
            return Err(Error::Domain(
                "t_max, rtol, atol and min_step must be positive".into(),
            ));
        }
        if self.monitor_every == 0 {
            return Err(Error::Domain("monitor_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub mud: DorfmanBracket,
    pub norm2_mud: f64,
    pub gen_scalar: f64,
    pub scal: f64,
    pub norm2_h: f64,
    pub jacobi_residual: f64,
    pub dh_residual: f64,
    pub dstar_h_norm: f64,
    pub ell: Option<f64>,
    pub step_size: f64,
}

impl TrajectorySample {
    pub fn new(t: f64, mud: DorfmanBracket, ell: Option<f64>, step_size: f64) -> Self {
        Self {
            t,
            norm2_mud: mud.norm2(),
            gen_scalar: gen_scalar(&mud),
            scal: scalar_curvature(mud.mu()),
            norm2_h: mud.h().norm2(Convention::Full),
            jacobi_residual: mud.jacobi_residual(),
            dh_residual: mud.dh_residual(),
            dstar_h_norm: dstar_h_norm(&mud),
            ell,
            step_size,
            mud,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    ReachedTMax,
    BlowUp { t_estimate: f64 },
    Converged { limit: DorfmanBracket },
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub kind: OutcomeKind,
    pub trajectory: Vec<TrajectorySample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Number of invariant projections applied.
    pub projections: usize,
}

impl FlowOutcome {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.trajectory.last().expect("trajectory holds the start")
    }
}

/// `(-theta(Ric^B) mu, Delta H - rho(Ric^B) H)`.
pub fn vector_field(d: &DorfmanBracket) -> Result<Tangent> {
    let rb = bismut_ricci(d.mu(), d.h());
    if rb.iter().any(|x| !x.is_finite()) {
        return Err(Error::Integration("non-finite curvature".into()));
    }
    let mu = theta_action(&rb, d.mu())?.scale(-1.0);
    let h = &laplacian(d.mu(), d.h()) - &rho_action(&rb, d.h())?;
    Ok(Tangent { mu, h })
}

/// `-Theta(Rc - A) mud`; agrees with [`vector_field`] whenever `dH = 0`.
pub fn theta_vector_field(d: &DorfmanBracket) -> Tangent {
    big_theta(&rc_minus_a(d), d).scale(-1.0)
}

/// Normalized field `vector_field + ell * mud` and `ell`.
pub fn normalized_vector_field(d: &DorfmanBracket) -> Result<(Tangent, f64)> {
    let n2 = d.norm2();
    if n2 <= 0.0 {
        return Err(Error::Degenerate(
            "normalized flow of the zero bracket".into(),
        ));
    }
    let v = vector_field(d)?;
    let base = Tangent::from_bracket(d);
    let ell = -v.inner(&base) / n2;
    Ok((v.add_scaled(ell, &base), ell))
}

fn field_flat(dim: usize, y: &[f64], normalized: bool) -> Result<Vec<f64>> {
    let d = DorfmanBracket::from_flat(dim, y)?;
    if !d.is_finite() {
        return Err(Error::Integration("non-finite state".into()));
    }
    let v = if normalized {
        normalized_vector_field(&d)?.0
    } else {
        vector_field(&d)?
    };
    Ok(v.to_flat())
}

// Dormand–Prince 5(4) tableau (autonomous, so the nodes are not needed)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step from `(y, k1)`; returns `(y_new, k7, err_norm)`.
fn dopri_step(
    dim: usize,
    y: &[f64],
    k1: &[f64],
    h: f64,
    normalized: bool,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let m = y.len();
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
    ks.push(k1.to_vec());
    for s in 1..7 {
        let mut ys = y.to_vec();
        for (j, k) in ks.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..m {
                    ys[i] += h * a * k[i];
                }
            }
        }
        ks.push(field_flat(dim, &ys, normalized)?);
    }
    let mut y_new = y.to_vec();
    let mut err2 = 0.0;
    for i in 0..m {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * ks[s][i];
            d4 += B4[s] * ks[s][i];
        }
        y_new[i] += h * d5;
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        let e = h * (d5 - d4) / sc;
        err2 += e * e;
    }
    let err = (err2 / m.max(1) as f64).sqrt();
    let k7 = ks.pop().expect("seven stages");
    Ok((y_new, k7, err))
}

fn rescale(y: &mut [f64], target_norm2: f64) {
    let n2: f64 = crate::courant::FLAT_WEIGHT * y.iter().map(|x| x * x).sum::<f64>();
    if n2 > 0.0 {
        let c = (target_norm2 / n2).sqrt();
        for x in y.iter_mut() {
            *x *= c;
        }
    }
}

/// Minimal-norm Gauss–Newton correction of `mud` (all components jointly)
/// onto `Jacobi(mu) = 0, d_mu H = 0`.
///
/// The bracket flow preserves both conditions exactly, but off the variety
/// it is transversally unstable once the normalizing gauge degenerates, so
/// round-off grows exponentially in long normalized runs.
pub fn project_to_invariants(d: &DorfmanBracket) -> DorfmanBracket {
    let n = d.dim();
    if n < 3 {
        return d.clone();
    }
    let residual = |y: &[f64]| -> DVector<f64> {
        let e = DorfmanBracket::from_flat(n, y).expect("same shape");
        let j = jacobiator(e.mu());
        let mut v = Vec::new();
        for t in multi_indices(n, 3) {
            v.extend(j.get(t[0], t[1], t[2]).expect("triple present"));
        }
        if n >= 4 {
            v.extend_from_slice(crate::courant::ce_differential(e.mu(), e.h()).components());
        }
        DVector::from_vec(v)
    };
    let mut y = d.to_flat();
    for _ in 0..3 {
        let r0 = residual(&y);
        if r0.amax() == 0.0 {
            break;
        }
        // both constraints are quadratic, so central differences are exact
        let mut jm = DMatrix::zeros(r0.len(), y.len());
        for c in 0..y.len() {
            let mut plus = y.clone();
            plus[c] += 1.0;
            let mut minus = y.clone();
            minus[c] -= 1.0;
            jm.set_column(c, &((residual(&plus) - residual(&minus)) * 0.5));
        }
        let svd = jm.svd(true, true);
        let cut = 1e-10 * svd.singular_values.amax().max(f64::MIN_POSITIVE);
        let Ok(step) = svd.solve(&r0, cut) else { break };
        for (x, s) in y.iter_mut().zip(step.iter()) {
            *x -= s;
        }
    }
    DorfmanBracket::from_flat(n, &y).expect("same shape")
}

/// Integrates the (optionally normalized) generalized bracket flow.
pub fn integrate(start: &DorfmanBracket, opts: &FlowOptions) -> Result<FlowOutcome> {
    opts.validate()?;
    let dim = start.dim();
    let n0 = start.norm2();
    if opts.normalized && n0 <= 0.0 {
        return Err(Error::Degenerate(
            "normalized flow of the zero bracket".into(),
        ));
    }
    let drift_cap = 1e3 * CONSTRUCTION_TOL;

    let sample = |t: f64, y: &[f64], h: f64| -> Result<TrajectorySample> {
        let d = DorfmanBracket::from_flat(dim, y)?;
        let ell = if opts.normalized {
            Some(normalized_vector_field(&d)?.1)
        } else {
            None
        };
        Ok(TrajectorySample::new(t, d, ell, h))
    };

    let mut y = start.to_flat();
    let mut t = 0.0;
    let mut k1 = field_flat(dim, &y, opts.normalized)?;
    let mut trajectory = vec![sample(0.0, &y, 0.0)?];

    let field_scale = |k: &[f64], y: &[f64]| -> f64 {
        let kn: f64 = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let yn: f64 = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        kn / yn.max(f64::MIN_POSITIVE)
    };
    // initial step from the field's relative rate
    let rate = field_scale(&k1, &y);
    let mut h = if rate > 0.0 {
        (1e-3 / rate).min(opts.t_max)
    } else {
        opts.t_max
    };

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut err_prev = 1e-4f64;
    let mut small_field_run = 0usize;
    let mut since_sample = 0usize;
    let mut projections = 0usize;

    let kind = loop {
        if t >= opts.t_max {
            break OutcomeKind::ReachedTMax;
        }
        if accepted + rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        let norm2 = crate::courant::FLAT_WEIGHT * y.iter().map(|x| x * x).sum::<f64>();
        let cap = if norm2 > 0.0 { 0.1 / norm2 } else { f64::INFINITY };
        h = h.min(cap).min(opts.t_max - t);
        if h < opts.min_step {
            if let Some(te) = detect_blowup(&trajectory) {
                break OutcomeKind::BlowUp { t_estimate: te };
            }
            break OutcomeKind::StepUnderflow;
        }

        let (y_new, k_new, err) = dopri_step(dim, &y, &k1, h, opts.normalized, opts.rtol, opts.atol)?;
        if !err.is_finite() || err > 1.0 {
            rejected += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)
            } else {
                0.1
            };
            h *= fac;
            continue;
        }

        // accepted
        accepted += 1;
        t = if opts.t_max - (t + h) < 1e-12 * opts.t_max {
            opts.t_max
        } else {
            t + h
        };
        y = y_new;
        let h_used = h;
        let mut projected = false;
        if opts.project_invariants {
            let d = DorfmanBracket::from_flat(dim, &y)?;
            let tol = opts.project_tol * d.norm2().max(1.0);
            if d.jacobi_residual() > tol || d.dh_residual() > tol {
                y = project_to_invariants(&d).to_flat();
                projections += 1;
                projected = true;
            }
        }
        if opts.normalized {
            rescale(&mut y, n0);
            k1 = field_flat(dim, &y, true)?;
        } else if projected {
            k1 = field_flat(dim, &y, false)?;
        } else {
            k1 = k_new;
        }
        let e = err.max(1e-10);
        let fac = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
        err_prev = e;
        h *= fac;

        since_sample += 1;
        let at_end = t >= opts.t_max;
        let norm2 = crate::courant::FLAT_WEIGHT * y.iter().map(|x| x * x).sum::<f64>();
        let over_cap = norm2 > opts.blowup_norm_cap;
        if since_sample >= opts.monitor_every || at_end || over_cap {
            since_sample = 0;
            let s = sample(t, &y, h_used)?;
            let scale = s.norm2_mud.max(1.0);
            if s.jacobi_residual > drift_cap * scale || s.dh_residual > drift_cap * scale {
                return Err(Error::Integration(format!(
                    "invariant drift at t = {t}: jacobi {:.3e}, dH {:.3e}",
                    s.jacobi_residual, s.dh_residual
                )));
            }
            let converged_now = if opts.normalized {
                let (v, _) = normalized_vector_field(&s.mud)?;
                v.norm2().sqrt() < 1e-8 * s.norm2_mud.sqrt()
            } else {
                false
            };
            trajectory.push(s);
            if converged_now {
                small_field_run += 1;
            } else {
                small_field_run = 0;
            }
            if opts.normalized && opts.stop_on_convergence && small_field_run >= 10 {
                let limit = trajectory.last().expect("pushed").mud.clone();
                break OutcomeKind::Converged { limit };
            }
            if over_cap {
                if let Some(te) = detect_blowup(&trajectory) {
                    break OutcomeKind::BlowUp { t_estimate: te };
                }
            }
        }
    };

    if opts.normalized && small_field_run >= 10 {
        if let OutcomeKind::ReachedTMax = kind {
            let limit = trajectory.last().expect("non-empty").mud.clone();
            return Ok(FlowOutcome {
                kind: OutcomeKind::Converged { limit },
                trajectory,
                accepted_steps: accepted,
                rejected_steps: rejected,
                projections,
            });
        }
    }
    Ok(FlowOutcome {
        kind,
        trajectory,
        accepted_steps: accepted,
        rejected_steps: rejected,
        projections,
    })
}

/// Independent trajectories in parallel; results are in input order and do
/// not depend on scheduling.
pub fn integrate_batch(starts: &[DorfmanBracket], opts: &FlowOptions) -> Vec<Result<FlowOutcome>> {
    starts.par_iter().map(|s| integrate(s, opts)).collect()
}

/// Fits `1/|mud|^2 = a + b t` on the final window (the last
/// `max(10, 20%)` samples) and returns the root `-a/b` when the relative
/// residual is below `1e-3` and the norm is growing.
pub fn detect_blowup(trajectory: &[TrajectorySample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trajectory
        .iter()
        .map(|s| (s.t, s.norm2_mud))
        .collect();
    detect_blowup_points(&pts)
}

/// [`detect_blowup`] on raw `(t, |mud|^2)` pairs.
pub fn detect_blowup_points(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 10 {
        return None;
    }
    let w = (pts.len() / 5).max(10);
    let window = &pts[pts.len() - w..];
    if window.iter().any(|(_, n2)| !(*n2 > 0.0) || !n2.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = window.iter().map(|(t, _)| *t).collect();
    let ys: Vec<f64> = window.iter().map(|(_, n2)| 1.0 / n2).collect();
    let nw = w as f64;
    let mx = xs.iter().sum::<f64>() / nw;
    let my = ys.iter().sum::<f64>() / nw;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    if b >= 0.0 {
        return None;
    }
    let res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum::<f64>()
        .sqrt();
    // residual relative to the variation explained by the fit
    let spread: f64 = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>().sqrt();
    if spread <= 0.0 || res / spread >= 1e-3 {
        return None;
    }
    Some(-a / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFit {
    /// `t S(t)` at the final sample.
    pub limit: f64,
    /// `(max - min) / |limit|` of `t S(t)` over the final decade.
    pub relative_spread: f64,
    pub t_start: f64,
    pub t_end: f64,
}

/// Estimates `lim t S(t)` from the final decade `[t_end / 10, t_end]`.
pub fn asymptotic_scalar_fit(trajectory: &[TrajectorySample]) -> Option<ScalarFit> {
    let last = trajectory.last()?;
    let t_end = last.t;
    if t_end <= 0.0 {
        return None;
    }
    let vals: Vec<f64> = trajectory
        .iter()
        .filter(|s| s.t >= t_end / 10.0)
        .map(|s| s.t * s.gen_scalar)
        .collect();
    let limit = last.t * last.gen_scalar;
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let relative_spread = if limit != 0.0 {
        (max - min) / limit.abs()
    } else if max == min {
        0.0
    } else {
        f64::INFINITY
    };
    Some(ScalarFit {
        limit,
        relative_spread,
        t_start: t_end / 10.0,
        t_end,
    })
}

/// Directional central difference of `S` along the flow field at `d`,
/// returned with `|Rc|^2` (Frobenius norm on `g + g*`).
pub fn scalar_rate(d: &DorfmanBracket) -> Result<(f64, f64)> {
    let v = vector_field(d)?;
    let y = d.to_flat();
    let vf = v.to_flat();
    let yn = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    let vn = vf.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rc2 = gen_ricci(d).frobenius_norm2();
    if vn == 0.0 {
        return Ok((0.0, rc2));
    }
    let eps = 1e-4 * yn / vn;
    let shifted = |s: f64| -> Result<f64> {
        let z: Vec<f64> = y.iter().zip(&vf).map(|(a, b)| a + s * b).collect();
        Ok(gen_scalar(&DorfmanBracket::from_flat(d.dim(), &z)?))
    };
    let ds = (shifted(eps)? - shifted(-eps)?) / (2.0 * eps);
    Ok((ds, rc2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::LieBracket;
    use crate::multilinear::KForm;

    fn n3_soliton() -> DorfmanBracket {
        DorfmanBracket::new(
            LieBracket::from_entries(3, &[(0, 1, 2, 1.0)]),
            KForm::basis(3, &[0, 1, 2]),
        )
        .unwrap()
    }

    fn so3() -> DorfmanBracket {
        DorfmanBracket::new(
            LieBracket::from_entries(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]),
            KForm::zero(3, 3),
        )
        .unwrap()
    }

    #[test]
    fn field_examples() {
        assert_eq!(vector_field(&DorfmanBracket::zero(3)).unwrap(), Tangent::zero(3));
        let d = n3_soliton();
        let v = vector_field(&d).unwrap();
        assert!((&v.mu - &d.mu().scale(-2.0)).max_abs() < 1e-14);
        assert!((&v.h - &d.h().scale(-2.0)).max_abs() < 1e-14);
        let d = so3();
        let v = vector_field(&d).unwrap();
        assert!((&v.mu - &d.mu().scale(0.5)).max_abs() < 1e-14);
    }

    #[test]
    fn normalized_field_examples() {
        let d = n3_soliton();
        let unit = d.scale(1.0 / d.norm2().sqrt());
        let (v, ell) = normalized_vector_field(&unit).unwrap();
        assert!(v.max_abs() < 1e-14);
        // ell scales like |mud|^2: 2 at |mud|^2 = 12, 1/6 on the unit sphere
        assert!((ell - 1.0 / 6.0).abs() < 1e-14);
        let (_, ell) = normalized_vector_field(&d).unwrap();
        assert!((ell - 2.0).abs() < 1e-13);
        assert!(normalized_vector_field(&DorfmanBracket::zero(3)).is_err());
        let s = so3();
        let (v, _) = normalized_vector_field(&s.scale(1.0 / s.norm2().sqrt())).unwrap();
        assert!(v.max_abs() < 1e-14);
    }

    #[test]
    fn synthetic_blowup_fit() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 0.49 * i as f64 / 39.0;
                (t, 12.0 / (1.0 - 2.0 * t))
            })
            .collect();
        let te = detect_blowup_points(&pts).unwrap();
        assert!((te - 0.5).abs() < 1e-6);
        let decaying: Vec<(f64, f64)> = (0..40)
            .map(|i| (i as f64, 12.0 / (1.0 + 4.0 * i as f64)))
            .collect();
        assert_eq!(detect_blowup_points(&decaying), None);
    }

    #[test]
    fn soliton_scaling_law() {
        let opts = FlowOptions {
            t_max: 10.0,
            ..Default::default()
        };
        let out = integrate(&n3_soliton(), &opts).unwrap();
        assert_eq!(out.kind, OutcomeKind::ReachedTMax);
        for s in &out.trajectory {
            let exact = 12.0 / (1.0 + 4.0 * s.t);
            assert!((s.norm2_mud - exact).abs() / exact < 1e-6, "t={} {}", s.t, s.norm2_mud);
        }
    }

    #[test]
    fn so3_blows_up_at_one() {
        let out = integrate(&so3(), &FlowOptions::default()).unwrap();
        match out.kind {
            OutcomeKind::BlowUp { t_estimate } => assert!((t_estimate - 1.0).abs() < 0.01),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn abelian_scalar_fit_is_zero() {
        let out = integrate(
            &DorfmanBracket::zero(3),
            &FlowOptions {
                t_max: 1e3,
                ..Default::default()
            },
        )
        .unwrap();
        let fit = asymptotic_scalar_fit(&out.trajectory).unwrap();
        assert_eq!(fit.limit, 0.0);
    }
}
