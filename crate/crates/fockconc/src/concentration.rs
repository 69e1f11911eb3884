//! Rearrangement calculus on rasterized densities: distribution function
//! mu(t), decreasing rearrangement u*(s), optimal concentration I(s), the
//! global maximum T with off-grid refinement, the crossing s* of u* with
//! e^{-s}, concentration deficits, and the sandwich bounds that control the
//! distance to the Gaussian class.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockFunction;
use crate::grid::{DensityGrid, RegionMask};
use crate::special::{one_minus_exp_neg, Kahan};

/// Sharp concentration bound for a set of the given measure: 1 - e^{-area}.
pub fn fk_bound(area: f64) -> f64 {
    assert!(area >= 0.0, "area must be nonnegative");
    one_minus_exp_neg(area)
}

/// Tabulated rearrangement data of one density grid.
///
/// `sorted` holds the cell samples in decreasing order; with cell area `a`
/// the rasterized objects are
///   mu(t)   = a * #{i : sorted[i] > t},
///   u*(s)   = sorted[k] on [k a, (k+1) a),
///   I(k a)  = a * (sorted[0] + ... + sorted[k-1]),
/// and I is interpolated linearly between breakpoints.
#[derive(Debug, Clone)]
pub struct ConcentrationProfile {
    pub cell_area: f64,
    pub sorted: Vec<f64>,
    /// prefix[k] = sum of the k largest samples (compensated).
    pub prefix: Vec<f64>,
    /// Global maximum of u refined off-grid (falls back to the grid max).
    pub t_max: f64,
    /// Location of the refined maximum.
    pub argmax: Complex64,
    /// Whether the off-grid refinement converged.
    pub refined: bool,
    /// Crossing of u*(s) with e^{-s}; `None` in the degenerate regime
    /// T >= 1 - 1e-6 where every s solves the crossing equation.
    pub s_star: Option<f64>,
    /// t* = e^{-s*}.
    pub t_star: Option<f64>,
    pub norm_sq: f64,
    pub tail_mass: f64,
}

/// Degeneracy threshold on T below which the crossing s* is well-defined.
pub const T_DEGENERATE: f64 = 1.0 - 1e-6;

/// Build the concentration profile of a density grid.
pub fn profile(grid: &DensityGrid) -> ConcentrationProfile {
    let mut sorted = grid.values.clone();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite samples"));
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    let mut acc = Kahan::new();
    prefix.push(0.0);
    for v in &sorted {
        acc.add(*v);
        prefix.push(acc.value());
    }
    let (t_max, argmax, refined) = refine_max(grid, &sorted);
    let cell_area = grid.spec.cell_area();
    let (s_star, t_star) = if t_max / grid.norm_sq >= T_DEGENERATE {
        (None, None)
    } else {
        let s = find_crossing(&sorted, cell_area).map(|s| s.max(0.0));
        (s, s.map(|s| (-s).exp()))
    };
    ConcentrationProfile {
        cell_area,
        sorted,
        prefix,
        t_max,
        argmax,
        refined,
        s_star,
        t_star,
        norm_sq: grid.norm_sq,
        tail_mass: grid.tail_mass,
    }
}

/// Multi-start damped Newton ascent on the analytic u_F from the top grid
/// cells. Returns (T, argmax, converged).
fn refine_max(grid: &DensityGrid, sorted: &[f64]) -> (f64, Complex64, bool) {
    let n = grid.spec.n;
    // top 5 distinct cells by value
    let cutoff = sorted[4.min(sorted.len() - 1)];
    let mut starts: Vec<(f64, Complex64)> = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            let v = grid.values[iy * n + ix];
            if v >= cutoff && starts.len() < 8 {
                starts.push((v, grid.spec.cell_center(ix, iy)));
            }
        }
    }
    starts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    starts.truncate(5);
    let grid_best = starts[0];
    let mut best = grid_best;
    let mut converged = false;
    for &(_, z0) in &starts {
        if let Some((val, z)) = newton_max(&grid.source, z0) {
            converged = true;
            if val > best.0 {
                best = (val, z);
            }
        }
    }
    if !converged {
        return (grid_best.0, grid_best.1, false);
    }
    (best.0, best.1, true)
}

/// Damped Newton on grad u = 0 for u = |F|^2 e^{-pi |z|^2}, from `z0`.
/// Gradient tolerance 1e-12. The Hessian is shifted to be negative definite
/// before solving, which keeps the step an ascent direction even at
/// degenerate maxima (rings of critical points flatten one eigenvalue).
fn newton_max(f: &FockFunction, z0: Complex64) -> Option<(f64, Complex64)> {
    let pi = std::f64::consts::PI;
    let mut z = z0;
    let mut u_prev = f.density_1d(z);
    for _ in 0..120 {
        let (fv, f1, f2) = f.derivatives_1d(z);
        let e = (-pi * z.norm_sqr()).exp();
        // Wirtinger derivatives of u
        let uz = (f1 - pi * z.conj() * fv) * fv.conj() * e;
        let uzz =
            fv.conj() * (f2 - 2.0 * pi * z.conj() * f1 + pi * pi * z.conj() * z.conj() * fv) * e;
        let uzzb = (f1.norm_sqr() - pi * (z.conj() * f1 * fv.conj()).re * 2.0 - pi * fv.norm_sqr()
            + pi * pi * z.norm_sqr() * fv.norm_sqr())
            * e;
        let gx = 2.0 * uz.re;
        let gy = -2.0 * uz.im;
        let gnorm = (gx * gx + gy * gy).sqrt();
        if gnorm <= 1e-12 {
            return Some((f.density_1d(z), z));
        }
        let hxx = 2.0 * uzz.re + 2.0 * uzzb;
        let hyy = -2.0 * uzz.re + 2.0 * uzzb;
        let hxy = -2.0 * uzz.im;
        // shift the 2x2 Hessian below -mu I so the solve yields ascent
        let tr = hxx + hyy;
        let disc = ((hxx - hyy).powi(2) + 4.0 * hxy * hxy).sqrt();
        let lam_max = 0.5 * (tr + disc);
        let lam_min = 0.5 * (tr - disc);
        let mu = (lam_max + 1e-8 * (lam_min.abs() + u_prev)).max(0.0);
        let axx = hxx - mu;
        let ayy = hyy - mu;
        let det = axx * ayy - hxy * hxy;
        let (mut dx, mut dy) = if det.abs() > 1e-300 {
            (-(ayy * gx - hxy * gy) / det, -(axx * gy - hxy * gx) / det)
        } else {
            (gx, gy)
        };
        if dx * gx + dy * gy <= 0.0 {
            dx = gx;
            dy = gy;
        }
        let mut step = 1.0;
        let mut advanced = false;
        for _ in 0..60 {
            let zn = z + Complex64::new(step * dx, step * dy);
            let un = f.density_1d(zn);
            if un >= u_prev {
                // accept equal values only while the step still moves us
                if un > u_prev || step * (dx.abs() + dy.abs()) > 1e-15 {
                    z = zn;
                    u_prev = un;
                    advanced = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            if gnorm <= 1e-9 * (1.0 + u_prev) {
                return Some((u_prev, z));
            }
            return None;
        }
    }
    // ran out of iterations close to the top: accept when the last gradient
    // was already tiny relative to the value scale
    None
}

/// Locate s* with e^{s*} u*(s*) = 1 on the step tabulation: within step k the
/// ratio e^s v_k rises, so the crossing lies in the first step whose right
/// endpoint reaches 1; there s* = -log v_k exactly (clamped to the step).
fn find_crossing(sorted: &[f64], cell_area: f64) -> Option<f64> {
    let a = cell_area;
    for (k, &v) in sorted.iter().enumerate() {
        if v <= 0.0 {
            return None;
        }
        let s_left = k as f64 * a;
        let s_right = s_left + a;
        if (s_right + v.ln()) >= 0.0 {
            // e^{s_right} v >= 1: crossing inside this step
            let s = -v.ln();
            return Some(s.clamp(s_left, s_right));
        }
    }
    None
}

impl ConcentrationProfile {
    /// Rasterized distribution function mu(t).
    pub fn mu(&self, t: f64) -> f64 {
        // number of samples strictly above t
        let k = self.sorted.partition_point(|&v| v > t);
        k as f64 * self.cell_area
    }

    /// Rasterized decreasing rearrangement u*(s).
    pub fn u_star(&self, s: f64) -> f64 {
        if s < 0.0 {
            return self.sorted[0];
        }
        let k = (s / self.cell_area).floor() as usize;
        if k >= self.sorted.len() {
            0.0
        } else {
            self.sorted[k]
        }
    }

    /// Optimal concentration I(s), linear between tabulation breakpoints.
    pub fn capital_i(&self, s: f64) -> f64 {
        let a = self.cell_area;
        let x = (s / a).clamp(0.0, (self.sorted.len()) as f64);
        let k = x.floor() as usize;
        let frac = x - k as f64;
        let base = self.prefix[k.min(self.prefix.len() - 1)];
        let next = if k < self.sorted.len() {
            self.sorted[k]
        } else {
            0.0
        };
        a * (base + frac * next)
    }

    /// Largest tabulated measure (the window area).
    pub fn s_max(&self) -> f64 {
        self.sorted.len() as f64 * self.cell_area
    }

    /// Normalized global maximum T / ||F||^2 (the scale-invariant quantity).
    pub fn t_normalized(&self) -> f64 {
        self.t_max / self.norm_sq
    }

    /// Measure uncertainty of the rasterized level set of measure `s`: a
    /// one-cell-wide band around its boundary, with a near-circular
    /// perimeter model capped by the window scale, plus one cell.
    pub fn measure_band(&self, s: f64) -> f64 {
        let h = self.cell_area.sqrt();
        let perim = 2.0 * (std::f64::consts::PI * s.max(self.cell_area)).sqrt();
        let cap = 8.0 * self.s_max().sqrt();
        2.0 * h * perim.min(cap) + 2.0 * self.cell_area
    }
}

/// Deficit report for one (F, Omega) pair, all fields on the rasterized
/// measure model.
#[derive(Debug, Clone)]
pub struct DeficitReport {
    pub concentration: f64,
    pub fk_bound: f64,
    pub deficit: f64,
    pub superlevel_deficit: f64,
    pub area: f64,
    pub norm_sq: f64,
    pub quad_err: f64,
    pub fk_violation: bool,
}

/// Deficit of F on the masked region: 1 - (int_Omega u) / ((1 - e^{-|Omega|}) ||F||^2),
/// together with the matched super-level-set deficit at s0 = |Omega|.
pub fn deficit(grid: &DensityGrid, mask: &RegionMask) -> Result<DeficitReport> {
    if mask.spec != grid.spec {
        return Err(Error::SpecMismatch);
    }
    let count = mask.count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let a = grid.spec.cell_area();
    let mut acc = Kahan::new();
    for (i, inside) in mask.cells.iter().enumerate() {
        if *inside {
            acc.add(grid.values[i]);
        }
    }
    let concentration = a * acc.value();
    let area = count as f64 * a;
    let bound = fk_bound(area);
    let denom = bound * grid.norm_sq;
    let deficit = 1.0 - concentration / denom;
    let prof = profile(grid);
    let superlevel_deficit = superlevel_deficit_at(&prof, area);
    let err_abs = grid.quadrature_error_estimate(Some(&mask.cells));
    let quad_err = err_abs / denom;
    Ok(DeficitReport {
        concentration,
        fk_bound: bound,
        deficit,
        superlevel_deficit,
        area,
        norm_sq: grid.norm_sq,
        quad_err,
        fk_violation: deficit < -quad_err,
    })
}

/// Deficit of the super-level set of measure s0: 1 - I(s0)/((1-e^{-s0})||F||^2).
pub fn superlevel_deficit_at(prof: &ConcentrationProfile, s0: f64) -> f64 {
    1.0 - prof.capital_i(s0) / (fk_bound(s0) * prof.norm_sq)
}

/// The super-level set of measure `s0` as a mask, with its deficit.
/// The threshold is u*(s0); ties and the final partial cell are resolved by
/// taking higher-valued cells first, then lexicographic cell order.
pub fn superlevel_mask(grid: &DensityGrid, s0: f64) -> Result<(RegionMask, f64)> {
    let window = grid.spec.window_area();
    if !(s0 > 0.0) || s0 > 0.9 * window {
        return Err(Error::MeasureTooLarge {
            requested: s0,
            window,
        });
    }
    let a = grid.spec.cell_area();
    let k = (s0 / a).round() as usize;
    let k = k.clamp(1, grid.values.len());
    // order cell indices by (-value, index)
    let mut order: Vec<u32> = (0..grid.values.len() as u32).collect();
    order.sort_unstable_by(|&i, &j| {
        grid.values[j as usize]
            .partial_cmp(&grid.values[i as usize])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut cells = vec![false; grid.values.len()];
    let mut acc = Kahan::new();
    for &i in order.iter().take(k) {
        cells[i as usize] = true;
        acc.add(grid.values[i as usize]);
    }
    let mask = RegionMask::from_cells(grid.spec, cells)?;
    let s_rast = k as f64 * a;
    let d = 1.0 - a * acc.value() / (fk_bound(s_rast) * grid.norm_sq);
    Ok((mask, d))
}

/// Convexity diagnostics of G(sigma) = I(-log sigma) on a uniform sigma grid,
/// plus the largest violation of I(s) <= ||F||^2 (1 - e^{-s}).
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub min_second_difference: f64,
    pub max_bound_violation: f64,
}

pub fn convexity_check(prof: &ConcentrationProfile, points: usize) -> ConvexityReport {
    let m = points.max(8);
    let g = |sigma: f64| -> f64 {
        if sigma >= 1.0 {
            0.0
        } else {
            prof.capital_i(-(sigma.ln()))
        }
    };
    let mut min_dd = f64::INFINITY;
    for i in 1..m {
        let s0 = i as f64 / m as f64;
        let dd = g(s0 + 1.0 / m as f64) - 2.0 * g(s0) + g(s0 - 1.0 / m as f64);
        min_dd = min_dd.min(dd);
    }
    let mut max_violation = f64::NEG_INFINITY;
    let steps = 200;
    for i in 1..=steps {
        let s = prof.s_max() * i as f64 / steps as f64;
        let v = prof.capital_i(s) - prof.norm_sq * fk_bound(s);
        max_violation = max_violation.max(v);
    }
    ConvexityReport {
        min_second_difference: min_dd,
        max_bound_violation: max_violation,
    }
}

/// The two-sided sandwich around the area between e^{-s} and u*(s):
///   (1-T)^2/2  <=  int_0^{s*} (e^{-s} - u*(s)) ds  <=  delta_{s0} e^{s0},
/// with the reinforced ratio (1-T)/integral reported alongside.
/// Meaningful for unit-norm F; callers normalize.
#[derive(Debug, Clone)]
pub struct SandwichBounds {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    /// (1-T)/mid; `None` when T is degenerate or the integral vanishes.
    pub reinforced_ratio: Option<f64>,
    pub degenerate: bool,
}

pub fn lemma_bounds(prof: &ConcentrationProfile, s0: f64) -> SandwichBounds {
    let t = prof.t_normalized().min(1.0);
    let d_s0 = superlevel_deficit_at(prof, s0);
    let rhs = d_s0 * s0.exp();
    let Some(s_star) = prof.s_star else {
        return SandwichBounds {
            lhs: 0.0,
            mid: 0.0,
            rhs,
            reinforced_ratio: None,
            degenerate: true,
        };
    };
    let lhs = (1.0 - t).powi(2) / 2.0;
    // integral of (e^{-s} - u*(s)) over [0, s*]: exact on each step of the
    // rasterized u*, trapezoid-free since both pieces integrate in closed form
    let a = prof.cell_area;
    let mut acc = Kahan::new();
    let full_steps = (s_star / a).floor() as usize;
    for k in 0..full_steps.min(prof.sorted.len()) {
        let s_l = k as f64 * a;
        let s_r = s_l + a;
        acc.add(((-s_l).exp() - (-s_r).exp()) - prof.sorted[k] * a);
    }
    let s_l = full_steps as f64 * a;
    if s_star > s_l && full_steps < prof.sorted.len() {
        acc.add(((-s_l).exp() - (-s_star).exp()) - prof.sorted[full_steps] * (s_star - s_l));
    }
    let mid = acc.value();
    let reinforced_ratio = if mid > 1e-300 {
        Some((1.0 - t) / mid)
    } else {
        None
    };
    SandwichBounds {
        lhs,
        mid,
        rhs,
        reinforced_ratio,
        degenerate: false,
    }
}

/// One-cell slack used by the discrete inequality checks.
pub fn one_cell_slack(prof: &ConcentrationProfile) -> f64 {
    prof.cell_area * (1.0 + prof.norm_sq)
}

/// Worst relative margin of the ratio monotonicity r(s) = e^s u*(s)
/// nondecreasing. Rasterization relocates each sorted sample by at most a
/// boundary band in measure, so consecutive tabulated ratios may dip by the
/// factor e^{-2(band + a)}; the margin is measured against that factor.
/// Nonnegative margins mean the property holds within the slack.
pub fn ratio_monotonicity_margin(prof: &ConcentrationProfile) -> f64 {
    let a = prof.cell_area;
    let floor = prof.sorted[0] * 1e-12;
    let mut worst = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for (k, &v) in prof.sorted.iter().enumerate() {
        if v <= floor {
            break;
        }
        let s = k as f64 * a;
        let r = s.exp() * v;
        if let Some((rp, band_p)) = prev {
            let allowed = rp * (-2.0 * (band_p + a)).exp();
            worst = worst.min((r - allowed) / rp.max(1e-300));
        }
        prev = Some((r, prof.measure_band(s)));
    }
    worst
}

/// Number of sign changes of u_*(s) - e^{-s} across the tabulation, with a
/// band-sized dead zone; the degenerate regime returns zero.
pub fn crossing_sign_changes(prof: &ConcentrationProfile) -> usize {
    if prof.s_star.is_none() {
        return 0;
    }
    let a = prof.cell_area;
    let floor = prof.sorted[0] * 1e-12;
    let mut changes = 0usize;
    let mut last_sign = 0i32;
    for (k, &v) in prof.sorted.iter().enumerate() {
        if v <= floor {
            break;
        }
        let s_mid = (k as f64 + 0.5) * a;
        let reference = (-s_mid).exp();
        let diff = v - reference;
        let dead = (v + reference) * (prof.measure_band(s_mid) + 2.0 * a);
        if diff.abs() <= dead {
            continue;
        }
        let sign = if diff > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            changes += 1;
        }
        last_sign = sign;
    }
    changes
}

/// Lower-bound margin for mu(t) >= log_+(T/t) - slack over tabulated t,
/// where the slack is the one-cell boundary band at the relevant measure.
pub fn mu_lower_bound_margin(prof: &ConcentrationProfile) -> f64 {
    let t_max = prof.t_max;
    let mut worst = f64::INFINITY;
    let len = prof.sorted.len();
    let samples = 200usize.min(len);
    for j in 0..samples {
        // log-spaced walk through the tabulated values
        let k = ((len as f64).powf(j as f64 / samples as f64) as usize).min(len - 1);
        let t = prof.sorted[k];
        if t <= 0.0 || t >= t_max {
            continue;
        }
        let needed = (t_max / t).ln();
        let slack = prof.measure_band(needed) + prof.cell_area;
        if k + 1 >= len {
            continue; // window saturated; bound not informative there
        }
        worst = worst.min(prof.mu(t) - (needed - slack));
    }
    worst
}

/// Peak-regime overshoot statistic: max over t in [0.8 T, 0.99 T] of
/// (mu(t)/log(T/t) - 1)/(1 - T), finite for densities with T close to its
/// ceiling. Callers aggregate this over an ensemble and assert finiteness.
pub fn mu_peak_overshoot(prof: &ConcentrationProfile) -> f64 {
    let t_max = prof.t_max;
    let one_minus_t = (1.0 - prof.t_normalized()).max(1e-15);
    let mut worst: f64 = 0.0;
    for i in 0..=50 {
        let t = t_max * (0.80 + 0.19 * i as f64 / 50.0);
        let logratio = (t_max / t).ln();
        if logratio <= 0.0 {
            continue;
        }
        let q = (prof.mu(t) / logratio - 1.0) / one_minus_t;
        worst = worst.max(q);
    }
    worst
}
