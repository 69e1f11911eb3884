//! Signal-side transforms for one real variable: Gauss-Hermite quadrature,
//! the orthonormal Hermite basis matched to the Gaussian window
//! phi(x) = 2^{1/4} e^{-pi x^2}, the coefficient-level Bargmann transform,
//! the Gaussian-window short-time Fourier transform, and the residual of the
//! identity linking the two pipelines.
//!
//! The Hermite normalization is fixed by requiring that the transform sends
//! h_k to the k-th normalized monomial; this pins
//! h_k(t) = 2^{1/4} (2^k k!)^{-1/2} H_k(sqrt(2 pi) t) e^{-pi t^2},
//! checked below by the h_0 -> 1 and h_1 -> e_1 tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockFunction;
use crate::special::Kahan;

/// Gaussian window of unit L^2 norm.
pub fn gaussian_window(x: f64) -> f64 {
    std::f64::consts::SQRT_2.sqrt() * (-std::f64::consts::PI * x * x).exp()
}

/// Values phi_0(x) .. phi_n(x) of the orthonormal (w.r.t. dx) Hermite
/// functions, by the stable normalized three-term recurrence
/// phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1}.
fn phi_values(n: usize, x: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    let phi0 = (-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25);
    out.push(phi0);
    if n == 0 {
        return Ok(out);
    }
    let mut prev = phi0;
    let mut cur = x * 2f64.sqrt() * phi0;
    out.push(cur);
    for k in 1..n {
        let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * cur
            - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        if !next.is_finite() {
            return Err(Error::RecurrenceOverflow(k + 1));
        }
        prev = cur;
        cur = next;
        out.push(cur);
    }
    Ok(out)
}

/// Orthonormal Hermite function values h_0(t) .. h_n(t) on the scale matched
/// to the Gaussian window: h_k(t) = (2 pi)^{1/4} phi_k(sqrt(2 pi) t).
pub fn hermite_values(n: usize, t: f64) -> Result<Vec<f64>> {
    let x = (2.0 * std::f64::consts::PI).sqrt() * t;
    let scale = (2.0 * std::f64::consts::PI).powf(0.25);
    let mut out = phi_values(n, x)?;
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

/// Quadrature rule tag carried by a sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadRule {
    /// Gauss-Hermite nodes scaled to the e^{-2 pi t^2} weight, with
    /// ready-to-use dt-weights.
    GaussHermite { weights: Vec<f64> },
    /// Trapezoid weights from the node spacing.
    Trapezoid,
}

/// A complex signal sampled on a known quadrature rule.
#[derive(Debug, Clone)]
pub struct SampledSignal {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
    pub rule: QuadRule,
}

/// Nodes x_i and exponent-free weights w_i e^{x_i^2} of the n-point
/// Gauss-Hermite rule for the weight e^{-x^2}: quadratures read
/// int e^{-x^2} g(x) dx = sum (w_i e^{x_i^2}) (g(x_i) e^{-x_i^2}).
///
/// Nodes come from Golub-Welsch (eigenvalues of the symmetric companion
/// matrix) polished by Newton on the orthonormal recurrence; the modified
/// weights are Christoffel sums of bounded Hermite-function values,
/// w_i e^{x_i^2} = 1 / sum_{k<n} phi_k(x_i)^2, which never underflow.
pub fn gauss_hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let v = ((i as f64 + 1.0) / 2.0).sqrt();
        m[(i, i + 1)] = v;
        m[(i + 1, i)] = v;
    }
    let eig = m.symmetric_eigen();
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let weights = nodes
        .iter_mut()
        .map(|x| {
            // Newton polish of phi_n(x) = 0, using
            // phi_n'(x) = -x phi_n(x) + sqrt(2n) phi_{n-1}(x)
            for _ in 0..3 {
                let phi = phi_values(n, *x).expect("bounded recurrence");
                let deriv = -*x * phi[n] + (2.0 * n as f64).sqrt() * phi[n - 1];
                if deriv != 0.0 {
                    *x -= phi[n] / deriv;
                }
            }
            let phi = phi_values(n - 1, *x).expect("bounded recurrence");
            1.0 / phi.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    (nodes, weights)
}

impl SampledSignal {
    /// Sample `f` at the scaled Gauss-Hermite nodes t_i = x_i / sqrt(2 pi).
    /// The stored weights integrate smooth integrands decaying like
    /// e^{-2 pi t^2} against dt.
    pub fn gauss_hermite(n_nodes: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if n_nodes < 8 {
            return Err(Error::TooFewNodes {
                min: 8,
                got: n_nodes,
            });
        }
        let (xs, modified) = gauss_hermite_rule(n_nodes);
        let c = (2.0 * std::f64::consts::PI).sqrt();
        let nodes: Vec<f64> = xs.iter().map(|&x| x / c).collect();
        let weights: Vec<f64> = modified.iter().map(|&w| w / c).collect();
        let values: Vec<Complex64> = nodes.iter().map(|&t| f(t)).collect();
        let s = Self {
            nodes,
            values,
            rule: QuadRule::GaussHermite { weights },
        };
        s.validate()?;
        Ok(s)
    }

    /// Wrap explicit samples with trapezoid weighting.
    pub fn from_samples(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let s = Self {
            nodes,
            values,
            rule: QuadRule::Trapezoid,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() < 8 {
            return Err(Error::TooFewNodes {
                min: 8,
                got: self.nodes.len(),
            });
        }
        if self.nodes.len() != self.values.len() {
            return Err(Error::BadNodes);
        }
        if self
            .nodes
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[0].is_finite())
        {
            return Err(Error::BadNodes);
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::BadNodes);
        }
        if let QuadRule::GaussHermite { .. } = self.rule {
            let n = self.nodes.len();
            let scale = self.nodes[n - 1].abs().max(1.0);
            for i in 0..n / 2 {
                if (self.nodes[i] + self.nodes[n - 1 - i]).abs() > 1e-10 * scale {
                    return Err(Error::AsymmetricNodes);
                }
            }
        }
        Ok(())
    }

    /// dt-quadrature weights of the declared rule.
    pub fn weights(&self) -> Vec<f64> {
        match &self.rule {
            QuadRule::GaussHermite { weights } => weights.clone(),
            QuadRule::Trapezoid => {
                let n = self.nodes.len();
                let mut w = vec![0.0; n];
                for i in 0..n {
                    let left = if i > 0 {
                        self.nodes[i] - self.nodes[i - 1]
                    } else {
                        0.0
                    };
                    let right = if i + 1 < n {
                        self.nodes[i + 1] - self.nodes[i]
                    } else {
                        0.0
                    };
                    w[i] = 0.5 * (left + right);
                }
                w
            }
        }
    }

    /// Integral of f(t) g(t) dt for a scalar factor g evaluated at the nodes.
    pub fn integrate_against(&self, g: impl Fn(f64) -> Complex64) -> Complex64 {
        let w = self.weights();
        let mut re = Kahan::new();
        let mut im = Kahan::new();
        for ((&t, &v), &wi) in self.nodes.iter().zip(&self.values).zip(&w) {
            let term = v * g(t) * wi;
            re.add(term.re);
            im.add(term.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Largest |f| at the two node extremes.
    pub fn edge_magnitude(&self) -> f64 {
        self.values[0]
            .norm()
            .max(self.values[self.values.len() - 1].norm())
    }

    /// Parse `t,re,im` CSV rows (header line optional).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Format(format!("bad signal row: {line:?}")));
            }
            let t: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad node in row: {line:?}")))?;
            let re: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad value in row: {line:?}")))?;
            let im: f64 = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad value in row: {line:?}")))?;
            nodes.push(t);
            values.push(Complex64::new(re, im));
        }
        Self::from_samples(nodes, values)
    }
}

/// Hermite coefficients c_k = <f, h_k> for k = 0..n, with the tail fraction
/// |c_n|^2 / sum |c_k|^2 as a truncation diagnostic.
#[derive(Debug, Clone)]
pub struct HermiteExpansion {
    pub coeffs: Vec<Complex64>,
    pub tail_fraction: f64,
}

/// Expand a sampled signal over the Hermite basis by quadrature.
pub fn hermite_expand(f: &SampledSignal, n: usize) -> Result<HermiteExpansion> {
    if f.nodes.len() < 2 * n + 1 {
        return Err(Error::TooFewNodes {
            min: 2 * n + 1,
            got: f.nodes.len(),
        });
    }
    let w = f.weights();
    let mut res = vec![Kahan::new(); n + 1];
    let mut ims = vec![Kahan::new(); n + 1];
    for ((&t, &v), &wi) in f.nodes.iter().zip(&f.values).zip(&w) {
        let h = hermite_values(n, t)?;
        for k in 0..=n {
            let term = v * h[k] * wi;
            res[k].add(term.re);
            ims[k].add(term.im);
        }
    }
    let coeffs: Vec<Complex64> = res
        .iter()
        .zip(&ims)
        .map(|(r, i)| Complex64::new(r.value(), i.value()))
        .collect();
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail_fraction = if total > 0.0 {
        coeffs[n].norm_sqr() / total
    } else {
        0.0
    };
    Ok(HermiteExpansion {
        coeffs,
        tail_fraction,
    })
}

/// The Bargmann transform on coefficients: the expansion over h_k maps to
/// the same coefficients over the normalized monomials, unitarily.
pub fn bargmann(e: &HermiteExpansion) -> FockFunction {
    FockFunction::new_1d(e.coeffs.iter().cloned().enumerate())
        .expect("finite coefficients map to a valid function")
}

/// Decay threshold demanded of signals entering the windowed transform.
pub const DECAY_TOL: f64 = 1e-12;

/// Gaussian-window short-time Fourier transform at one point of the
/// time-frequency plane, by the signal's quadrature rule. The window is
/// real, so no conjugation is needed.
pub fn stft_gaussian(f: &SampledSignal, x: f64, omega: f64) -> Result<Complex64> {
    let edge = f.edge_magnitude();
    if edge > DECAY_TOL {
        return Err(Error::InsufficientDecay {
            value: edge,
            tol: DECAY_TOL,
        });
    }
    Ok(f.integrate_against(|t| {
        let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t * omega);
        phase * gaussian_window(x - t)
    }))
}

/// Tail tolerance on the Hermite expansion feeding the identity check.
pub const EXPANSION_TAIL_TOL: f64 = 1e-10;

/// Default number of Hermite modes.
pub const DEFAULT_MODES: usize = 24;

/// Default number of Gauss-Hermite nodes.
pub const DEFAULT_NODES: usize = 129;

/// Residual of the identity linking the two pipelines: the magnitude of the
/// windowed transform at (x, -omega) must match |B f(x + i omega)| times the
/// Gaussian weight e^{-pi (x^2 + omega^2)/2}. Returns the max over `points`.
pub fn bargmann_identity_residual(f: &SampledSignal, points: &[(f64, f64)]) -> Result<f64> {
    let expansion = hermite_expand(f, DEFAULT_MODES)?;
    if expansion.tail_fraction > EXPANSION_TAIL_TOL {
        return Err(Error::ExpansionTail(
            expansion.tail_fraction,
            EXPANSION_TAIL_TOL,
        ));
    }
    let bf = bargmann(&expansion);
    let mut worst = 0.0f64;
    for &(x, omega) in points {
        let lhs = stft_gaussian(f, x, -omega)?.norm();
        let z = Complex64::new(x, omega);
        let rhs = bf.evaluate_1d(z).norm()
            * (-std::f64::consts::PI * z.norm_sqr() / 2.0).exp();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// The 5 x 5 grid over [-1.5, 1.5]^2 used by the standard identity battery.
pub fn standard_grid() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(25);
    for i in 0..5 {
        for j in 0..5 {
            pts.push((
                -1.5 + 3.0 * i as f64 / 4.0,
                -1.5 + 3.0 * j as f64 / 4.0,
            ));
        }
    }
    pts
}

/// Sample the k-th Hermite function on the default rule.
pub fn hermite_signal(k: usize) -> SampledSignal {
    SampledSignal::gauss_hermite(DEFAULT_NODES, |t| {
        Complex64::new(hermite_values(k, t).expect("low order")[k], 0.0)
    })
    .expect("default rule is valid")
}
