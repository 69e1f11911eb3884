//! Truncated expansions in the Bargmann-Fock space of holomorphic functions
//! square-integrable against the Gaussian weight e^{-pi |z|^2}.
//!
//! Functions are stored by their coefficients with respect to the orthonormal
//! basis e_alpha(z) = (pi^{|alpha|}/alpha!)^{1/2} z^alpha. The weighted
//! density u_F(z) = |F(z)|^2 e^{-pi |z|^2} drives every concentration
//! computation downstream.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{factorial, gamma_p_int, Kahan};

/// A point of C^d, identified with R^{2d}.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint(pub Vec<Complex64>);

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDim(0));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteCoefficient(vec![]));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Squared Euclidean norm of the underlying point of R^{2d}.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint(vec![z])
    }
}

/// Coefficient storage: dense for one complex variable, sparse otherwise.
#[derive(Debug, Clone)]
enum Coeffs {
    Dense(Vec<Complex64>),
    Sparse(BTreeMap<Vec<u32>, Complex64>),
}

/// A truncated Fock-space function.
#[derive(Debug, Clone)]
pub struct FockFunction {
    dim: usize,
    max_degree: usize,
    coeffs: Coeffs,
}

impl FockFunction {
    /// Build a function of one variable from coefficients indexed by degree.
    pub fn new_1d(coeffs: impl IntoIterator<Item = (usize, Complex64)>) -> Result<Self> {
        let entries: Vec<(Vec<u32>, Complex64)> = coeffs
            .into_iter()
            .map(|(k, a)| (vec![k as u32], a))
            .collect();
        Self::new(1, entries)
    }

    /// Build a function of `dim` variables from multi-indexed coefficients.
    /// The degree is inferred from the largest supplied index.
    pub fn new(dim: usize, coeffs: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDim(dim));
        }
        let mut map = BTreeMap::new();
        let mut max_degree = 0usize;
        for (idx, a) in coeffs {
            if idx.len() != dim {
                return Err(Error::DimMismatch(idx.len(), dim));
            }
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFiniteCoefficient(idx));
            }
            let total: usize = idx.iter().map(|&k| k as usize).sum();
            max_degree = max_degree.max(total);
            if a != Complex64::ZERO {
                map.insert(idx, a);
            }
        }
        let coeffs = if dim == 1 {
            let mut dense = vec![Complex64::ZERO; max_degree + 1];
            for (idx, a) in map {
                dense[idx[0] as usize] = a;
            }
            Coeffs::Dense(dense)
        } else {
            Coeffs::Sparse(map)
        };
        Ok(Self {
            dim,
            max_degree,
            coeffs,
        })
    }

    /// The constant function F = 1 (unit norm) in `dim` variables.
    pub fn one(dim: usize) -> Self {
        Self::new(dim, [(vec![0u32; dim], Complex64::ONE)]).expect("constant is valid")
    }

    /// The basis element e_k of one variable.
    pub fn basis_1d(k: usize) -> Self {
        Self::new_1d([(k, Complex64::ONE)]).expect("basis is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Coefficient at a multi-index (zero when absent or out of range).
    pub fn coeff(&self, idx: &[u32]) -> Complex64 {
        match &self.coeffs {
            Coeffs::Dense(v) => {
                let k = idx[0] as usize;
                v.get(k).copied().unwrap_or(Complex64::ZERO)
            }
            Coeffs::Sparse(m) => m.get(idx).copied().unwrap_or(Complex64::ZERO),
        }
    }

    /// Dense degree-indexed coefficients (one variable only).
    pub fn coeffs_1d(&self) -> &[Complex64] {
        match &self.coeffs {
            Coeffs::Dense(v) => v,
            Coeffs::Sparse(_) => panic!("coeffs_1d on a multi-variable function"),
        }
    }

    /// Iterate coefficients in ascending total degree, ties in index order.
    pub fn iter_coeffs(&self) -> Vec<(Vec<u32>, Complex64)> {
        let mut out: Vec<(Vec<u32>, Complex64)> = match &self.coeffs {
            Coeffs::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != Complex64::ZERO)
                .map(|(k, a)| (vec![k as u32], *a))
                .collect(),
            Coeffs::Sparse(m) => m.iter().map(|(k, a)| (k.clone(), *a)).collect(),
        };
        out.sort_by_key(|(idx, _)| (idx.iter().map(|&k| k as usize).sum::<usize>(), idx.clone()));
        out
    }

    /// Squared Fock norm, sum of squared coefficient moduli.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = Kahan::new();
        match &self.coeffs {
            Coeffs::Dense(v) => {
                for a in v {
                    acc.add(a.norm_sqr());
                }
            }
            Coeffs::Sparse(m) => {
                for a in m.values() {
                    acc.add(a.norm_sqr());
                }
            }
        }
        acc.value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Inner product <F, G> = sum a_alpha conj(b_alpha). Degrees may differ.
    pub fn inner(&self, other: &FockFunction) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        let mut re = Kahan::new();
        let mut im = Kahan::new();
        for (idx, a) in self.iter_coeffs() {
            let b = other.coeff(&idx);
            let t = a * b.conj();
            re.add(t.re);
            im.add(t.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Rescale all coefficients by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let entries: Vec<_> = self
            .iter_coeffs()
            .into_iter()
            .map(|(idx, a)| (idx, a * factor))
            .collect();
        Self::new(self.dim, entries).expect("scaling preserves validity")
    }

    /// F / ||F||.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(1.0 / n))
    }

    /// Evaluate F at z, summing basis terms in ascending degree with
    /// compensated accumulation.
    pub fn evaluate(&self, z: &ComplexPoint) -> Complex64 {
        assert_eq!(z.dim(), self.dim, "point dimension mismatch");
        let mut re = Kahan::new();
        let mut im = Kahan::new();
        match &self.coeffs {
            Coeffs::Dense(v) => {
                let z0 = z.0[0];
                // basis value e_k(z) built iteratively: e_0 = 1,
                // e_k = e_{k-1} * z * sqrt(pi/k)
                let mut basis = Complex64::ONE;
                for (k, a) in v.iter().enumerate() {
                    if k > 0 {
                        basis *= z0 * (std::f64::consts::PI / k as f64).sqrt();
                    }
                    if *a != Complex64::ZERO {
                        let t = a * basis;
                        re.add(t.re);
                        im.add(t.im);
                    }
                }
            }
            Coeffs::Sparse(_) => {
                for (idx, a) in self.iter_coeffs() {
                    let t = a * basis_value(&idx, z);
                    re.add(t.re);
                    im.add(t.im);
                }
            }
        }
        Complex64::new(re.value(), im.value())
    }

    /// Weighted density u_F(z) = |F(z)|^2 e^{-pi |z|^2}.
    pub fn density(&self, z: &ComplexPoint) -> f64 {
        let v = self.evaluate(z);
        v.norm_sqr() * (-std::f64::consts::PI * z.norm_sq()).exp()
    }

    /// Evaluate F at a point of C (one variable only).
    pub fn evaluate_1d(&self, z: Complex64) -> Complex64 {
        self.evaluate(&ComplexPoint(vec![z]))
    }

    /// Density at a point of C (one variable only).
    pub fn density_1d(&self, z: Complex64) -> f64 {
        self.density(&ComplexPoint(vec![z]))
    }

    /// First and second complex derivatives of F (one variable only),
    /// using d/dz e_k = sqrt(pi k) e_{k-1}.
    pub fn derivatives_1d(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let v = self.coeffs_1d();
        let pi = std::f64::consts::PI;
        let mut f = Complex64::ZERO;
        let mut f1 = Complex64::ZERO;
        let mut f2 = Complex64::ZERO;
        // running basis values e_k, e_{k-1}, e_{k-2}
        let mut b = Complex64::ONE;
        let mut bm1 = Complex64::ZERO;
        let mut bm2 = Complex64::ZERO;
        for (k, a) in v.iter().enumerate() {
            if k > 0 {
                bm2 = bm1;
                bm1 = b;
                b *= z * (pi / k as f64).sqrt();
            }
            if *a != Complex64::ZERO {
                f += a * b;
                if k >= 1 {
                    f1 += a * (pi * k as f64).sqrt() * bm1;
                }
                if k >= 2 {
                    f2 += a * (pi * k as f64).sqrt() * (pi * (k - 1) as f64).sqrt() * bm2;
                }
            }
        }
        (f, f1, f2)
    }
}

fn basis_value_scalar(k: usize, z: Complex64) -> Complex64 {
    let mut b = Complex64::ONE;
    for j in 1..=k {
        b *= z * (std::f64::consts::PI / j as f64).sqrt();
    }
    b
}

/// e_alpha(z) = (pi^{|alpha|}/alpha!)^{1/2} z^alpha.
pub fn basis_value(idx: &[u32], z: &ComplexPoint) -> Complex64 {
    let mut b = Complex64::ONE;
    for (i, &k) in idx.iter().enumerate() {
        b *= basis_value_scalar(k as usize, z.0[i]);
    }
    b
}

/// Validated construction mirroring the library entry point.
pub fn make_fock(dim: usize, coeffs: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Result<FockFunction> {
    FockFunction::new(dim, coeffs)
}

/// Truncation of the normalized reproducing-kernel element
/// F_{z0}(z) = e^{-pi |z0|^2 / 2} e^{pi z . conj(z0)}, whose coefficient at
/// alpha is e^{-pi |z0|^2 / 2} (pi^{|alpha|}/alpha!)^{1/2} conj(z0)^alpha.
///
/// Fails when the discarded tail mass exceeds `KERNEL_TAIL_TOL`.
pub fn kernel_function(z0: &ComplexPoint, max_degree: usize) -> Result<FockFunction> {
    const KERNEL_TAIL_TOL: f64 = 1e-12;
    let d = z0.dim();
    let x = std::f64::consts::PI * z0.norm_sq();
    // Retained mass is e^{-x} sum_{m<=N} x^m/m!; the tail is the regularized
    // lower gamma P(N+1, x).
    let tail = gamma_p_int(max_degree + 1, x);
    if tail > KERNEL_TAIL_TOL {
        return Err(Error::TailMass {
            tail,
            tol: KERNEL_TAIL_TOL,
            degree: max_degree,
        });
    }
    let amp = (-x / 2.0).exp();
    let mut entries = Vec::new();
    let mut idx = vec![0u32; d];
    loop {
        let total: usize = idx.iter().map(|&k| k as usize).sum();
        if total <= max_degree {
            let mut c = Complex64::new(amp, 0.0);
            for (i, &k) in idx.iter().enumerate() {
                let zc = z0.0[i].conj();
                let k = k as usize;
                c *= zc.powu(k as u32)
                    * (std::f64::consts::PI.powi(k as i32) / factorial(k)).sqrt();
            }
            entries.push((idx.clone(), c));
        }
        // odometer over multi-indices with entries <= max_degree
        let mut i = 0;
        loop {
            if i == d {
                return FockFunction::new(d, entries);
            }
            if (idx[i] as usize) < max_degree {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Smallest truncation degree with kernel tail below 1e-12 at this center.
pub fn kernel_degree_for(z0: &ComplexPoint) -> usize {
    let x = std::f64::consts::PI * z0.norm_sq();
    let mut n = 8usize.max(x.ceil() as usize);
    while gamma_p_int(n + 1, x) > 1e-12 {
        n += 4;
    }
    n
}

// ---------------------------------------------------------------------------
// Text format: header `fock v1 d N`, then one line per coefficient
// `alpha_1 ... alpha_d re im` with 17-significant-digit floats.
// ---------------------------------------------------------------------------

pub fn to_text(f: &FockFunction) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "fock v1 {} {}", f.dim(), f.max_degree());
    for (idx, a) in f.iter_coeffs() {
        for k in &idx {
            let _ = write!(s, "{k} ");
        }
        let _ = writeln!(s, "{:.16e} {:.16e}", a.re, a.im);
    }
    s
}

pub fn from_text(text: &str) -> Result<FockFunction> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format("empty fock file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "fock" || parts[1] != "v1" {
        return Err(Error::Format(format!("bad fock header: {header:?}")));
    }
    let dim: usize = parts[2]
        .parse()
        .map_err(|_| Error::Format("bad dimension in fock header".into()))?;
    let declared_degree: usize = parts[3]
        .parse()
        .map_err(|_| Error::Format("bad degree in fock header".into()))?;
    let mut entries = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != dim + 2 {
            return Err(Error::Format(format!("bad fock coefficient line: {line:?}")));
        }
        let mut idx = Vec::with_capacity(dim);
        for t in &toks[..dim] {
            idx.push(
                t.parse::<u32>()
                    .map_err(|_| Error::Format(format!("bad index in line: {line:?}")))?,
            );
        }
        let re: f64 = toks[dim]
            .parse()
            .map_err(|_| Error::Format(format!("bad real part in line: {line:?}")))?;
        let im: f64 = toks[dim + 1]
            .parse()
            .map_err(|_| Error::Format(format!("bad imaginary part in line: {line:?}")))?;
        entries.push((idx, Complex64::new(re, im)));
    }
    let f = FockFunction::new(dim, entries)?;
    if f.max_degree() > declared_degree {
        return Err(Error::Format(format!(
            "coefficients exceed declared degree {declared_degree}"
        )));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_is_unit_norm() {
        let f = FockFunction::new_1d([(0, Complex64::ONE)]).unwrap();
        assert_eq!(f.norm(), 1.0);
        assert_eq!(f.evaluate_1d(c(0.37, -1.2)), Complex64::ONE);
    }

    #[test]
    fn degree_one_basis_value() {
        // e_1(z) = sqrt(pi) z
        let f = FockFunction::basis_1d(1);
        assert_abs_diff_eq!(f.evaluate_1d(c(1.0, 0.0)).re, PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn two_dim_orthonormality() {
        let f = FockFunction::new(
            2,
            [(vec![1, 0], Complex64::ONE), (vec![0, 1], Complex64::ONE)],
        )
        .unwrap();
        assert_abs_diff_eq!(f.norm(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_bad_dim() {
        let err = FockFunction::new_1d([(1, c(f64::NAN, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteCoefficient(idx) if idx == vec![1]));
        assert!(matches!(
            FockFunction::new(0, [] as [(Vec<u32>, Complex64); 0]),
            Err(Error::InvalidDim(0))
        ));
    }

    /// Independent oracle: direct Horner evaluation over monomials z^k with
    /// explicit factorial normalizations.
    fn eval_oracle_1d(coeffs: &[(usize, Complex64)], z: Complex64) -> Complex64 {
        let deg = coeffs.iter().map(|(k, _)| *k).max().unwrap_or(0);
        let mut mono = vec![Complex64::ZERO; deg + 1];
        for (k, a) in coeffs {
            mono[*k] += a * (PI.powi(*k as i32) / factorial(*k)).sqrt();
        }
        let mut acc = Complex64::ZERO;
        for a in mono.iter().rev() {
            acc = acc * z + a;
        }
        acc
    }

    #[test]
    fn evaluate_matches_horner_oracle() {
        let coeffs = [(0, c(1.0, 0.0)), (2, c(0.3, 0.0))];
        let f = FockFunction::new_1d(coeffs).unwrap();
        let z = c(1.0, 1.0);
        let got = f.evaluate_1d(z);
        let want = eval_oracle_1d(&coeffs, z);
        assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-13);
        assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-13);
    }

    #[test]
    fn density_of_constant() {
        let f = FockFunction::one(1);
        assert_abs_diff_eq!(f.density_1d(c(0.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.density_1d(c(1.0, 0.0)), (-PI).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(f.density_1d(c(0.0, 1.0)), (-PI).exp(), epsilon = 1e-15);
    }

    #[test]
    fn density_max_of_first_mode() {
        // u(z) = pi |z|^2 e^{-pi |z|^2} peaks at pi |z|^2 = 1 with value 1/e
        let f = FockFunction::basis_1d(1);
        let r = (1.0 / PI).sqrt();
        assert_abs_diff_eq!(f.density_1d(c(r, 0.0)), (-1.0f64).exp(), epsilon = 1e-14);
        assert!(f.density_1d(c(r * 1.05, 0.0)) < (-1.0f64).exp());
        assert!(f.density_1d(c(r * 0.95, 0.0)) < (-1.0f64).exp());
    }

    #[test]
    fn orthonormal_inner_products() {
        let e0 = FockFunction::basis_1d(0);
        let e1 = FockFunction::basis_1d(1);
        assert_eq!(e0.inner(&e1).unwrap(), Complex64::ZERO);
        assert_eq!(e1.inner(&e1).unwrap(), Complex64::ONE);
    }

    #[test]
    fn norm_of_quadratic_perturbation() {
        // ||1 + 0.1 z^2||^2 = 1 + 0.01 * 2/pi^2, since ||z^2||^2 = 2!/pi^2
        let a2 = 0.1 * (2.0 / (PI * PI)).sqrt();
        let f = FockFunction::new_1d([(0, Complex64::ONE), (2, c(a2, 0.0))]).unwrap();
        let want = 1.0 + 0.01 * 2.0 / (PI * PI);
        assert_abs_diff_eq!(f.norm_sq(), want, epsilon = 1e-15);
    }

    #[test]
    fn norm_against_gaussian_quadrature() {
        // 2-D quadrature of |1 + 0.1 z^2|^2 e^{-pi|z|^2} over a generous disc
        let a2 = 0.1 * (2.0 / (PI * PI)).sqrt();
        let f = FockFunction::new_1d([(0, Complex64::ONE), (2, c(a2, 0.0))]).unwrap();
        let quad = crate::special::adaptive_simpson(
            &|r: f64| {
                let ang = crate::special::adaptive_simpson(
                    &|t: f64| f.density_1d(Complex64::from_polar(r, t)),
                    0.0,
                    2.0 * PI,
                    1e-12,
                );
                r * ang
            },
            0.0,
            6.0,
            1e-11,
        );
        assert_abs_diff_eq!(quad, f.norm_sq(), epsilon = 1e-8);
    }

    #[test]
    fn inner_dim_mismatch_rejected() {
        let f = FockFunction::one(1);
        let g = FockFunction::one(2);
        assert!(matches!(f.inner(&g), Err(Error::DimMismatch(1, 2))));
    }

    #[test]
    fn kernel_at_origin_is_constant() {
        let k = kernel_function(&ComplexPoint(vec![Complex64::ZERO]), 4).unwrap();
        assert_eq!(k.coeff(&[0]), Complex64::ONE);
        assert_eq!(k.coeff(&[1]), Complex64::ZERO);
    }

    #[test]
    fn kernel_norm_is_one() {
        let k = kernel_function(&ComplexPoint(vec![c(1.0, 0.0)]), 40).unwrap();
        assert_abs_diff_eq!(k.norm(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn kernel_density_peaks_at_center() {
        let z0 = ComplexPoint(vec![c(0.5, -0.25)]);
        let k = kernel_function(&z0, kernel_degree_for(&z0)).unwrap();
        assert_abs_diff_eq!(k.density(&z0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn kernel_rejects_small_degree() {
        let z0 = ComplexPoint(vec![c(3.0, 0.0)]);
        assert!(matches!(
            kernel_function(&z0, 4),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn reproducing_identity_random_battery() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let deg = rng.gen_range(0..10);
            let coeffs: Vec<(usize, Complex64)> = (0..=deg)
                .map(|k| (k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let f = FockFunction::new_1d(coeffs).unwrap();
            let z0 = ComplexPoint(vec![c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))]);
            let kf = kernel_function(&z0, kernel_degree_for(&z0).max(deg)).unwrap();
            let lhs = f.inner(&kf).unwrap();
            let rhs =
                f.evaluate(&z0) * (-std::f64::consts::PI * z0.norm_sq() / 2.0).exp();
            let scale = rhs.norm().max(1e-12);
            assert!(
                (lhs - rhs).norm() / scale < 1e-9,
                "reproducing identity violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn reproducing_identity_specific() {
        // <e_2, K_{z0}> = e_2(z0) e^{-pi |z0|^2 / 2}
        let f = FockFunction::basis_1d(2);
        let z0 = ComplexPoint(vec![c(0.7, 0.2)]);
        let kf = kernel_function(&z0, 40).unwrap();
        let lhs = f.inner(&kf).unwrap();
        let rhs = f.evaluate(&z0) * (-PI * z0.norm_sq() / 2.0).exp();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn pointwise_density_bounded_by_norm() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let coeffs: Vec<(usize, Complex64)> = (0..=8)
                .map(|k| (k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let f = FockFunction::new_1d(coeffs).unwrap();
            let bound = f.norm_sq() * (1.0 + 1e-12);
            for _ in 0..50 {
                let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                assert!(f.density_1d(z) <= bound);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = FockFunction::new_1d([
            (0, c(0.9, 0.1)),
            (1, c(-0.3, 0.2)),
            (3, c(0.5, -0.4)),
        ])
        .unwrap();
        let z = c(0.6, -0.3);
        let h = 1e-5;
        let (_, f1, f2) = f.derivatives_1d(z);
        let fd1 = (f.evaluate_1d(z + c(h, 0.0)) - f.evaluate_1d(z - c(h, 0.0))) / (2.0 * h);
        let fd2 = (f.evaluate_1d(z + c(h, 0.0)) - f.evaluate_1d(z) * 2.0
            + f.evaluate_1d(z - c(h, 0.0)))
            / (h * h);
        assert!((f1 - fd1).norm() < 1e-8);
        assert!((f2 - fd2).norm() < 1e-5);
    }

    #[test]
    fn text_round_trip() {
        let f = FockFunction::new(
            2,
            [
                (vec![0, 0], c(1.0, 0.0)),
                (vec![2, 1], c(0.125, -0.7253848291736452)),
            ],
        )
        .unwrap();
        let text = to_text(&f);
        let g = from_text(&text).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.coeff(&[2, 1]), f.coeff(&[2, 1]));
        assert_eq!(g.coeff(&[0, 0]), f.coeff(&[0, 0]));
    }

    #[test]
    fn text_rejects_corrupt_header() {
        assert!(from_text("fock v2 1 3\n0 1.0 0.0").is_err());
        assert!(from_text("mask v1 1 3").is_err());
        assert!(from_text("").is_err());
    }
}
