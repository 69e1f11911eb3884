//! Rasterization of densities and regions on square grids.
//!
//! The measure model throughout the crate is cell counting: a grid cell
//! belongs to a set when its center does, and the rasterized measure
//! (cell count times exact cell area) is treated as the measure. All
//! downstream inequality checks carry an explicit one-cell slack instead of
//! sub-cell interpolation.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockFunction;
use crate::special::{gamma_q_int, Kahan};

/// Geometry of a square grid: half-width `r`, `n` cells per axis, center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub r: f64,
    pub center: (f64, f64),
}

impl GridSpec {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        Self::with_center(n, r, (0.0, 0.0))
    }

    pub fn with_center(n: usize, r: f64, center: (f64, f64)) -> Result<Self> {
        if n < 64 {
            return Err(Error::GridResolution(n));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::GridHalfWidth(r));
        }
        Ok(Self { n, r, center })
    }

    /// Half-width large enough that a degree-`max_degree` density has
    /// negligible mass outside the window when measures up to `s_max` are
    /// requested.
    pub fn default_half_width(max_degree: usize, s_max: f64) -> f64 {
        ((max_degree as f64 + s_max + 30.0) / std::f64::consts::PI)
            .sqrt()
            .ceil()
    }

    /// Cell side 2r/n.
    pub fn cell_side(&self) -> f64 {
        2.0 * self.r / self.n as f64
    }

    /// Exact cell area (2r/n)^2.
    pub fn cell_area(&self) -> f64 {
        let h = self.cell_side();
        h * h
    }

    /// Total window area (2r)^2.
    pub fn window_area(&self) -> f64 {
        4.0 * self.r * self.r
    }

    /// Center of the cell at column `ix`, row `iy` (both zero-based;
    /// x grows with `ix`, y with `iy`; storage is row-major in `iy`).
    pub fn cell_center(&self, ix: usize, iy: usize) -> Complex64 {
        let h = self.cell_side();
        Complex64::new(
            self.center.0 - self.r + (ix as f64 + 0.5) * h,
            self.center.1 - self.r + (iy as f64 + 0.5) * h,
        )
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }
}

/// Samples of u_F at cell centers, with the exact tail mass of u_F outside
/// the window computed from the coefficients.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub tail_mass: f64,
    pub norm_sq: f64,
    pub source: FockFunction,
}

/// Tolerated tail fraction of the total mass outside the grid window.
pub const GRID_TAIL_TOL: f64 = 1e-6;

/// Sample u_F on the grid. Only one complex variable is supported (grids are
/// two-dimensional). Fails when the exact radial tail bound exceeds
/// `GRID_TAIL_TOL` of the total mass.
pub fn sample_density(f: &FockFunction, spec: GridSpec) -> Result<DensityGrid> {
    if f.dim() != 1 {
        return Err(Error::UnsupportedDim(f.dim(), "grids are d = 1 only"));
    }
    let norm_sq = f.norm_sq();
    if norm_sq <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    // Radius of the largest disc centered at the grid center that fits in the
    // window; mass outside the window is at most the mass outside this disc.
    let shift = (spec.center.0.powi(2) + spec.center.1.powi(2)).sqrt();
    let tail = radial_tail_mass(f, spec.r, shift);
    if tail > GRID_TAIL_TOL * norm_sq {
        let mut r = spec.r;
        while radial_tail_mass(f, r, shift) > GRID_TAIL_TOL * norm_sq {
            r += 1.0;
        }
        return Err(Error::GridTail {
            tail,
            tol: GRID_TAIL_TOL,
            suggested_r: r,
        });
    }
    let n = spec.n;
    let mut values = vec![0.0f64; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(iy, row)| {
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f.density_1d(spec.cell_center(ix, iy));
            }
        });
    Ok(DensityGrid {
        spec,
        values,
        tail_mass: tail,
        norm_sq,
        source: f.clone(),
    })
}

/// Exact mass of u_F outside the disc of radius `r - shift` about the
/// origin: sum |a_k|^2 Q(k+1, pi rho^2), by the radial moment formula for the
/// orthonormal basis.
fn radial_tail_mass(f: &FockFunction, r: f64, shift: f64) -> f64 {
    let rho = (r - shift).max(0.0);
    let x = std::f64::consts::PI * rho * rho;
    let mut acc = Kahan::new();
    for (idx, a) in f.iter_coeffs() {
        let k = idx[0] as usize;
        acc.add(a.norm_sqr() * gamma_q_int(k + 1, x));
    }
    acc.value()
}

impl DensityGrid {
    /// Rasterized total mass: cell area times the sum of samples.
    pub fn total_mass(&self) -> f64 {
        let a = self.spec.cell_area();
        let mut acc = Kahan::new();
        for v in &self.values {
            acc.add(*v);
        }
        a * acc.value()
    }

    /// Midpoint-rule error estimate for integrals of u over cell unions:
    /// (h^2/24) * cell_area * sum |discrete Laplacian| over the region, with
    /// a safety factor. `region` selects cell indices; `None` means all.
    pub fn quadrature_error_estimate(&self, region: Option<&[bool]>) -> f64 {
        let n = self.spec.n;
        let a = self.spec.cell_area();
        let mut acc = Kahan::new();
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                if let Some(mask) = region {
                    if !mask[i] {
                        continue;
                    }
                }
                let c = self.values[i];
                let left = if ix > 0 { self.values[i - 1] } else { c };
                let right = if ix + 1 < n { self.values[i + 1] } else { c };
                let down = if iy > 0 { self.values[i - n] } else { c };
                let up = if iy + 1 < n { self.values[i + n] } else { c };
                acc.add((left + right + up + down - 4.0 * c).abs());
            }
        }
        // discrete Laplacian above is h^2 * Delta u, so the per-cell midpoint
        // error (h^2/24) Delta u * a becomes (a/24) * |stencil|
        3.0 * a / 24.0 * acc.value() + self.tail_mass
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            w,
            "grid v1 {} {:.16e} {:.16e} {:.16e}",
            self.spec.n, self.spec.r, self.spec.center.0, self.spec.center.1
        )?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Read back a density grid written by [`DensityGrid::write_binary`].
/// The source function is not stored in the file, so the caller supplies it.
pub fn read_binary_grid(path: &Path, source: FockFunction) -> Result<DensityGrid> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != "grid" || parts[1] != "v1" {
        return Err(Error::Format(format!("bad grid header: {header:?}")));
    }
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::Format("bad grid resolution".into()))?;
    let rr: f64 = parts[3]
        .parse()
        .map_err(|_| Error::Format("bad grid half-width".into()))?;
    let cx: f64 = parts[4]
        .parse()
        .map_err(|_| Error::Format("bad grid center".into()))?;
    let cy: f64 = parts[5]
        .parse()
        .map_err(|_| Error::Format("bad grid center".into()))?;
    let spec = GridSpec::with_center(n, rr, (cx, cy))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * n * n {
        return Err(Error::Format(format!(
            "grid payload has {} bytes, expected {}",
            bytes.len(),
            8 * n * n
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let norm_sq = source.norm_sq();
    let shift = (cx * cx + cy * cy).sqrt();
    let tail = radial_tail_mass(&source, rr, shift);
    Ok(DensityGrid {
        spec,
        values,
        tail_mass: tail,
        norm_sq,
        source,
    })
}

/// A rasterized measurable set: boolean membership per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub spec: GridSpec,
    pub cells: Vec<bool>,
}

impl RegionMask {
    pub fn from_cells(spec: GridSpec, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != spec.num_cells() {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { spec, cells })
    }

    /// Mask of a predicate on cell centers.
    pub fn from_predicate(spec: GridSpec, pred: impl Fn(Complex64) -> bool) -> Self {
        let n = spec.n;
        let mut cells = vec![false; n * n];
        for iy in 0..n {
            for ix in 0..n {
                cells[iy * n + ix] = pred(spec.cell_center(ix, iy));
            }
        }
        Self { spec, cells }
    }

    /// Disc with a given center and radius.
    pub fn disc(spec: GridSpec, center: Complex64, radius: f64) -> Self {
        Self::from_predicate(spec, |z| (z - center).norm_sqr() < radius * radius)
    }

    /// Disc of a prescribed area.
    pub fn disc_of_area(spec: GridSpec, center: Complex64, area: f64) -> Self {
        Self::disc(spec, center, (area / std::f64::consts::PI).sqrt())
    }

    /// Axis-aligned rectangle given by corner points.
    pub fn rect(spec: GridSpec, x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self::from_predicate(spec, |z| z.re >= x0 && z.re < x1 && z.im >= y0 && z.im < y1)
    }

    /// Centered ellipse with semi-axes `(ax, ay)`.
    pub fn ellipse(spec: GridSpec, center: Complex64, ax: f64, ay: f64) -> Self {
        Self::from_predicate(spec, |z| {
            let dx = (z.re - center.re) / ax;
            let dy = (z.im - center.im) / ay;
            dx * dx + dy * dy < 1.0
        })
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|b| **b).count()
    }

    /// Rasterized measure: count times exact cell area.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.spec.cell_area()
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            w,
            "mask v1 {} {:.16e} {:.16e} {:.16e}",
            self.spec.n, self.spec.r, self.spec.center.0, self.spec.center.1
        )?;
        for iy in 0..self.spec.n {
            let row: String = (0..self.spec.n)
                .map(|ix| {
                    if self.cells[iy * self.spec.n + ix] {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect();
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty mask file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "mask" || parts[1] != "v1" {
            return Err(Error::Format(format!("bad mask header: {header:?}")));
        }
        let n: usize = parts[2]
            .parse()
            .map_err(|_| Error::Format("bad mask resolution".into()))?;
        let r: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Format("bad mask half-width".into()))?;
        let cx: f64 = parts[4]
            .parse()
            .map_err(|_| Error::Format("bad mask center".into()))?;
        let cy: f64 = parts[5]
            .parse()
            .map_err(|_| Error::Format("bad mask center".into()))?;
        let spec = GridSpec::with_center(n, r, (cx, cy))?;
        let mut cells = Vec::with_capacity(n * n);
        for (iy, line) in lines.enumerate() {
            if iy >= n {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Format("mask has too many rows".into()));
            }
            if line.len() != n {
                return Err(Error::Format(format!(
                    "mask row {iy} has {} chars, expected {n}",
                    line.len()
                )));
            }
            for ch in line.chars() {
                match ch {
                    '0' => cells.push(false),
                    '1' => cells.push(true),
                    _ => return Err(Error::Format(format!("bad mask character {ch:?}"))),
                }
            }
        }
        if cells.len() != n * n {
            return Err(Error::Format("mask has too few rows".into()));
        }
        Self::from_cells(spec, cells)
    }
}
