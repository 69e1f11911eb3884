//! Set-level geometry on rasterized regions: symmetric differences, the
//! Fraenkel asymmetry (normalized distance to an equal-measure ball),
//! boundary extraction of analytic level sets as polar graphs, and
//! star-shapedness / convexity diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, RegionMask};

/// Measure of the symmetric difference of two masks over one grid.
pub fn symdiff_measure(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch);
    }
    let count = a
        .cells
        .iter()
        .zip(&b.cells)
        .filter(|(x, y)| x != y)
        .count();
    Ok(count as f64 * a.spec.cell_area())
}

/// Result of the asymmetry search: the minimizing ball center and the fixed
/// radius, plus the discretization slack (one boundary band of cells).
#[derive(Debug, Clone)]
pub struct AsymmetryReport {
    pub a: f64,
    pub center: Complex64,
    pub radius: f64,
    pub slack: f64,
}

/// Fraenkel asymmetry: A = min over centers of |Omega (+) B(x, r)| / |Omega|
/// with r fixed by area. The center search runs a coarse scan over the
/// mask's bounding box followed by compass pattern search down to 1e-3 of a
/// cell side.
pub fn fraenkel_asymmetry(mask: &RegionMask) -> Result<AsymmetryReport> {
    let count = mask.count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let spec = mask.spec;
    let n = spec.n;
    let area = mask.measure();
    let radius = (area / std::f64::consts::PI).sqrt();
    let cell = spec.cell_side();

    let mask_cells: Vec<(usize, usize)> = (0..n * n)
        .filter(|&i| mask.cells[i])
        .map(|i| (i % n, i / n))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(ix, iy) in &mask_cells {
        let z = spec.cell_center(ix, iy);
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }

    let symdiff_with_ball = |c: Complex64| -> f64 {
        let r2 = radius * radius;
        // |Omega \ B|
        let mut cells = 0usize;
        for &(ix, iy) in &mask_cells {
            if (spec.cell_center(ix, iy) - c).norm_sqr() >= r2 {
                cells += 1;
            }
        }
        // |B \ Omega| over the ball's bounding rows/cols
        let h = spec.cell_side();
        let to_index = |coord: f64, lo: f64| -> isize { ((coord - lo) / h - 0.5).round() as isize };
        let lo_x = spec.center.0 - spec.r;
        let lo_y = spec.center.1 - spec.r;
        let ix0 = to_index(c.re - radius, lo_x).max(0) as usize;
        let ix1 = (to_index(c.re + radius, lo_x) + 1).clamp(0, n as isize) as usize;
        let iy0 = to_index(c.im - radius, lo_y).max(0) as usize;
        let iy1 = (to_index(c.im + radius, lo_y) + 1).clamp(0, n as isize) as usize;
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                if (spec.cell_center(ix, iy) - c).norm_sqr() < r2 && !mask.cells[iy * n + ix] {
                    cells += 1;
                }
            }
        }
        cells as f64 * spec.cell_area()
    };

    // coarse scan
    let mut best_c = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let mut best = symdiff_with_ball(best_c);
    let coarse = 12usize;
    for iy in 0..=coarse {
        for ix in 0..=coarse {
            let c = Complex64::new(
                x0 + (x1 - x0) * ix as f64 / coarse as f64,
                y0 + (y1 - y0) * iy as f64 / coarse as f64,
            );
            let v = symdiff_with_ball(c);
            if v < best {
                best = v;
                best_c = c;
            }
        }
    }
    // compass pattern search
    let mut step = cell.max((x1 - x0).max(y1 - y0) / coarse as f64);
    let target = 1e-3 * cell;
    while step > target {
        let mut improved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let c = best_c + Complex64::new(dx, dy);
            let v = symdiff_with_ball(c);
            if v < best {
                best = v;
                best_c = c;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    // slack: one band of boundary cells of the comparison ball
    let boundary_cells = (2.0 * std::f64::consts::PI * radius / cell).ceil() + 4.0;
    let slack = 2.0 * boundary_cells * spec.cell_area() / area;
    Ok(AsymmetryReport {
        a: (best / area).clamp(0.0, 2.0),
        center: best_c,
        radius,
        slack,
    })
}

/// Polar graph of a level curve of the analytic density: radii r(theta) at
/// uniform angles about `center`.
#[derive(Debug, Clone)]
pub struct BoundaryGraph {
    pub center: Complex64,
    pub thetas: Vec<f64>,
    pub radii: Vec<f64>,
    /// true where the ray crossed the level more than once
    pub multi_crossing: Vec<bool>,
}

/// Shape diagnostics of a boundary graph.
#[derive(Debug, Clone, Copy)]
pub struct ShapeReport {
    pub star_shaped: bool,
    pub convex: bool,
    /// minimum normalized cross product of consecutive polygon edges
    pub min_turn: f64,
}

/// Trace the level curve u_F = level with `m` rays from `center`, locating
/// the outermost crossing on each ray by bisection on the analytic density
/// (tolerance 1e-10) and flagging rays that cross more than once.
pub fn boundary_graph(
    grid: &DensityGrid,
    level: f64,
    center: Complex64,
    m: usize,
) -> Result<BoundaryGraph> {
    let f = &grid.source;
    let r_max = grid.spec.r
        - ((center.re - grid.spec.center.0).abs()).max((center.im - grid.spec.center.1).abs());
    let step = grid.spec.cell_side().min(r_max / 64.0);
    let mut thetas = Vec::with_capacity(m);
    let mut radii = Vec::with_capacity(m);
    let mut multi = Vec::with_capacity(m);
    for j in 0..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let dir = Complex64::from_polar(1.0, theta);
        let val = |r: f64| f.density_1d(center + dir * r) - level;
        // march outward collecting sign-change brackets
        let mut brackets: Vec<(f64, f64)> = Vec::new();
        let mut r_prev = 0.0f64;
        let mut v_prev = val(0.0);
        let mut r = step;
        while r <= r_max {
            let v = val(r);
            if v_prev > 0.0 && v <= 0.0 || v_prev <= 0.0 && v > 0.0 {
                brackets.push((r_prev, r));
            }
            r_prev = r;
            v_prev = v;
            r += step;
        }
        let Some(&(mut lo, mut hi)) = brackets.last() else {
            return Err(Error::NoCrossing { theta });
        };
        // bisect the outermost bracket
        for _ in 0..200 {
            if hi - lo <= 1e-10 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if (val(mid) > 0.0) == (val(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        thetas.push(theta);
        radii.push(0.5 * (lo + hi));
        multi.push(brackets.len() > 1);
    }
    Ok(BoundaryGraph {
        center,
        thetas,
        radii,
        multi_crossing: multi,
    })
}

/// Star-shapedness and convexity of the traced curve. Convexity is decided
/// by the turning sign of the closed polygon through the ray points; the
/// verdict carries the angular resolution of the graph.
pub fn shape_checks(g: &BoundaryGraph) -> ShapeReport {
    let m = g.radii.len();
    assert!(m >= 64, "need at least 64 rays for shape checks");
    let star_shaped = !g.multi_crossing.iter().any(|&b| b);
    let pts: Vec<Complex64> = g
        .thetas
        .iter()
        .zip(&g.radii)
        .map(|(&t, &r)| g.center + Complex64::from_polar(r, t))
        .collect();
    let mut min_turn = f64::INFINITY;
    for j in 0..m {
        let p0 = pts[j];
        let p1 = pts[(j + 1) % m];
        let p2 = pts[(j + 2) % m];
        let e0 = p1 - p0;
        let e1 = p2 - p1;
        let cross = e0.re * e1.im - e0.im * e1.re;
        let scale = e0.norm() * e1.norm();
        if scale > 0.0 {
            min_turn = min_turn.min(cross / scale);
        }
    }
    ShapeReport {
        star_shaped,
        convex: star_shaped && min_turn >= 0.0,
        min_turn,
    }
}

/// CSV rows `theta,r` for a boundary graph.
pub fn boundary_to_csv(g: &BoundaryGraph) -> String {
    let mut s = String::from("theta,r\n");
    for (t, r) in g.thetas.iter().zip(&g.radii) {
        s.push_str(&format!("{t:.16e},{r:.16e}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{kernel_function, FockFunction};
    use crate::grid::{sample_density, GridSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn symdiff_basics() {
        let spec = GridSpec::new(256, 4.0).unwrap();
        let a = RegionMask::disc(spec, Complex64::ZERO, 0.8);
        assert_eq!(symdiff_measure(&a, &a).unwrap(), 0.0);
        let b = RegionMask::disc(spec, Complex64::new(2.5, 0.0), 0.5);
        let direct = symdiff_measure(&a, &b).unwrap();
        assert_abs_diff_eq!(direct, a.measure() + b.measure(), epsilon = 1e-12);
    }

    #[test]
    fn symdiff_nested_discs_is_annulus() {
        let spec = GridSpec::new(512, 4.0).unwrap();
        let outer = RegionMask::disc_of_area(spec, Complex64::ZERO, 1.0);
        let inner = RegionMask::disc_of_area(spec, Complex64::ZERO, 0.5);
        let d = symdiff_measure(&outer, &inner).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 6.0 * spec.cell_side());
    }

    #[test]
    fn asymmetry_of_disc_is_tiny() {
        let spec = GridSpec::new(512, 4.0).unwrap();
        let mask = RegionMask::disc_of_area(spec, Complex64::new(0.4, -0.3), 1.0);
        let rep = fraenkel_asymmetry(&mask).unwrap();
        assert!(rep.a <= rep.slack, "A = {}, slack = {}", rep.a, rep.slack);
        assert!((rep.center - Complex64::new(0.4, -0.3)).norm() < 0.05);
    }

    #[test]
    fn asymmetry_of_far_discs_is_one() {
        let spec = GridSpec::new(768, 6.0).unwrap();
        let d1 = RegionMask::disc_of_area(spec, Complex64::new(-5.0, 0.0), 0.5);
        let d2 = RegionMask::disc_of_area(spec, Complex64::new(5.0, 0.0), 0.5);
        let cells = d1
            .cells
            .iter()
            .zip(&d2.cells)
            .map(|(a, b)| *a || *b)
            .collect();
        let mask = RegionMask::from_cells(spec, cells).unwrap();
        let rep = fraenkel_asymmetry(&mask).unwrap();
        assert_abs_diff_eq!(rep.a, 1.0, epsilon = 3.0 * rep.slack + 0.02);
    }

    #[test]
    fn asymmetry_matches_fine_center_grid_oracle() {
        // brute-force center search at 4x finer stride over the bounding box
        let spec = GridSpec::new(256, 3.0).unwrap();
        let mask = RegionMask::rect(spec, -0.5, 0.5, -0.5, 0.5);
        let rep = fraenkel_asymmetry(&mask).unwrap();
        let radius = (mask.measure() / PI).sqrt();
        let r2 = radius * radius;
        let eval = |c: Complex64| -> f64 {
            let mut cells = 0usize;
            let n = spec.n;
            for iy in 0..n {
                for ix in 0..n {
                    let z = spec.cell_center(ix, iy);
                    let in_ball = (z - c).norm_sqr() < r2;
                    if in_ball != mask.cells[iy * n + ix] {
                        cells += 1;
                    }
                }
            }
            cells as f64 * spec.cell_area() / mask.measure()
        };
        let mut best = f64::INFINITY;
        let fine = 48;
        for iy in 0..=fine {
            for ix in 0..=fine {
                let c = Complex64::new(
                    -0.6 + 1.2 * ix as f64 / fine as f64,
                    -0.6 + 1.2 * iy as f64 / fine as f64,
                );
                best = best.min(eval(c));
            }
        }
        assert!(
            rep.a <= best + 1e-9,
            "pattern search A = {} worse than oracle {}",
            rep.a,
            best
        );
        assert_abs_diff_eq!(rep.a, best, epsilon = 0.02);
    }

    #[test]
    fn asymmetry_translation_invariance() {
        let spec = GridSpec::new(512, 4.0).unwrap();
        let m1 = RegionMask::rect(spec, -0.5, 0.5, -0.25, 0.25);
        let m2 = RegionMask::rect(spec, 0.5, 1.5, -1.25, -0.75);
        let a1 = fraenkel_asymmetry(&m1).unwrap().a;
        let a2 = fraenkel_asymmetry(&m2).unwrap().a;
        assert_abs_diff_eq!(a1, a2, epsilon = 5e-3);
    }

    #[test]
    fn gaussian_level_curve_is_a_circle() {
        let f = FockFunction::one(1);
        let g = sample_density(&f, GridSpec::new(256, 4.0).unwrap()).unwrap();
        let graph = boundary_graph(&g, (-1.0f64).exp(), Complex64::ZERO, 128).unwrap();
        let want = (1.0 / PI).sqrt();
        for r in &graph.radii {
            assert_abs_diff_eq!(*r, want, epsilon = 1e-9);
        }
        let rep = shape_checks(&graph);
        assert!(rep.star_shaped);
        assert!(rep.convex);
        assert!(rep.min_turn > 0.0);
    }

    #[test]
    fn translated_kernel_level_curve_is_same_circle() {
        let z0 = Complex64::new(0.5, 0.0);
        let f = kernel_function(&z0.into(), 40).unwrap();
        let g = sample_density(&f, GridSpec::new(256, 4.0).unwrap()).unwrap();
        let graph = boundary_graph(&g, (-1.0f64).exp(), z0, 128).unwrap();
        let want = (1.0 / PI).sqrt();
        for r in &graph.radii {
            assert_abs_diff_eq!(*r, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn perturbed_level_radius_matches_scalar_bisection_oracle() {
        let a2 = 0.05 * (2.0 / (PI * PI)).sqrt();
        let f = FockFunction::new_1d([
            (0, Complex64::ONE),
            (2, Complex64::new(a2, 0.0)),
        ])
        .unwrap()
        .normalized()
        .unwrap();
        let norm_sq_raw = 1.0 + 0.05f64.powi(2) * 2.0 / (PI * PI);
        let g = sample_density(&f, GridSpec::new(256, 4.0).unwrap()).unwrap();
        let level = 0.95 * (-1.0f64).exp();
        let graph = boundary_graph(&g, level, Complex64::ZERO, 128).unwrap();
        // oracle at theta = 0: u(r) = |1 + 0.05 r^2|^2 e^{-pi r^2} / ||.||^2
        let u = |r: f64| (1.0 + 0.05 * r * r).powi(2) * (-PI * r * r).exp() / norm_sq_raw;
        let mut lo = 0.5f64;
        let mut hi = 3.0f64;
        assert!(u(lo) > level && u(hi) < level);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if u(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(graph.radii[0], 0.5 * (lo + hi), epsilon = 1e-8);
    }

    #[test]
    fn percolated_curve_detected_as_nonconvex() {
        // r(theta) = 1 + 0.5 cos(3 theta): curvature changes sign (checked by
        // a dense sampling oracle below), so the polygon test must flag it
        let m = 256;
        let thetas: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let radii: Vec<f64> = thetas.iter().map(|t| 1.0 + 0.5 * (3.0 * t).cos()).collect();
        let graph = BoundaryGraph {
            center: Complex64::ZERO,
            thetas,
            radii,
            multi_crossing: vec![false; m],
        };
        let rep = shape_checks(&graph);
        assert!(rep.star_shaped);
        assert!(!rep.convex);
        // dense-sampling oracle: signed curvature r^2 + 2 r'^2 - r r''
        let mut sign_pos = false;
        let mut sign_neg = false;
        for j in 0..4096 {
            let t = 2.0 * PI * j as f64 / 4096.0;
            let r = 1.0 + 0.5 * (3.0 * t).cos();
            let r1 = -1.5 * (3.0 * t).sin();
            let r2 = -4.5 * (3.0 * t).cos();
            let curv = r * r + 2.0 * r1 * r1 - r * r2;
            if curv > 0.0 {
                sign_pos = true;
            } else {
                sign_neg = true;
            }
        }
        assert!(sign_pos && sign_neg, "oracle: curvature must change sign");
    }

    #[test]
    fn perturbed_superlevel_set_is_convex_in_small_deficit_regime() {
        let a2 = 0.05 * (2.0 / (PI * PI)).sqrt();
        let f = FockFunction::new_1d([
            (0, Complex64::ONE),
            (2, Complex64::new(a2, 0.0)),
        ])
        .unwrap()
        .normalized()
        .unwrap();
        let g = sample_density(&f, GridSpec::new(256, 4.0).unwrap()).unwrap();
        let p = crate::concentration::profile(&g);
        let level = p.u_star(1.0);
        let graph = boundary_graph(&g, level, p.argmax, 128).unwrap();
        let rep = shape_checks(&graph);
        assert!(rep.star_shaped);
        assert!(rep.convex, "min_turn = {}", rep.min_turn);
    }

    #[test]
    fn ray_without_crossing_is_rejected() {
        let f = FockFunction::one(1);
        let g = sample_density(&f, GridSpec::new(256, 4.0).unwrap()).unwrap();
        // level above the maximum: no crossing anywhere
        assert!(matches!(
            boundary_graph(&g, 1.5, Complex64::ZERO, 64),
            Err(Error::NoCrossing { .. })
        ));
    }
}
