// scratch probe for discretization noise
use fockconc::concentration::*;
use fockconc::fock::FockFunction;
use fockconc::grid::{sample_density, GridSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    // pointwise deviation of sorted samples from the exact gaussian
    // rearrangement e^{-s}
    for n in [512usize, 1024, 2048] {
        let g = sample_density(&FockFunction::one(1), GridSpec::new(n, 4.0).unwrap()).unwrap();
        let p = profile(&g);
        let a = p.cell_area;
        let mut worst: f64 = 0.0;
        let mut worst_s = 0.0;
        let kmax = (8.0 / a) as usize;
        for k in 0..kmax {
            let s_mid = (k as f64 + 0.5) * a;
            let dev = (p.sorted[k] / (-s_mid).exp() - 1.0).abs();
            if dev > worst { worst = dev; worst_s = s_mid; }
        }
        println!("n={n}: max |v_k/e^-s - 1| over s<=8 : {worst:.3e} at s={worst_s:.2} (h={:.3e})", p.cell_area.sqrt());
    }
    // same for perturbation eps=0.2, compare relative gap signal scale 1-T
    for (n, eps) in [(1024usize, 0.2f64), (1024, 0.1), (2048, 0.1)] {
        let a2 = eps * (2.0 / (PI * PI)).sqrt();
        let f = FockFunction::new_1d([(0, Complex64::ONE), (2, Complex64::new(a2, 0.0))])
            .unwrap().normalized().unwrap();
        let g = sample_density(&f, GridSpec::new(n, 4.0).unwrap()).unwrap();
        let p = profile(&g);
        println!("n={n} eps={eps}: 1-T = {:.4e}, s* = {:?}", 1.0 - p.t_normalized(), p.s_star);
    }
}
