use kg_sharp::kernel::*;
use kg_sharp::quadrature::*;

fn main() {
    let s = Mass::new(1.0);
    let f = |r: f64| (-r).exp();
    let r1 = 7.05f64;
    let quarter = QuadratureConfig { rel_tol: 0.25e-10, abs_tol: 0.25e-14, ..Default::default() };
    // integrate err(r2) over r2 on a fine grid (trapezoid)
    let n = 3000;
    let hi = 40.0;
    let h = hi / n as f64;
    let mut aux = 0.0;
    let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
    for j in 0..=n {
        let r2 = j as f64 * h;
        let rc = integrate_axis(
            |c| {
                let v1 = f(r1); let v2 = f(r2);
                let pp = phi(s, r1) * phi(s, r2);
                let base = pp - r1 * r2 * c;
                let num = (base - 1.0).max(0.0);
                let k = num.powf(0.5) / (base + 1.0).sqrt();
                v1*v1*v2*v2*pp*k*r1.powi(2)*r2.powi(2)
            },
            &AxisSpec::finite(-1.0, 1.0),
            &quarter,
        ).unwrap();
        aux += rc.error_estimate * h;
        let relv = rc.error_estimate / rc.value.abs().max(1e-300);
        if rc.error_estimate > worst.1 { worst = (r2, rc.error_estimate, relv); }
    }
    println!("aux integral ~ {aux:.3e}; worst slice at r2={:.3} err={:.3e} rel={:.3e}", worst.0, worst.1, worst.2);
}
