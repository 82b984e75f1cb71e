#![allow(dead_code)]

use lanesim::{
    Boundary, Cfl, CflMode, Config, Flux, Grid, InitialCondition, Kernel, KernelFamily, Law, Model, RunConfig, Source,
};
use rand::Rng;

/// Kernel densities written out independently of the library.
pub fn kernel_density(family: KernelFamily, nu: f64, x: f64) -> f64 {
    match family {
        KernelFamily::ConstantForward if (0.0..=nu).contains(&x) => 1.0 / nu,
        KernelFamily::LinearForward if (0.0..=nu).contains(&x) => 2.0 * (nu - x) / (nu * nu),
        KernelFamily::LinearSymmetric if x.abs() <= nu => (nu - x.abs()) / (nu * nu),
        KernelFamily::ConstantSymmetric if x.abs() <= nu => 1.0 / (2.0 * nu),
        _ => 0.0,
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    step(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// `γ_h` as the integral of the kernel over cell `h`, split at the kink.
pub fn gamma_oracle(family: KernelFamily, nu: f64, dx: f64, h: i64) -> f64 {
    let (a, b) = (h as f64 * dx, (h + 1) as f64 * dx);
    let f = |x: f64| kernel_density(family, nu, x);
    if a < 0.0 && b > 0.0 {
        integrate(&f, a, 0.0, 1e-15) + integrate(&f, 0.0, b, 1e-15)
    } else {
        integrate(&f, a, b, 1e-15)
    }
}

/// The scalar Godunov flux from the exact Riemann solution of a concave flux.
pub fn riemann_flux(f: &dyn Fn(f64) -> f64, theta: f64, u: f64, w: f64) -> f64 {
    if u <= w {
        f(u).min(f(w))
    } else if w <= theta && theta <= u {
        f(theta)
    } else {
        f(u).max(f(w))
    }
}

pub fn random_law(rng: &mut impl Rng) -> Law {
    if rng.gen_bool(0.3) {
        Law::Quadratic
    } else {
        Law::linear(rng.gen_range(0.25..3.0))
    }
}

pub fn random_kernel(rng: &mut impl Rng, dx: f64, forward_only: bool, max_cells: usize) -> Kernel {
    let families: &[KernelFamily] = if forward_only {
        &[KernelFamily::ConstantForward, KernelFamily::LinearForward]
    } else {
        &KernelFamily::ALL
    };
    let family = families[rng.gen_range(0..families.len())];
    let cells = rng.gen_range(1..=max_cells);
    Kernel::new(family, cells as f64 * dx).unwrap()
}

/// Cell values in `[0, 1]` with plateaus at the extremes and rough patches.
pub fn random_cells(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(1..=20).min(n - out.len());
        match rng.gen_range(0..4) {
            0 => out.extend(std::iter::repeat(0.0).take(len)),
            1 => out.extend(std::iter::repeat(1.0).take(len)),
            2 => {
                let v = rng.gen::<f64>();
                out.extend(std::iter::repeat(v).take(len));
            }
            _ => out.extend((0..len).map(|_| rng.gen::<f64>())),
        }
    }
    out
}

/// An admissible configuration with random lanes, kernels, laws and data.
pub fn random_config(rng: &mut impl Rng) -> Config {
    let dx = 0.01;
    let n = rng.gen_range(60..=200);
    let m = rng.gen_range(1..=3);
    let boundary = if rng.gen_bool(0.5) {
        Boundary::ZeroPad
    } else {
        Boundary::Periodic
    };
    let grid = Grid::new(0.0, n as f64 * dx, dx).unwrap().with_boundary(boundary);
    let flux = if rng.gen_bool(0.5) {
        Flux::LocalGodunov
    } else {
        Flux::NonlocalDownstream(random_kernel(rng, dx, true, n / 3))
    };
    let source = if rng.gen_bool(0.25) {
        Source::Local
    } else {
        Source::new_nonlocal(random_kernel(rng, dx, false, n / 6))
    };
    let mut cfl = if rng.gen_bool(0.5) {
        Cfl::adaptive()
    } else {
        Cfl::fixed()
    };
    if cfl.mode == CflMode::Fixed && rng.gen_bool(0.5) {
        cfl.cfl_cap = rng.gen_range(0.1..0.5);
    }
    RunConfig {
        name: "random".into(),
        grid,
        t_final: 1.0,
        velocity: Model::new((0..m).map(|_| random_law(rng)).collect()),
        flux,
        source,
        cfl,
        initial: InitialCondition::Cells((0..m).map(|_| random_cells(rng, n)).collect()),
        snapshot_times: vec![],
        series_every: 1,
        enforce_support_margin: false,
        output_dir: None,
    }
}
