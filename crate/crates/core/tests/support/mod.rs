//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library except through the values it checks.

#![allow(dead_code)]

/// Values evaluated once with mpmath at 40 significant digits, rounded to
/// the nearest double and frozen.
pub mod frozen {
    /// `nu(2) = 2 / (3 * 5^{3/2})`.
    pub const NU_2: f64 = 0.05962847939999439;
    pub const T1_2: f64 = 1975.9326509920838;
    pub const T2_2: f64 = 2538.402836752384;
    pub const TSTAR_2: f64 = 2538.447558111934;
    pub const TSTAR_5: f64 = 192018.50131631296;

    /// `(L, T*(L))` for `L = 2, 4, ..., 1024`.
    pub const TSTAR_POWERS_OF_TWO: [(f64, f64); 10] = [
        (2.0, 2538.447558111934),
        (4.0, 62514.9450953058),
        (8.0, 2154607.8427898637),
        (16.0, 79658649.97477028),
        (32.0, 2945371868.809743),
        (64.0, 107441053162.4466),
        (128.0, 3864913863309.577),
        (256.0, 137378430378736.81),
        (512.0, 4834941505288349.0),
        (1024.0, 1.687642551536923e17),
    ];

    /// `int_0^{1/2} [(1+2e)^{3/2} + (1-2e)^{3/2} - 2] / e^2 de`, checked by
    /// two quadratures at 400 digits and by integration by parts.
    pub const KISELEV: f64 = 1.540185602628932;
}

/// Scalar Dormand-Prince 5(4) with standard step-size control. Returns the
/// state at each requested time, which must be increasing.
pub fn dopri45<F: Fn(f64, f64) -> f64>(f: F, t0: f64, y0: f64, outputs: &[f64], rtol: f64, atol: f64) -> Vec<f64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut out = Vec::with_capacity(outputs.len());
    let (mut t, mut y) = (t0, y0);
    let mut h: f64 = 1e-3;
    for &target in outputs {
        while t < target {
            let step = h.min(target - t);
            let mut k = [0.0; 7];
            for s in 0..7 {
                let ys = y + step * (0..s).map(|i| A[s][i] * k[i]).sum::<f64>();
                k[s] = f(t + C[s] * step, ys);
            }
            let y5 = y + step * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
            let y4 = y + step * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
            let err = (y5 - y4).abs() / (atol + rtol * y.abs().max(y5.abs()));
            if err <= 1.0 {
                t += step;
                y = y5;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (step * factor).max(1e-12);
        }
        out.push(y);
    }
    out
}

/// `nu(L)` written out directly.
pub fn nu(l: f64) -> f64 {
    l / (3.0 * (l * l + 1.0).powf(1.5))
}

/// Right-hand side of the clock ODE written from its three-branch definition.
pub fn clock_rhs(l: f64, j: f64) -> f64 {
    let n = nu(l);
    let j = j.max(0.0);
    if j > n / 2.0 {
        -n * n / l * j
    } else if j > n.powi(4) / 8.0 {
        -n.powi(3) / (2.0 * l)
    } else {
        -n.powf(5.0 / 3.0) / l * j.cbrt()
    }
}

/// Composite Simpson rule with `2 m` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// The symbol constant `c` of the linearised operator computed without
/// Bessel functions: in polar coordinates around `k = e1`,
/// `c = int_0^{2 pi} |cos th| dth * int_0^inf (1 - cos u) / u^2 du`.
pub fn kernel_constant_oracle() -> f64 {
    let angular = simpson(|th: f64| th.cos().abs(), 0.0, 2.0 * std::f64::consts::PI, 40_000);
    let upper = 400.0 * std::f64::consts::PI;
    let g = |u: f64| {
        if u < 1e-4 {
            0.5 - u * u / 24.0
        } else {
            let s = (0.5 * u).sin();
            2.0 * s * s / (u * u)
        }
    };
    let body = simpson(g, 0.0, upper, 400_000);
    // int_U^inf (1 - cos u)/u^2 = 1/U - int_U^inf cos u / u^2, and the last
    // term is sin U / U^2 up to O(U^{-3}); sin U = 0 at this U.
    angular * (body + 1.0 / upper)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
