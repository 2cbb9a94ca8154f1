//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= abs_tol || depth >= MAX_DEPTH {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * abs_tol, depth + 1) + adapt(f, mid, b, 0.5 * abs_tol, depth + 1)
}

/// ∫ₐᵇ f to roughly `rel_tol` relative accuracy.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (rough, _) = gk15(&f, a, b);
    let abs_tol = (rel_tol * rough.abs()).max(f64::MIN_POSITIVE);
    adapt(&f, a, b, abs_tol, 0)
}

/// ∫₀^∞ f via x = scale·t/(1−t); `scale` should sit near where f lives.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, scale: f64, rel_tol: f64) -> f64 {
    let mapped = |t: f64| {
        let u = 1.0 - t;
        let x = scale * t / u;
        let value = f(x) * scale / (u * u);
        if value.is_finite() {
            value
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, rel_tol)
}
