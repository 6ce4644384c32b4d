//! One-dimensional numerical integration.
//!
//! The workhorse is a globally adaptive 15-point Gauss–Kronrod scheme in the
//! QUADPACK mold: integrate each panel with the 7/15 pair, keep a worklist
//! ordered by error estimate, and bisect the worst panel until the global
//! tolerance is met. [`gauss_legendre`] supplies fixed nodes for callers that
//! build their own composite grids.

use crate::error::{Error, Result};
use crate::real::{real, Real};

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<R> {
    pub value: R,
    /// Conservative estimate of the absolute error.
    pub abs_error: R,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
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
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel<R> {
    a: R,
    b: R,
    value: R,
    error: R,
    resabs: R,
}

/// Single 15-point Kronrod pass over `[a, b]`.
/// Returns `(value, error_estimate, resabs)`; errors out on non-finite
/// integrand values.
fn kronrod15<R: Real>(f: &mut dyn FnMut(R) -> R, a: R, b: R) -> Result<(R, R, R)> {
    let half = real::<R>(0.5);
    let centre = (a + b) * half;
    let hlgth = (b - a) * half;
    let abs_hlgth = hlgth.abs();

    let mut eval = |x: R| -> Result<R> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand {
                at: x.to_f64().unwrap_or(f64::NAN),
            })
        }
    };

    let fc = eval(centre)?;
    let mut resg = fc * real::<R>(WG[3]);
    let mut resk = fc * real::<R>(WGK[7]);
    let mut resabs = fc.abs() * real::<R>(WGK[7]);
    let mut fv1 = [R::zero(); 7];
    let mut fv2 = [R::zero(); 7];

    for j in 0..7 {
        let absc = hlgth * real::<R>(XGK[j]);
        let f1 = eval(centre - absc)?;
        let f2 = eval(centre + absc)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let fsum = f1 + f2;
        let wk = real::<R>(WGK[j]);
        resk = resk + wk * fsum;
        resabs = resabs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg = resg + real::<R>(WG[j / 2]) * fsum;
        }
    }

    let reskh = resk * half;
    let mut resasc = real::<R>(WGK[7]) * (fc - reskh).abs();
    for j in 0..7 {
        resasc = resasc + real::<R>(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let value = resk * hlgth;
    let resabs = resabs * abs_hlgth;
    let resasc = resasc * abs_hlgth;
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc > R::zero() && err > R::zero() {
        let scale = (real::<R>(200.0) * err / resasc).powf(real::<R>(1.5));
        err = if scale < R::one() { resasc * scale } else { resasc };
    }
    let floor = real::<R>(50.0) * R::epsilon() * resabs;
    if floor > R::zero() {
        err = err.max(floor);
    }
    Ok((value, err, resabs))
}

const MAX_PANELS: usize = 512;
// Blind adaptive runs start from this many equal panels so that features much
// narrower than the interval still register in some initial error estimate.
const INITIAL_PANELS: usize = 4;

/// Adaptively integrate `f` over `[a, b]` until the summed error estimate
/// drops below `max(abs_tol, rel_tol * |value|)` or hits the roundoff floor
/// `50 * eps * ∫|f|`, beyond which further bisection cannot help.
pub fn integrate<R: Real>(
    mut f: impl FnMut(R) -> R,
    a: R,
    b: R,
    rel_tol: R,
    abs_tol: R,
) -> Result<QuadResult<R>> {
    if a == b {
        return Ok(QuadResult {
            value: R::zero(),
            abs_error: R::zero(),
            evaluations: 0,
        });
    }
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let width = (b - a) / real::<R>(INITIAL_PANELS as f64);
    for i in 0..INITIAL_PANELS {
        let pa = a + width * real::<R>(i as f64);
        let pb = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + width * real::<R>((i + 1) as f64)
        };
        let (value, error, resabs) = kronrod15(&mut f, pa, pb)?;
        panels.push(Panel {
            a: pa,
            b: pb,
            value,
            error,
            resabs,
        });
    }
    let mut evaluations = 15 * INITIAL_PANELS;

    loop {
        let mut total = R::zero();
        let mut total_err = R::zero();
        let mut total_resabs = R::zero();
        let mut worst = 0usize;
        let mut worst_err = R::neg_infinity();
        for (i, p) in panels.iter().enumerate() {
            total = total + p.value;
            total_err = total_err + p.error;
            total_resabs = total_resabs + p.resabs;
            if p.error > worst_err {
                worst_err = p.error;
                worst = i;
            }
        }
        let roundoff_floor = real::<R>(50.0) * R::epsilon() * total_resabs;
        let target = abs_tol.max(rel_tol * total.abs()).max(roundoff_floor);
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: total_err,
                evaluations,
            });
        }

        let stalled = {
            let p = &panels[worst];
            let mid = (p.a + p.b) * real::<R>(0.5);
            !(p.a < mid && mid < p.b)
        };
        if panels.len() >= MAX_PANELS || stalled {
            let p = &panels[worst];
            return Err(Error::Quadrature {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
                value: total.to_f64().unwrap_or(f64::NAN),
                error: total_err.to_f64().unwrap_or(f64::NAN),
                worst_a: p.a.to_f64().unwrap_or(f64::NAN),
                worst_b: p.b.to_f64().unwrap_or(f64::NAN),
                worst_error: p.error.to_f64().unwrap_or(f64::NAN),
            });
        }

        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = (pa + pb) * real::<R>(0.5);
        let (v1, e1, r1) = kronrod15(&mut f, pa, mid)?;
        let (v2, e2, r2) = kronrod15(&mut f, mid, pb)?;
        evaluations += 30;
        panels.push(Panel {
            a: pa,
            b: mid,
            value: v1,
            error: e1,
            resabs: r1,
        });
        panels.push(Panel {
            a: mid,
            b: pb,
            value: v2,
            error: e2,
            resabs: r2,
        });
    }
}

/// Integrate across known structural breakpoints: the interval is split at
/// every interior point of `cuts` and each piece integrated independently
/// (the absolute tolerance is shared out among the pieces).
pub fn integrate_with_breakpoints<R: Real>(
    mut f: impl FnMut(R) -> R,
    a: R,
    b: R,
    cuts: &[R],
    rel_tol: R,
    abs_tol: R,
) -> Result<QuadResult<R>> {
    let mut edges: Vec<R> = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    for &c in cuts {
        if c > a && c < b {
            edges.push(c);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).expect("breakpoints must be comparable"));
    edges.dedup();

    let pieces = real::<R>((edges.len() - 1) as f64);
    let mut value = R::zero();
    let mut abs_error = R::zero();
    let mut evaluations = 0usize;
    for pair in edges.windows(2) {
        let r = integrate(&mut f, pair[0], pair[1], rel_tol, abs_tol / pieces)?;
        value = value + r.value;
        abs_error = abs_error + r.abs_error;
        evaluations += r.evaluations;
    }
    Ok(QuadResult {
        value,
        abs_error,
        evaluations,
    })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre<R: Real>(n: usize) -> (Vec<R>, Vec<R>) {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![R::zero(); n];
    let mut weights = vec![R::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = real::<R>((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
        let mut dp = R::zero();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x = x - step;
            if step.abs() <= R::epsilon() * x.abs().max(R::one()) {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        let w = real::<R>(2.0) / ((R::one() - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = real::<R>(k as f64);
        let p2 = ((real::<R>(2.0) * kf - R::one()) * x * p1 - (kf - R::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (p0, R::zero());
    }
    let nf = real::<R>(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - R::one());
    (p1, dp)
}
