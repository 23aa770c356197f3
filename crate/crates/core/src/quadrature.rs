//! Adaptive Simpson quadrature over a finite interval.
//!
//! The integrand is fallible so callers can reject bad evaluations (e.g. a
//! probability profile leaving [0, 1]) and abort the whole integration.
//!
//! The evaluation counter is threaded through the recursion as a plain
//! `&mut usize` rather than shared with the integrand closure; sharing a
//! `Cell` between the closure and the recursion defeated the budget check
//! under opt-level 3.

/// Relative tolerance used by the range-delay integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Hard cap on integrand evaluations per integration.
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Accumulated Richardson error estimate, in absolute terms.
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// True when the evaluation cap stopped refinement before the tolerance
    /// was met everywhere; `abs_error_estimate` is untrustworthy then.
    pub saturated: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    estimate: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrate `f` over `[a, b]` (requires `a <= b`), subdividing until each
/// panel's Richardson estimate is within its share of `rel_tol * |whole|`
/// or the evaluation budget runs out. The budget is a hard cap apart from
/// the three initial endpoint/midpoint evaluations.
pub fn adaptive_simpson<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<Quadrature, E> {
    assert!(a <= b, "integration bounds must be ordered");
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            saturated: false,
        });
    }

    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let mut evaluations = 3usize;
    let whole = simpson(a, b, fa, fm, fb);
    // Scale the absolute tolerance off the coarse estimate; a zero estimate
    // still terminates because refinement differences are then zero too.
    let abs_tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);

    let root = Panel {
        a,
        b,
        fa,
        fm,
        fb,
        estimate: whole,
    };
    let mut saturated = false;
    let (value, err) = refine(
        &mut f,
        &mut evaluations,
        max_evals,
        root,
        abs_tol,
        MAX_DEPTH,
        &mut saturated,
    )?;

    Ok(Quadrature {
        value,
        abs_error_estimate: err,
        evaluations,
        saturated,
    })
}

fn refine<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    evaluations: &mut usize,
    max_evals: usize,
    panel: Panel,
    abs_tol: f64,
    depth: u32,
    saturated: &mut bool,
) -> Result<(f64, f64), E> {
    let Panel {
        a,
        b,
        fa,
        fm,
        fb,
        estimate,
    } = panel;
    // Respect the hard evaluation cap before touching the integrand.
    if *evaluations + 2 > max_evals {
        *saturated = true;
        return Ok((estimate, 0.0));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    *evaluations += 2;
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    let delta = refined - estimate;

    if delta.abs() <= 15.0 * abs_tol || depth == 0 {
        if delta.abs() > 15.0 * abs_tol {
            *saturated = true;
        }
        // Richardson extrapolation plus its standard error estimate.
        return Ok((refined + delta / 15.0, delta.abs() / 15.0));
    }

    let (lv, le) = refine(
        f,
        evaluations,
        max_evals,
        Panel {
            a,
            b: m,
            fa,
            fm: flm,
            fb: fm,
            estimate: left,
        },
        abs_tol / 2.0,
        depth - 1,
        saturated,
    )?;
    let (rv, re) = refine(
        f,
        evaluations,
        max_evals,
        Panel {
            a: m,
            b,
            fa: fm,
            fm: frm,
            fb,
            estimate: right,
        },
        abs_tol / 2.0,
        depth - 1,
        saturated,
    )?;
    Ok((lv + rv, le + re))
}
