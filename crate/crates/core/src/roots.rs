//! Bracketing root search.

/// Illinois variant of regula falsi on `[a, b]` with `f(a)`, `f(b)` of opposite
/// signs. Stops when the bracket is narrower than `tol`; every fourth step is
/// a plain bisection so the bracket always shrinks geometrically.
///
/// Returns the midpoint of the final bracket and the number of evaluations.
pub fn illinois<F, E>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> Result<(f64, usize), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    debug_assert!(fa.signum() != fb.signum());
    let mut evals = 0;
    let mut side = 0i8;
    while (b - a).abs() > tol && evals < 200 {
        let c = if evals % 4 == 3 {
            0.5 * (a + b)
        } else {
            let c = (a * fb - b * fa) / (fb - fa);
            if c.is_finite() && c > a.min(b) && c < a.max(b) {
                c
            } else {
                0.5 * (a + b)
            }
        };
        let fc = f(c)?;
        evals += 1;
        if fc == 0.0 {
            return Ok((c, evals));
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok((0.5 * (a + b), evals))
}
