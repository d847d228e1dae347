//! Leftmost root of a sampled function: a uniform scan for a small sample
//! or a sign change, then bisection inside the first bracket.

/// Outcome of [`leftmost_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scan {
    /// Leftmost qualifying point and the function value there. The value is
    /// within the tolerance unless the bracket straddled a jump.
    Root { x: f64, value: f64 },
    /// Every sample is below the tolerance in magnitude.
    Flat,
    /// No sample is small and the sign never changes.
    NoBracket { min: f64, max: f64 },
}

/// Scan `samples` interior points of `(lo, hi)`, one cell away from each
/// end, for the leftmost point where `|g| <= tol` or where `g` changes sign,
/// and refine a sign change by bisection down to adjacent doubles.
pub fn leftmost_root<E>(
    mut g: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    samples: usize,
    tol: f64,
) -> Result<Scan, E> {
    let samples = samples.max(1);
    let cell = (hi - lo) / (samples + 1) as f64;
    let mut points = Vec::with_capacity(samples);
    for i in 1..=samples {
        let x = lo + i as f64 * cell;
        points.push((x, g(x)?));
    }
    if points.iter().all(|&(_, v)| v.abs() < tol) {
        return Ok(Scan::Flat);
    }
    for (i, &(x, v)) in points.iter().enumerate() {
        if v.abs() <= tol {
            return Ok(Scan::Root { x, value: v });
        }
        if let Some(&(x1, v1)) = points.get(i + 1) {
            if v1.abs() > tol && v.signum() != v1.signum() {
                let (x, value) = bisect(&mut g, (x, v), (x1, v1))?;
                return Ok(Scan::Root { x, value });
            }
        }
    }
    let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Scan::NoBracket { min, max })
}

fn bisect<E>(
    g: &mut impl FnMut(f64) -> Result<f64, E>,
    mut lo: (f64, f64),
    mut hi: (f64, f64),
) -> Result<(f64, f64), E> {
    loop {
        let mid = lo.0 + (hi.0 - lo.0) / 2.0;
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let v = g(mid)?;
        if v == 0.0 {
            return Ok((mid, v));
        }
        if v.signum() == lo.1.signum() {
            lo = (mid, v);
        } else {
            hi = (mid, v);
        }
    }
    Ok(if lo.1.abs() <= hi.1.abs() { lo } else { hi })
}
