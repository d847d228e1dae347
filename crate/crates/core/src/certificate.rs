//! The point `xi` in `E = -f''''(xi) (b - a)^5 / 2880`.
//!
//! The true error `E` always comes from a reference integral minus the
//! Simpson value, never from the error formula itself. The required
//! fourth-derivative value follows from `E`, and a grid scan plus bisection
//! locates the leftmost interior point attaining it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::poly::{moment_integral, Interval};
use crate::quadrature::{precise_reference, true_error, CompensatedSum, QuadratureError};
use crate::roots::{leftmost_root, Scan};

/// Interior samples scanned by [`find_xi`].
pub const DEFAULT_SAMPLES: usize = 1024;

/// Default tolerance on `|f''''(xi) - target|`, relative to `1 + |target|`.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("reference integral: {0}")]
    Reference(QuadratureError),
    #[error("simpson value: {0}")]
    Simpson(QuadratureError),
    #[error("fourth derivative: {0}")]
    Derivative(#[from] EvalError),
    #[error(
        "no point of ({a:?}, {b:?}) has f'''' = {target:?}: sampled f'''' lies in [{min:?}, {max:?}] \
         (the error is inconsistent with f, usually a poor reference integral)"
    )]
    NoBracket { a: f64, b: f64, target: f64, min: f64, max: f64 },
    #[error("bisection stopped at x = {x:?} with |f'''' - target| = {residual:?} > {tol:?}; f'''' jumps there")]
    NotConverged { x: f64, residual: f64, tol: f64 },
    #[error("panel count must be at least 1")]
    ZeroPanels,
}

/// A located mean-value point for one Simpson panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub xi: f64,
    /// Required fourth-derivative value `4! E / ∫ x p = -2880 E / (b - a)^5`.
    pub target: f64,
    /// `|f''''(xi) - target|`.
    pub residual: f64,
    #[serde(rename = "E")]
    pub error: f64,
    pub a: f64,
    pub b: f64,
    /// The target was met at every sample, so `xi` is the midpoint by
    /// convention.
    pub degenerate: bool,
}

impl ErrorCertificate {
    pub fn interval(&self) -> Interval {
        Interval::new(self.a, self.b).expect("certificate interval was validated")
    }
}

/// Mean-value point for the composite rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeCertificate {
    pub per_panel: Vec<ErrorCertificate>,
    /// Average of the per-panel targets; the panels have equal widths.
    pub mean_target: f64,
    pub global_xi: f64,
    pub global_residual: f64,
    /// Sum of the per-panel errors.
    #[serde(rename = "E")]
    pub error: f64,
    pub a: f64,
    pub b: f64,
    pub degenerate: bool,
}

/// The fourth-derivative value `4! E / ∫_a^b x p(x) dx` that `f''''(xi)` must
/// take.
pub fn xi_target(error: f64, iv: &Interval) -> f64 {
    let target = 24.0 * error / moment_integral(iv);
    debug_assert!(
        (target - xi_target_closed_form(error, iv)).abs() <= 1e-12 * target.abs(),
        "target forms disagree on {iv}"
    );
    target
}

/// `-2880 E / (b - a)^5`, the same value through the closed form of `∫ x p`.
pub fn xi_target_closed_form(error: f64, iv: &Interval) -> f64 {
    -2880.0 * error / iv.width().powi(5)
}

/// Leftmost `xi` in `(a, b)` with `|f4(xi) - target| <= tol`, from
/// [`DEFAULT_SAMPLES`] interior samples and bisection.
///
/// `f4` must be continuous on `(a, b)`; this is sampled, not proven. The
/// certificate's error field is derived from the target.
pub fn find_xi(
    f4: impl FnMut(f64) -> Result<f64, EvalError>,
    target: f64,
    iv: &Interval,
    tol: f64,
) -> Result<ErrorCertificate, CertificateError> {
    find_xi_with_samples(f4, target, iv, tol, DEFAULT_SAMPLES)
}

pub fn find_xi_with_samples(
    mut f4: impl FnMut(f64) -> Result<f64, EvalError>,
    target: f64,
    iv: &Interval,
    tol: f64,
    samples: usize,
) -> Result<ErrorCertificate, CertificateError> {
    let (a, b) = (iv.a(), iv.b());
    let scan = leftmost_root(|x| f4(x).map(|v| v - target), a, b, samples, tol)?;
    let (xi, residual, degenerate) = match scan {
        Scan::Root { x, value } if value.abs() <= tol => (x, value.abs(), false),
        Scan::Root { x, value } => return Err(CertificateError::NotConverged { x, residual: value.abs(), tol }),
        Scan::Flat => {
            let c = iv.midpoint();
            (c, (f4(c)? - target).abs(), true)
        }
        Scan::NoBracket { min, max } => {
            return Err(CertificateError::NoBracket { a, b, target, min: min + target, max: max + target })
        }
    };
    let error = target * moment_integral(iv) / 24.0;
    Ok(ErrorCertificate { xi, target, residual, error, a, b, degenerate })
}

fn fourth_derivative(e: &Expr) -> impl Fn(f64) -> Result<f64, EvalError> + '_ {
    move |x| Ok(e.eval_jet4(x)?.derivative(4))
}

/// Certificate for the single-panel rule on `iv`: reference integral, true
/// error, target, then [`find_xi`] with tolerance `rel_tol * (1 + |target|)`.
pub fn certify_single(e: &Expr, iv: &Interval, rel_tol: f64) -> Result<ErrorCertificate, CertificateError> {
    let reference = precise_reference(e, iv).map_err(CertificateError::Reference)?;
    let result = true_error(e, iv, 1, &reference).map_err(CertificateError::Simpson)?;
    let target = xi_target(result.error, iv);
    let tol = rel_tol * (1.0 + target.abs());
    let mut cert = find_xi(fourth_derivative(e), target, iv, tol)?;
    cert.error = result.error;
    cert.residual = (e.eval_jet4(cert.xi)?.derivative(4) - target).abs();
    Ok(cert)
}

/// Per-panel certificates plus one global point where `f''''` equals the
/// mean of the panel targets, which exists by the intermediate value
/// property of derivatives.
pub fn certify_composite(
    e: &Expr,
    iv: &Interval,
    panels: usize,
    rel_tol: f64,
) -> Result<CompositeCertificate, CertificateError> {
    if panels == 0 {
        return Err(CertificateError::ZeroPanels);
    }
    let edges = iv.panel_edges(panels);
    let per_panel = edges
        .windows(2)
        .map(|w| {
            let panel = Interval::new(w[0], w[1]).map_err(|_| CertificateError::ZeroPanels)?;
            certify_single(e, &panel, rel_tol)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean_target = per_panel.iter().map(|c| c.target).collect::<CompensatedSum>().total() / panels as f64;
    let error = per_panel.iter().map(|c| c.error).collect::<CompensatedSum>().total();
    let tol = rel_tol * (1.0 + mean_target.abs());
    let global = find_xi(fourth_derivative(e), mean_target, iv, tol)?;
    Ok(CompositeCertificate {
        mean_target,
        global_xi: global.xi,
        global_residual: global.residual,
        error,
        a: iv.a(),
        b: iv.b(),
        degenerate: global.degenerate,
        per_panel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use proptest::prelude::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn certify(text: &str, a: f64, b: f64) -> ErrorCertificate {
        certify_single(&parse(text).unwrap(), &Interval::new(a, b).unwrap(), DEFAULT_REL_TOL).unwrap()
    }

    #[test]
    fn target_examples() {
        assert_eq!(xi_target(-1.0 / 120.0, &unit()), 24.0);
        assert_eq!(xi_target(0.0, &Interval::new(-3.0, 7.0).unwrap()), 0.0);
        assert!((xi_target(-1.0 / 48.0, &unit()) - 60.0).abs() <= 1e-13);
    }

    #[test]
    fn find_xi_examples() {
        let cert = find_xi(|x| Ok(120.0 * x), 60.0, &unit(), 1e-10).unwrap();
        assert!((cert.xi - 0.5).abs() <= 1e-10);
        assert!(!cert.degenerate);

        let cert = find_xi(|_| Ok(24.0), 24.0, &unit(), 1e-10).unwrap();
        assert!(cert.degenerate);
        assert_eq!(cert.xi, 0.5);
        assert_eq!(cert.residual, 0.0);

        let target = 1.668451442537477;
        let cert = find_xi(|x| Ok(x.exp()), target, &unit(), 1e-10).unwrap();
        assert!((cert.xi - target.ln()).abs() <= 1e-10);
        assert!((cert.xi - 0.5118959163210042).abs() <= 1e-9);
    }

    #[test]
    fn missing_bracket_reports_the_sampled_range() {
        match find_xi(|x| Ok(x.exp()), 10.0, &unit(), 1e-10).unwrap_err() {
            CertificateError::NoBracket { min, max, target, .. } => {
                assert_eq!(target, 10.0);
                assert!(min > 1.0 && min < 1.01, "{min}");
                assert!(max < std::f64::consts::E && max > 2.7, "{max}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certify_single_examples() {
        let cert = certify("x^4", 0.0, 1.0);
        assert!(cert.degenerate);
        assert!((cert.target - 24.0).abs() <= 1e-12, "{}", cert.target);
        assert_eq!(cert.xi, 0.5);

        let cert = certify("x^3", 0.0, 1.0);
        assert_eq!(cert.error, 0.0);
        assert_eq!(cert.target, 0.0);
        assert!(cert.degenerate);

        let cert = certify("x^5", 0.0, 1.0);
        assert!((cert.target - 60.0).abs() <= 1e-12);
        assert!((cert.xi - 0.5).abs() <= 1e-10);

        let pi = std::f64::consts::PI;
        let cert = certify("sin(x)", 0.0, pi);
        assert!((cert.error - (2.0 - 2.0 * pi / 3.0)).abs() <= 1e-14, "{}", cert.error);
        assert!(0.0 < cert.xi && cert.xi < pi);
        assert!(cert.residual <= 1e-9);

        let cert = certify("exp(x)", 0.0, 1.0);
        assert!((cert.error / -5.793234175477351e-4 - 1.0).abs() <= 1e-10, "{}", cert.error);
        assert!((cert.xi - 0.5118959163210042).abs() <= 1e-8, "{}", cert.xi);
    }

    #[test]
    fn certify_composite_examples() {
        let e = parse("x^4").unwrap();
        let cert = certify_composite(&e, &unit(), 2, DEFAULT_REL_TOL).unwrap();
        assert!(cert.per_panel.iter().all(|c| (c.target - 24.0).abs() <= 1e-10 && c.degenerate));
        assert!((cert.mean_target - 24.0).abs() <= 1e-10);
        assert!(cert.degenerate);

        let e = parse("x^5").unwrap();
        let cert = certify_composite(&e, &unit(), 2, DEFAULT_REL_TOL).unwrap();
        assert!((cert.per_panel[0].xi - 0.25).abs() <= 1e-9);
        assert!((cert.per_panel[1].xi - 0.75).abs() <= 1e-9);
        assert!((cert.global_xi - 0.5).abs() <= 1e-9);

        let e = parse("exp(x)").unwrap();
        let cert = certify_composite(&e, &unit(), 4, DEFAULT_REL_TOL).unwrap();
        assert!(0.0 < cert.global_xi && cert.global_xi < 1.0);
        assert!(cert.global_residual <= DEFAULT_REL_TOL * (1.0 + cert.mean_target));
        // Composite error formula at the global point.
        let want = -cert.global_xi.exp() / (2880.0 * 4f64.powi(4));
        assert!((cert.error / want - 1.0).abs() <= 1e-8, "{} vs {want}", cert.error);

        assert_eq!(certify_composite(&e, &unit(), 0, 1e-10).unwrap_err(), CertificateError::ZeroPanels);
    }

    #[test]
    fn stage_errors_are_labelled() {
        let e = parse("log(x)").unwrap();
        let err = certify_single(&e, &unit(), DEFAULT_REL_TOL).unwrap_err();
        assert!(matches!(err, CertificateError::Reference(_)));
        assert!(err.to_string().starts_with("reference integral: domain error at x = 0"));
    }

    #[test]
    fn json_field_names() {
        let cert = certify("x^5", 0.0, 1.0);
        let value = serde_json::to_value(cert).unwrap();
        let mut keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["E", "a", "b", "degenerate", "residual", "target", "xi"]);
    }

    const FUNCTIONS: [&str; 4] = ["x^5", "sin(x)", "exp(x)", "1/(1+x^2)"];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn target_forms_agree(error in -1e3f64..1e3, a in -50.0f64..50.0, w in 1e-3f64..50.0) {
            let iv = Interval::new(a, a + w).unwrap();
            let (one, two) = (xi_target(error, &iv), xi_target_closed_form(error, &iv));
            prop_assert!((one - two).abs() <= 1e-12 * one.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn certificates_satisfy_the_error_identity(which in 0usize..4, a in -2.0f64..2.0, w in 0.2f64..2.0) {
            let iv = Interval::new(a, a + w).unwrap();
            let e = parse(FUNCTIONS[which]).unwrap();
            let cert = certify_single(&e, &iv, DEFAULT_REL_TOL).unwrap();
            let tol = DEFAULT_REL_TOL * (1.0 + cert.target.abs());
            let cell = w / (DEFAULT_SAMPLES + 1) as f64;
            prop_assert!(iv.a() + cell * (1.0 - 1e-9) <= cert.xi && cert.xi <= iv.b() - cell * (1.0 - 1e-9));
            prop_assert!(cert.residual <= tol);
            let f4 = e.eval_jet4(cert.xi).unwrap().derivative(4);
            let scale = iv.width().powi(5) / 2880.0;
            // The identity holds to the certificate tolerance plus the rounding of E itself.
            prop_assert!((-f4 * scale - cert.error).abs() <= tol * scale + 1e-15 * (1.0 + cert.error.abs()) * 8.0);
        }

        #[test]
        fn affine_reparametrization_keeps_certificates_valid(
            which in 1usize..4, s in 0.5f64..2.0, t in -1.0f64..1.0,
        ) {
            // g(x) = f(s x + t) on [(a - t)/s, (b - t)/s] with a = 0, b = 1.
            let template = ["u^5", "sin(u)", "exp(u)", "1/(1+u^2)"][which];
            let text = template.replace('u', &format!("({s}*x + {t})"));
            let g = parse(&text).unwrap();
            let iv = Interval::new(-t / s, (1.0 - t) / s).unwrap();
            let cert = certify_single(&g, &iv, DEFAULT_REL_TOL).unwrap();
            prop_assert!(cert.residual <= DEFAULT_REL_TOL * (1.0 + cert.target.abs()));
            prop_assert!(iv.a() < cert.xi && cert.xi < iv.b());
            if which == 2 {
                // f'''' = exp is monotone, so the point is unique and maps back.
                let f = certify("exp(x)", 0.0, 1.0);
                prop_assert!((cert.xi - (f.xi - t) / s).abs() <= 1e-6, "{} vs {}", cert.xi, (f.xi - t) / s);
            }
        }
    }
}
