//! Problem data: exponents, reaction catalogue, domain catalogue, and
//! distance geometry shared by every other module.
//!
//! The equation solved throughout is
//! `-div(|∇u|^(p-2)∇u) + θ|∇u|^q = u^(-γ) + f(u)` with zero Dirichlet data,
//! on a closed catalogue of domains for which the distance function and the
//! inward direction from the nearest boundary point are available in closed
//! form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reaction term f(u). Restricted to variants that are locally Lipschitz on
/// any bounded range and serializable from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReactionSpec {
    Zero,
    Constant(f64),
    /// c0 + c1 * u
    Affine(f64, f64),
    /// coeffs[k] * u^k, ascending powers
    Polynomial(Vec<f64>),
}

impl ReactionSpec {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ReactionSpec::Zero => 0.0,
            ReactionSpec::Constant(c0) => *c0,
            ReactionSpec::Affine(c0, c1) => c0 + c1 * u,
            ReactionSpec::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * u + ck),
        }
    }

    /// df/du, used by the Newton linearization.
    pub fn deriv(&self, u: f64) -> f64 {
        match self {
            ReactionSpec::Zero | ReactionSpec::Constant(_) => 0.0,
            ReactionSpec::Affine(_, c1) => *c1,
            ReactionSpec::Polynomial(c) => {
                let mut acc = 0.0;
                for (k, ck) in c.iter().enumerate().skip(1).rev() {
                    acc = acc * u + (k as f64) * ck;
                }
                acc
            }
        }
    }

    /// True when f(s) > 0 for every s > 0 can be guaranteed from the
    /// coefficients alone (used by the symmetry hypothesis check).
    pub fn provably_positive(&self) -> bool {
        match self {
            ReactionSpec::Zero => false,
            ReactionSpec::Constant(c0) => *c0 > 0.0,
            ReactionSpec::Affine(c0, c1) => *c0 > 0.0 && *c1 >= 0.0,
            ReactionSpec::Polynomial(c) => {
                !c.is_empty() && c[0] > 0.0 && c.iter().skip(1).all(|ck| *ck >= 0.0)
            }
        }
    }

    fn all_finite(&self) -> bool {
        match self {
            ReactionSpec::Zero => true,
            ReactionSpec::Constant(c0) => c0.is_finite(),
            ReactionSpec::Affine(c0, c1) => c0.is_finite() && c1.is_finite(),
            ReactionSpec::Polynomial(c) => c.iter().all(|ck| ck.is_finite()),
        }
    }
}

/// Domain catalogue. All variants have the unique-nearest-point property off
/// an explicitly flagged tie set, with closed-form distance and inward maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    /// (0, r)
    Interval { r: f64 },
    /// {r1 < |x| < r2} in dimension `dim`, solved radially
    Annulus { r1: f64, r2: f64, dim: usize },
    /// {|x| < r} in dimension `dim`, solved radially
    Ball { r: f64, dim: usize },
    /// (-a/2, a/2) x (-b/2, b/2)
    Rectangle { a: f64, b: f64 },
    /// {|x| < r} in the plane, solved on a polar grid
    Disk { r: f64 },
}

impl DomainSpec {
    /// Spatial dimension of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Annulus { dim, .. } | DomainSpec::Ball { dim, .. } => *dim,
            DomainSpec::Rectangle { .. } | DomainSpec::Disk { .. } => 2,
        }
    }

    /// True when the problem reduces to a one-dimensional radial profile.
    pub fn is_radial_1d(&self) -> bool {
        matches!(
            self,
            DomainSpec::Interval { .. } | DomainSpec::Annulus { .. } | DomainSpec::Ball { .. }
        )
    }

    /// Radial coordinate range [lo, hi] for the 1d/radial variants, with the
    /// flags telling which ends carry a Dirichlet boundary.
    pub fn radial_range(&self) -> Option<(f64, f64, bool, bool)> {
        match self {
            DomainSpec::Interval { r } => Some((0.0, *r, true, true)),
            DomainSpec::Annulus { r1, r2, .. } => Some((*r1, *r2, true, true)),
            DomainSpec::Ball { r, .. } => Some((0.0, *r, false, true)),
            _ => None,
        }
    }

    /// Weight exponent k in the radial measure r^k dr (0 for an interval).
    pub fn radial_weight_exponent(&self) -> f64 {
        match self {
            DomainSpec::Interval { .. } => 0.0,
            DomainSpec::Annulus { dim, .. } | DomainSpec::Ball { dim, .. } => (*dim - 1) as f64,
            DomainSpec::Rectangle { .. } | DomainSpec::Disk { .. } => 0.0,
        }
    }

    /// Largest distance-to-boundary over the domain.
    pub fn inradius(&self) -> f64 {
        match self {
            DomainSpec::Interval { r } => r / 2.0,
            DomainSpec::Annulus { r1, r2, .. } => (r2 - r1) / 2.0,
            DomainSpec::Ball { r, .. } | DomainSpec::Disk { r } => *r,
            DomainSpec::Rectangle { a, b } => a.min(*b) / 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDomain(msg));
        match self {
            DomainSpec::Interval { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return bad(format!("interval length must be positive, got {r}"));
                }
            }
            DomainSpec::Annulus { r1, r2, dim } => {
                if !(r1.is_finite() && r2.is_finite() && *r1 > 0.0 && r2 > r1) {
                    return bad(format!("annulus needs 0 < r1 < r2, got r1={r1}, r2={r2}"));
                }
                if *dim < 1 {
                    return bad("annulus dimension must be >= 1".into());
                }
            }
            DomainSpec::Ball { r, dim } => {
                if !(r.is_finite() && *r > 0.0) {
                    return bad(format!("ball radius must be positive, got {r}"));
                }
                if *dim < 1 {
                    return bad("ball dimension must be >= 1".into());
                }
            }
            DomainSpec::Rectangle { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return bad(format!("rectangle sides must be positive, got {a} x {b}"));
                }
            }
            DomainSpec::Disk { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return bad(format!("disk radius must be positive, got {r}"));
                }
            }
        }
        Ok(())
    }
}

/// The full problem tuple (p, γ, q, θ, f, Ω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub p: f64,
    pub gamma: f64,
    pub q: f64,
    pub theta: f64,
    pub reaction: ReactionSpec,
    pub domain: DomainSpec,
}

impl ProblemSpec {
    /// Shorthand for the gradient-free, reaction-free problem.
    pub fn plain(p: f64, gamma: f64, domain: DomainSpec) -> Self {
        ProblemSpec {
            p,
            gamma,
            q: 1.0,
            theta: 0.0,
            reaction: ReactionSpec::Zero,
            domain,
        }
    }
}

/// Singular regime of the reaction u^(-γ). Exactly one holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    GammaAbove1,
    GammaEqual1,
    GammaBelow1,
}

impl Regime {
    pub fn classify(gamma: f64) -> Regime {
        if gamma > 1.0 {
            Regime::GammaAbove1
        } else if gamma == 1.0 {
            Regime::GammaEqual1
        } else {
            Regime::GammaBelow1
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::GammaAbove1 => write!(f, "gamma>1"),
            Regime::GammaEqual1 => write!(f, "gamma==1"),
            Regime::GammaBelow1 => write!(f, "gamma<1"),
        }
    }
}

/// A problem that passed `validate_problem`, with its regime resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedProblem {
    pub spec: ProblemSpec,
    pub regime: Regime,
}

impl ValidatedProblem {
    /// Boundary-layer exponent m = p/(γ+p-1); the rate of Hölder decay for
    /// γ >= 1 and the regularized trace exponent in every regime.
    pub fn layer_exponent(&self) -> f64 {
        self.spec.p / (self.spec.gamma + self.spec.p - 1.0)
    }
}

/// Checks every structural constraint on the tuple and classifies the
/// singular regime for downstream dispatch.
pub fn validate_problem(spec: &ProblemSpec) -> Result<ValidatedProblem> {
    let ProblemSpec {
        p, gamma, q, theta, ..
    } = *spec;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent(format!("p must satisfy p > 1, got {p}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidExponent(format!(
            "gamma must satisfy gamma > 0, got {gamma}"
        )));
    }
    if !(q.is_finite() && q > 0.0 && q <= p) {
        return Err(Error::InvalidExponent(format!(
            "q must satisfy 0 < q <= p, got q={q}, p={p}"
        )));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidExponent(format!(
            "theta must satisfy theta >= 0, got {theta}"
        )));
    }
    if !spec.reaction.all_finite() {
        return Err(Error::InvalidExponent(
            "reaction coefficients must be finite".into(),
        ));
    }
    spec.domain.validate()?;
    Ok(ValidatedProblem {
        spec: spec.clone(),
        regime: Regime::classify(gamma),
    })
}

/// Distance to the boundary plus the unit inward direction η(x) from the
/// nearest boundary point x̂, i.e. η = (x - x̂)/|x - x̂|.
#[derive(Debug, Clone, PartialEq)]
pub struct DistInward {
    pub d: f64,
    pub eta: Vec<f64>,
    /// Set when x is equidistant from two boundary components (medial axis);
    /// the returned eta is then the deterministic choice documented per
    /// domain: the component with the smaller coordinate or radius.
    pub tie: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Evaluates (d_Ω(x), η(x)) for a point strictly inside the domain.
///
/// Radial domains accept either a full point of the ambient dimension or the
/// one-dimensional radial shorthand `[r]`.
pub fn distance_and_inward(domain: &DomainSpec, x: &[f64]) -> Result<DistInward> {
    domain.validate()?;
    match domain {
        DomainSpec::Interval { r } => {
            if x.len() != 1 {
                return Err(Error::WrongDimension {
                    expected: 1,
                    got: x.len(),
                });
            }
            let t = x[0];
            if t <= 0.0 || t >= *r {
                return Err(Error::OutsideDomain);
            }
            let (dl, dr) = (t, r - t);
            if dl < dr {
                Ok(DistInward { d: dl, eta: vec![1.0], tie: false })
            } else if dr < dl {
                Ok(DistInward { d: dr, eta: vec![-1.0], tie: false })
            } else {
                // midpoint: pick the component with the smaller coordinate
                Ok(DistInward { d: dl, eta: vec![1.0], tie: true })
            }
        }
        DomainSpec::Annulus { r1, r2, dim } => {
            let rad = radial_coordinate(x, *dim)?;
            if rad <= *r1 || rad >= *r2 {
                return Err(Error::OutsideDomain);
            }
            let unit = radial_unit(x, rad, *dim);
            let (di, do_) = (rad - r1, r2 - rad);
            if di < do_ {
                Ok(DistInward { d: di, eta: unit, tie: false })
            } else if do_ < di {
                Ok(DistInward { d: do_, eta: unit.iter().map(|v| -v).collect(), tie: false })
            } else {
                // equidistant: pick the inner circle (smaller radius)
                Ok(DistInward { d: di, eta: unit, tie: true })
            }
        }
        DomainSpec::Ball { r, dim } => {
            let rad = radial_coordinate(x, *dim)?;
            if rad >= *r {
                return Err(Error::OutsideDomain);
            }
            if rad == 0.0 {
                // every boundary point is nearest; deterministic choice -e1
                let mut eta = vec![0.0; x.len().max(1)];
                eta[0] = -1.0;
                return Ok(DistInward { d: *r, eta, tie: true });
            }
            let unit = radial_unit(x, rad, *dim);
            Ok(DistInward {
                d: r - rad,
                eta: unit.iter().map(|v| -v).collect(),
                tie: false,
            })
        }
        DomainSpec::Rectangle { a, b } => {
            if x.len() != 2 {
                return Err(Error::WrongDimension { expected: 2, got: x.len() });
            }
            let (ha, hb) = (a / 2.0, b / 2.0);
            if x[0].abs() >= ha || x[1].abs() >= hb {
                return Err(Error::OutsideDomain);
            }
            let dx = ha - x[0].abs();
            let dy = hb - x[1].abs();
            let ex = vec![-x[0].signum_or_positive(), 0.0];
            let ey = vec![0.0, -x[1].signum_or_positive()];
            if dx < dy {
                Ok(DistInward { d: dx, eta: ex, tie: false })
            } else if dy < dx {
                Ok(DistInward { d: dy, eta: ey, tie: false })
            } else {
                // corner diagonal: prefer the first-coordinate side
                Ok(DistInward { d: dx, eta: ex, tie: true })
            }
        }
        DomainSpec::Disk { r } => distance_and_inward(&DomainSpec::Ball { r: *r, dim: 2 }, x),
    }
}

trait SignumOrPositive {
    fn signum_or_positive(self) -> f64;
}

impl SignumOrPositive for f64 {
    /// signum with 0 mapped to +1 so eta stays a unit vector on the axes.
    fn signum_or_positive(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

fn radial_coordinate(x: &[f64], dim: usize) -> Result<f64> {
    if x.len() == 1 {
        if x[0] < 0.0 {
            return Err(Error::OutsideDomain);
        }
        Ok(x[0])
    } else if x.len() == dim {
        Ok(norm(x))
    } else {
        Err(Error::WrongDimension { expected: dim, got: x.len() })
    }
}

fn radial_unit(x: &[f64], rad: f64, _dim: usize) -> Vec<f64> {
    if x.len() == 1 {
        vec![1.0]
    } else {
        x.iter().map(|v| v / rad).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, gamma: f64, q: f64, theta: f64, domain: DomainSpec) -> ProblemSpec {
        ProblemSpec {
            p,
            gamma,
            q,
            theta,
            reaction: ReactionSpec::Zero,
            domain,
        }
    }

    #[test]
    fn validates_reference_problem() {
        let v = validate_problem(&spec(2.0, 3.0, 1.0, 0.0, DomainSpec::Interval { r: 1.0 }))
            .unwrap();
        assert_eq!(v.regime, Regime::GammaAbove1);
        assert!((v.layer_exponent() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let err = validate_problem(&spec(1.0, 3.0, 1.0, 0.0, DomainSpec::Interval { r: 1.0 }))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidExponent(_)));
    }

    #[test]
    fn classifies_gamma_equal_one() {
        let v = validate_problem(&spec(2.0, 1.0, 2.0, 1.0, DomainSpec::Disk { r: 1.0 })).unwrap();
        assert_eq!(v.regime, Regime::GammaEqual1);
    }

    #[test]
    fn rejects_q_above_p() {
        let err = validate_problem(&spec(2.0, 1.0, 2.5, 1.0, DomainSpec::Disk { r: 1.0 }))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidExponent(_)));
    }

    #[test]
    fn rejects_degenerate_annulus() {
        let err = validate_problem(&spec(
            2.0,
            2.0,
            1.0,
            0.0,
            DomainSpec::Annulus { r1: 2.0, r2: 1.0, dim: 2 },
        ))
        .unwrap_err();
        assert!(matches!(err, Error::InvalidDomain(_)));
    }

    #[test]
    fn interval_distance_and_inward() {
        let dom = DomainSpec::Interval { r: 1.0 };
        let di = distance_and_inward(&dom, &[0.25]).unwrap();
        assert_eq!(di.d, 0.25);
        assert_eq!(di.eta, vec![1.0]);
        assert!(!di.tie);

        let di = distance_and_inward(&dom, &[0.75]).unwrap();
        assert_eq!(di.d, 0.25);
        assert_eq!(di.eta, vec![-1.0]);

        let di = distance_and_inward(&dom, &[0.5]).unwrap();
        assert_eq!(di.d, 0.5);
        assert!(di.tie);
        assert_eq!(di.eta, vec![1.0]);
    }

    #[test]
    fn annulus_distance_points_outward_from_inner_circle() {
        let dom = DomainSpec::Annulus { r1: 1.0, r2: 2.0, dim: 2 };
        let x = [1.25 * (0.6f64), 1.25 * 0.8];
        let di = distance_and_inward(&dom, &x).unwrap();
        assert!((di.d - 0.25).abs() < 1e-12);
        assert!((di.eta[0] - 0.6).abs() < 1e-12);
        assert!((di.eta[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn nearest_point_recovery() {
        // x - d*eta must land on the boundary for every catalogue domain
        let cases: Vec<(DomainSpec, Vec<f64>)> = vec![
            (DomainSpec::Interval { r: 2.0 }, vec![0.3]),
            (DomainSpec::Annulus { r1: 1.0, r2: 2.0, dim: 3 }, vec![0.9, 0.9, 0.9]),
            (DomainSpec::Ball { r: 1.5, dim: 2 }, vec![0.3, -0.4]),
            (DomainSpec::Rectangle { a: 2.0, b: 1.0 }, vec![0.7, 0.1]),
            (DomainSpec::Disk { r: 1.0 }, vec![-0.5, 0.2]),
        ];
        for (dom, x) in cases {
            let di = distance_and_inward(&dom, &x).unwrap();
            let hat: Vec<f64> = x
                .iter()
                .zip(di.eta.iter())
                .map(|(xi, ei)| xi - di.d * ei)
                .collect();
            let on_boundary = match &dom {
                DomainSpec::Interval { r } => hat[0].abs().min((hat[0] - r).abs()),
                DomainSpec::Annulus { r1, r2, .. } => {
                    let n = norm(&hat);
                    (n - r1).abs().min((n - r2).abs())
                }
                DomainSpec::Ball { r, .. } | DomainSpec::Disk { r } => (norm(&hat) - r).abs(),
                DomainSpec::Rectangle { a, b } => {
                    (hat[0].abs() - a / 2.0).abs().min((hat[1].abs() - b / 2.0).abs())
                }
            };
            assert!(on_boundary < 1e-12, "{dom:?}: {on_boundary}");
        }
    }

    #[test]
    fn ball_center_is_flagged_tie() {
        let di = distance_and_inward(&DomainSpec::Ball { r: 1.0, dim: 2 }, &[0.0, 0.0]).unwrap();
        assert!(di.tie);
        assert_eq!(di.d, 1.0);
        assert!((norm(&di.eta) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn outside_point_rejected() {
        let err = distance_and_inward(&DomainSpec::Disk { r: 1.0 }, &[2.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OutsideDomain));
    }

    #[test]
    fn reaction_eval_and_deriv() {
        let r = ReactionSpec::Polynomial(vec![1.0, -2.0, 3.0]);
        assert_eq!(r.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(r.deriv(2.0), -2.0 + 12.0);
        assert!(ReactionSpec::Constant(1.0).provably_positive());
        assert!(!ReactionSpec::Zero.provably_positive());
    }
}
