//! Planar PSVF families and the contact calculus on the switching manifold.
//!
//! Two families are built here:
//!
//! * `Z_k`: `X± = (±1, P_k'(x))` split by `Σ = {y = 0}`, with
//!   `P_k(x) = -(x + (k-1)/2)(x - (k-1)/2) ∏_{i=1}^{k-1} (x - (i - k/2))^2`.
//!   The curves `y = ±P_k(x)` over `[r0, r1] = [-(k-1)/2, (k-1)/2]` form the
//!   invariant set `Λ_k`, and the double roots `p_j = j - k/2` are
//!   visible-visible two-folds.
//! * Petal systems: the base pair `(±1, c(1 - x))` copied into `2k` sectors
//!   bounded by rays at angles `mπ/k`, giving `k` closed petals through the
//!   origin, each surrounding an invisible-invisible two-fold.
//!
//! All fields have components that depend on `x` alone, so with `f(x, y) = y`
//! the Lie derivatives reduce to `X f = v_y(x)` and `X^2 f = v_x(x) v_y'(x)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::poly::{rational, rational_from_f64, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Zk,
    Petal,
}

/// JSON-facing description of a system: `{"family": "zk" | "petal", "k": int}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub family: Family,
    pub k: u32,
}

impl SystemSpec {
    pub fn build(&self) -> Result<Psvf> {
        match self.family {
            Family::Zk => build_zk(self.k),
            Family::Petal => build_petal_system(self.k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryClass {
    CrossingPlus,
    CrossingMinus,
    FoldVisibleVisible,
    FoldInvisibleInvisible,
    FoldVisibleInvisible,
    BoundaryEquilibrium,
}

impl BoundaryClass {
    pub fn is_fold(self) -> bool {
        matches!(
            self,
            BoundaryClass::FoldVisibleVisible
                | BoundaryClass::FoldInvisibleInvisible
                | BoundaryClass::FoldVisibleInvisible
        )
    }

    pub fn is_crossing(self) -> bool {
        matches!(self, BoundaryClass::CrossingPlus | BoundaryClass::CrossingMinus)
    }
}

/// A planar field whose components are polynomials in `x` only.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarField {
    side: Side,
    vx: Polynomial,
    vy: Polynomial,
    dvx: Polynomial,
    dvy: Polynomial,
}

impl PlanarField {
    pub fn new(side: Side, vx: Polynomial, vy: Polynomial) -> Self {
        let dvx = vx.derivative();
        let dvy = vy.derivative();
        PlanarField {
            side,
            vx,
            vy,
            dvx,
            dvy,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn vx(&self) -> &Polynomial {
        &self.vx
    }

    pub fn vy(&self) -> &Polynomial {
        &self.vy
    }

    #[inline]
    pub fn velocity(&self, point: (f64, f64)) -> (f64, f64) {
        (self.vx.eval(point.0), self.vy.eval(point.0))
    }

    /// `∂vx/∂x + ∂vy/∂y`; the second term vanishes because `vy` ignores `y`.
    pub fn divergence(&self, point: (f64, f64)) -> f64 {
        self.dvx.eval(point.0)
    }

    /// `X^order f` for `f(x, y) = y`, orders 1 and 2.
    pub fn lie_derivative(&self, point: (f64, f64), order: u32) -> Result<f64> {
        match order {
            1 => Ok(self.vy.eval(point.0)),
            2 => Ok(self.vx.eval(point.0) * self.dvy.eval(point.0)),
            _ => Err(Error::invalid("order", "only Lie derivatives of order 1 and 2 are supported")),
        }
    }

    fn lie_exact(&self, x: &BigRational, order: u32) -> BigRational {
        match order {
            1 => self.vy.eval_exact(x),
            _ => self.vx.eval_exact(x) * self.dvy.eval_exact(x),
        }
    }

    fn vanishes_at(&self, x: &BigRational) -> bool {
        self.vx.eval_exact(x).is_zero() && self.vy.eval_exact(x).is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Geometry {
    Zk {
        pk: Polynomial,
        folds: Vec<f64>,
        crossings: (f64, f64),
    },
    Petal {
        slope: f64,
        speed: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Psvf {
    family: Family,
    k: u32,
    plus: PlanarField,
    minus: PlanarField,
    geometry: Geometry,
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid("k", "k must be at least 2"));
    }
    Ok(())
}

/// `P_k`, expanded exactly from its product form.
pub fn build_pk(k: u32) -> Result<Polynomial> {
    check_k(k)?;
    let k = k as i64;
    let half_width = rational(k - 1, 2);
    let mut p = &Polynomial::linear_factor(-half_width.clone())
        * &Polynomial::linear_factor(half_width);
    for i in 1..k {
        let root = rational(2 * i - k, 2);
        p = &p * &Polynomial::linear_factor(root).pow(2);
    }
    Ok(-&p)
}

/// Abscissa of the j-th double root `p_j = j - k/2`, `j = 1..k-1`.
pub fn fold_abscissa(k: u32, j: u32) -> f64 {
    j as f64 - k as f64 / 2.0
}

pub fn build_zk(k: u32) -> Result<Psvf> {
    let pk = build_pk(k)?;
    let dpk = pk.derivative();
    let one = Polynomial::from_integers(&[1]);
    let plus = PlanarField::new(Side::Plus, one.clone(), dpk.clone());
    let minus = PlanarField::new(Side::Minus, -&one, dpk);
    let half = (k as f64 - 1.0) / 2.0;
    let folds = (1..k).map(|j| fold_abscissa(k, j)).collect();
    Ok(Psvf {
        family: Family::Zk,
        k,
        plus,
        minus,
        geometry: Geometry::Zk {
            pk,
            folds,
            crossings: (-half, half),
        },
    })
}

/// Time scaling applied to the petal base field so that each petal loop takes unit time.
pub const PETAL_SPEED: i64 = 4;

fn petal_slope(k: u32) -> BigRational {
    if k <= 3 {
        rational(1, 1)
    } else {
        rational(2, k as i64)
    }
}

/// Petal system with `k` petals in `2k` sectors.
///
/// The base pair is `λ(±1, c(1 - x))` with `λ = 4` and `c = 1` for `k <= 3`,
/// `c = 2/k` beyond, so the petal through the origin (`0 <= x <= 2`) stays
/// inside its two sectors and is traversed in unit time.
pub fn build_petal_system(k: u32) -> Result<Psvf> {
    check_k(k)?;
    let c = petal_slope(k);
    let speed = rational(PETAL_SPEED, 1);
    let vy = Polynomial::new(alloc::vec![c.clone() * &speed, -(c.clone() * &speed)]);
    let plus = PlanarField::new(Side::Plus, Polynomial::constant(speed.clone()), vy.clone());
    let minus = PlanarField::new(Side::Minus, Polynomial::constant(-speed), vy);
    Ok(Psvf {
        family: Family::Petal,
        k,
        plus,
        minus,
        geometry: Geometry::Petal {
            slope: c.to_f64().unwrap_or(1.0),
            speed: PETAL_SPEED as f64,
        },
    })
}

pub(crate) fn rotate(point: (f64, f64), angle: f64) -> (f64, f64) {
    let (s, c) = (math::sin(angle), math::cos(angle));
    (c * point.0 - s * point.1, s * point.0 + c * point.1)
}

impl Psvf {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec {
            family: self.family,
            k: self.k,
        }
    }

    pub fn plus(&self) -> &PlanarField {
        &self.plus
    }

    pub fn minus(&self) -> &PlanarField {
        &self.minus
    }

    pub fn field(&self, side: Side) -> &PlanarField {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    /// `P_k` for the `Z_k` family.
    pub fn pk(&self) -> Option<&Polynomial> {
        match &self.geometry {
            Geometry::Zk { pk, .. } => Some(pk),
            Geometry::Petal { .. } => None,
        }
    }

    /// Fold abscissae on `Σ`: the `p_j` for `Z_k`, the base fold `x = 1` for petals.
    pub fn fold_abscissae(&self) -> &[f64] {
        match &self.geometry {
            Geometry::Zk { folds, .. } => folds,
            Geometry::Petal { .. } => &[1.0],
        }
    }

    /// `(r0, r1)`, the simple roots of `P_k` where `Λ_k` crosses `Σ`.
    pub fn crossing_endpoints(&self) -> Option<(f64, f64)> {
        match &self.geometry {
            Geometry::Zk { crossings, .. } => Some(*crossings),
            Geometry::Petal { .. } => None,
        }
    }

    /// Base slope `c` and time scale of a petal system.
    pub fn petal_shape(&self) -> Option<(f64, f64)> {
        match self.geometry {
            Geometry::Petal { slope, speed } => Some((slope, speed)),
            Geometry::Zk { .. } => None,
        }
    }

    /// Number of switching rays: 2 (the two halves of `y = 0`) or `2k` for petals.
    pub fn ray_count(&self) -> usize {
        match self.family {
            Family::Zk => 2,
            Family::Petal => 2 * self.k as usize,
        }
    }

    fn sector_angle(&self) -> f64 {
        PI / self.k as f64
    }

    /// Field of sector `m` (angles `[mπ/k, (m+1)π/k)`) evaluated at a global point.
    fn sector_field(&self, sector: usize, point: (f64, f64)) -> (f64, f64) {
        let k = self.k as usize;
        let sector = sector % (2 * k);
        let (side, petal) = if sector % 2 == 0 {
            (Side::Plus, sector / 2)
        } else {
            (Side::Minus, sector.div_ceil(2) % k)
        };
        let theta = 2.0 * PI * petal as f64 / k as f64;
        let local = rotate(point, -theta);
        rotate(self.field(side).velocity(local), theta)
    }

    /// The vector field `Z` at a point off the switching set.
    ///
    /// Points on `Σ` are assigned to the counterclockwise side (`X+` on `y = 0`).
    pub fn field_at(&self, point: (f64, f64)) -> (f64, f64) {
        match self.family {
            Family::Zk => {
                let side = if point.1 >= 0.0 { Side::Plus } else { Side::Minus };
                self.field(side).velocity(point)
            }
            Family::Petal => {
                let mut angle = math::atan2(point.1, point.0);
                if angle < 0.0 {
                    angle += 2.0 * PI;
                }
                let sector = math::floor(angle / self.sector_angle()) as usize;
                self.sector_field(sector, point)
            }
        }
    }

    /// Refraction test `X+f = X-f` on the switching set, tolerance `1e-12`.
    ///
    /// For `Z_k` the samples are abscissae on `y = 0`. For petal systems they
    /// are radii, and the normal components of the two sector fields meeting
    /// at each of the `2k` rays are compared.
    pub fn check_refractive(&self, samples: &[f64]) -> bool {
        if samples.is_empty() {
            return false;
        }
        let close = |a: f64, b: f64| math::abs(a - b) <= 1e-12 * 1.0f64.max(math::abs(a)).max(math::abs(b));
        match self.family {
            Family::Zk => samples
                .iter()
                .all(|&x| close(self.plus.vy.eval(x), self.minus.vy.eval(x))),
            Family::Petal => {
                let rays = self.ray_count();
                samples.iter().all(|&r| {
                    (0..rays).all(|m| {
                        let a = m as f64 * self.sector_angle();
                        let q = (r * math::cos(a), r * math::sin(a));
                        let normal = (-math::sin(a), math::cos(a));
                        let ccw = self.sector_field(m, q);
                        let cw = self.sector_field(m + rays - 1, q);
                        close(
                            ccw.0 * normal.0 + ccw.1 * normal.1,
                            cw.0 * normal.0 + cw.1 * normal.1,
                        )
                    })
                })
            }
        }
    }

    /// Contact class of the point `(x, 0)` with respect to `Σ = {y = 0}`.
    ///
    /// Evaluation is exact: `x` is converted to the dyadic rational it
    /// represents, so folds at dyadic abscissae are recognised without a
    /// tolerance. Petal systems are classified in the base frame.
    pub fn classify_boundary_point(&self, x: f64) -> Result<BoundaryClass> {
        let xr = rational_from_f64(x).ok_or_else(|| Error::invalid("x", "must be finite"))?;
        if self.plus.vanishes_at(&xr) || self.minus.vanishes_at(&xr) {
            return Ok(BoundaryClass::BoundaryEquilibrium);
        }
        let a = self.plus.lie_exact(&xr, 1);
        let b = self.minus.lie_exact(&xr, 1);
        match (a.is_zero(), b.is_zero()) {
            (false, false) => {
                if a.is_positive() == b.is_positive() {
                    Ok(if a.is_positive() {
                        BoundaryClass::CrossingPlus
                    } else {
                        BoundaryClass::CrossingMinus
                    })
                } else {
                    Err(Error::Sliding { x })
                }
            }
            (true, true) => {
                let a2 = self.plus.lie_exact(&xr, 2);
                let b2 = self.minus.lie_exact(&xr, 2);
                if a2.is_zero() || b2.is_zero() {
                    return Err(Error::DegenerateContact { x });
                }
                // X+ reaches the fold from y > 0 when X+^2 f > 0; X- from y < 0 when X-^2 f < 0.
                let plus_visible = a2.is_positive();
                let minus_visible = b2.is_negative();
                Ok(match (plus_visible, minus_visible) {
                    (true, true) => BoundaryClass::FoldVisibleVisible,
                    (false, false) => BoundaryClass::FoldInvisibleInvisible,
                    _ => BoundaryClass::FoldVisibleInvisible,
                })
            }
            _ => Err(Error::SingleTangency { x }),
        }
    }
}

/// Exact roots of `P_k` with multiplicities: `[(r0, 1), (p_1, 2), …, (p_{k-1}, 2), (r1, 1)]`.
pub fn pk_roots(k: u32) -> Result<Vec<(BigRational, usize)>> {
    check_k(k)?;
    let k = k as i64;
    let mut roots = Vec::with_capacity(k as usize + 1);
    roots.push((BigRational::new(BigInt::from(-(k - 1)), BigInt::from(2)), 1));
    for j in 1..k {
        roots.push((rational(2 * j - k, 2), 2));
    }
    roots.push((rational(k - 1, 2), 1));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p2_matches_the_z2_field() {
        let p2 = build_pk(2).unwrap();
        assert_eq!(p2, Polynomial::from_ratios(&[(0, 1), (0, 1), (1, 4), (0, 1), (-1, 1)]));
        assert_eq!(p2.derivative(), Polynomial::from_ratios(&[(0, 1), (1, 2), (0, 1), (-4, 1)]));
    }

    #[test]
    fn p3_follows_the_product_formula() {
        // -(x^2 - 1)(x^2 - 1/4)^2 expanded by hand.
        let expected = Polynomial::from_ratios(&[(1, 16), (0, 1), (-9, 16), (0, 1), (3, 2), (0, 1), (-1, 1)]);
        assert_eq!(build_pk(3).unwrap(), expected);
        let z3 = build_zk(3).unwrap();
        let dp3 = Polynomial::from_ratios(&[(0, 1), (-9, 8), (0, 1), (6, 1), (0, 1), (-6, 1)]);
        assert_eq!(z3.plus().vy(), &dp3);
    }

    #[test]
    fn invalid_k_is_rejected() {
        assert!(matches!(build_pk(1), Err(Error::InvalidParameter { name: "k", .. })));
        assert!(build_zk(0).is_err());
        assert!(build_petal_system(1).is_err());
    }

    #[test]
    fn roots_have_claimed_multiplicities() {
        for k in 2..=7 {
            let p = build_pk(k).unwrap();
            assert_eq!(p.degree(), 2 * k as usize);
            for (root, mult) in pk_roots(k).unwrap() {
                assert_eq!(p.multiplicity(&root), mult, "k={k} root={root}");
                let x = root.to_f64().unwrap();
                assert!(p.eval(x).abs() <= 1e-10);
                if mult == 2 {
                    assert!(p.derivative().eval(x).abs() <= 1e-10);
                }
            }
            assert!(p.eval((k as f64 - 1.0) / 2.0).abs() == 0.0);
        }
    }

    #[test]
    fn lie_derivatives_at_z2_fold() {
        let z2 = build_zk(2).unwrap();
        assert_eq!(z2.plus().lie_derivative((0.0, 0.0), 1).unwrap(), 0.0);
        assert_eq!(z2.plus().lie_derivative((0.0, 0.0), 2).unwrap(), 0.5);
        assert!(z2.plus().lie_derivative((0.0, 0.0), 3).is_err());
        let z3 = build_zk(3).unwrap();
        assert!(z3.plus().lie_derivative((-1.0, 0.0), 1).unwrap() > 0.0);
    }

    #[test]
    fn zk_classification_examples() {
        let z2 = build_zk(2).unwrap();
        assert_eq!(z2.classify_boundary_point(0.0).unwrap(), BoundaryClass::FoldVisibleVisible);
        assert_eq!(z2.classify_boundary_point(0.5).unwrap(), BoundaryClass::CrossingMinus);
        assert_eq!(z2.classify_boundary_point(-0.5).unwrap(), BoundaryClass::CrossingPlus);
        let z3 = build_zk(3).unwrap();
        assert_eq!(z3.classify_boundary_point(-0.5).unwrap(), BoundaryClass::FoldVisibleVisible);
        assert_eq!(z3.classify_boundary_point(0.5).unwrap(), BoundaryClass::FoldVisibleVisible);
        assert!(z3.classify_boundary_point(-1.0).unwrap().is_crossing());
        assert!(z3.classify_boundary_point(1.0).unwrap().is_crossing());
    }

    #[test]
    fn zk_dyadic_grid_has_folds_only_at_critical_points() {
        for k in 2..=5 {
            let z = build_zk(k).unwrap();
            let (r0, r1) = z.crossing_endpoints().unwrap();
            let dp = z.plus().vy().clone();
            let steps = 64 * (k - 1);
            for i in 1..steps {
                let x = r0 + (r1 - r0) * i as f64 / steps as f64;
                let class = z.classify_boundary_point(x).unwrap();
                let at_pj = z.fold_abscissae().contains(&x);
                if at_pj {
                    assert_eq!(class, BoundaryClass::FoldVisibleVisible, "k={k} x={x}");
                } else if dp.sign_at(x) == 0 {
                    // Critical points of P_k between the double roots are maxima.
                    assert_eq!(class, BoundaryClass::FoldInvisibleInvisible, "k={k} x={x}");
                } else {
                    assert!(class.is_crossing(), "k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn petal_base_fold_is_invisible_invisible() {
        let petal = build_petal_system(3).unwrap();
        assert_eq!(petal.plus().lie_derivative((1.0, 0.0), 1).unwrap(), 0.0);
        assert_eq!(petal.classify_boundary_point(1.0).unwrap(), BoundaryClass::FoldInvisibleInvisible);
        assert_eq!(petal.classify_boundary_point(0.0).unwrap(), BoundaryClass::CrossingPlus);
        assert_eq!(petal.classify_boundary_point(2.0).unwrap(), BoundaryClass::CrossingMinus);
    }

    #[test]
    fn degenerate_and_sliding_contacts_are_errors() {
        let zero = Polynomial::zero();
        let flat = PlanarField::new(Side::Plus, Polynomial::from_integers(&[1]), zero.clone());
        let psvf = Psvf {
            family: Family::Zk,
            k: 2,
            plus: flat.clone(),
            minus: PlanarField::new(Side::Minus, Polynomial::from_integers(&[-1]), zero),
            geometry: Geometry::Petal { slope: 1.0, speed: 1.0 },
        };
        assert!(matches!(psvf.classify_boundary_point(0.3), Err(Error::DegenerateContact { .. })));

        let sliding = Psvf {
            plus: PlanarField::new(Side::Plus, Polynomial::from_integers(&[1]), Polynomial::from_integers(&[1])),
            minus: PlanarField::new(Side::Minus, Polynomial::from_integers(&[-1]), Polynomial::from_integers(&[-1])),
            ..psvf
        };
        assert!(matches!(sliding.classify_boundary_point(0.0), Err(Error::Sliding { .. })));
        assert!(!sliding.check_refractive(&[0.0]));
    }

    #[test]
    fn refraction_checks() {
        assert!(build_zk(3).unwrap().check_refractive(&[-1.0, 0.0, 1.0]));
        for k in 2..=6 {
            let petal = build_petal_system(k).unwrap();
            assert!(petal.check_refractive(&[0.1, 0.5, 1.0, 1.7, 3.0]), "k={k}");
        }
        assert!(!build_zk(2).unwrap().check_refractive(&[]));
    }

    #[test]
    fn petal_sectors_follow_the_construction() {
        let petal = build_petal_system(3).unwrap();
        // Region 1 (sector 0) carries X+ itself, region 6 (sector 5) carries X-.
        let q = (1.0, 0.2);
        assert_eq!(petal.field_at(q), petal.plus().velocity(q));
        let q = (1.0, -0.2);
        assert_eq!(petal.field_at(q), petal.minus().velocity(q));
        // Sector 2 is X+ rotated by 2π/3.
        let local = (1.0, 0.2);
        let global = rotate(local, 2.0 * PI / 3.0);
        let expected = rotate(petal.plus().velocity(local), 2.0 * PI / 3.0);
        let got = petal.field_at(global);
        assert!((got.0 - expected.0).abs() < 1e-12 && (got.1 - expected.1).abs() < 1e-12);
    }

    #[test]
    fn system_spec_builds_both_families() {
        let zk = SystemSpec { family: Family::Zk, k: 3 }.build().unwrap();
        assert_eq!((zk.family(), zk.k()), (Family::Zk, 3));
        let petal = SystemSpec { family: Family::Petal, k: 4 }.build().unwrap();
        assert_eq!(petal.spec(), SystemSpec { family: Family::Petal, k: 4 });
        assert!(SystemSpec { family: Family::Petal, k: 1 }.build().is_err());
    }

    proptest! {
        #[test]
        fn zk_fields_are_divergence_free(k in 2u32..7, x in -4.0f64..4.0, y in -2.0f64..2.0) {
            let z = build_zk(k).unwrap();
            prop_assert_eq!(z.plus().divergence((x, y)), 0.0);
            prop_assert_eq!(z.minus().divergence((x, y)), 0.0);
        }
    }
}
