//! Analytic self-maps of the unit disk as explicit expression trees.
//!
//! A [`MapExpr`] is built from closed-form pieces (Moebius, polynomial,
//! rational, Blaschke, atomic singular inner) and composition. Builders
//! validate the self-map property up front — rational denominators must be
//! zero-free on the closed disk, and the boundary modulus is checked on a
//! 512-point grid — so that evaluation can assume a legal map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{Atom, BlaschkeProduct, SingularFactor, ATOM_GUARD};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Maximum nesting depth of [`MapExpr::Compose`].
pub const MAX_COMPOSE_DEPTH: usize = 16;

/// Number of boundary samples used by the constructor self-map check.
pub const BOUNDARY_CHECK_SAMPLES: usize = 512;

/// Slack allowed on the boundary modulus before a map is rejected.
pub const SELF_MAP_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZEROC: Complex64 = Complex64::new(0.0, 0.0);

/// Value, derivative, and a first-order error bound for one evaluation.
///
/// For closed-form variants the condition estimate is a token machine-epsilon
/// floor; for truncated Blaschke products it is dominated by the tail bound
/// `2 * tail_sum / (1 - |z|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub derivative: Complex64,
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr {
    Identity,
    Scale(Complex64),
    Moebius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    Polynomial(Poly),
    Rational {
        num: Poly,
        den: Poly,
    },
    Blaschke(BlaschkeProduct),
    SingularInner(SingularFactor),
    Compose(Box<MapExpr>, Box<MapExpr>),
}

impl MapExpr {
    pub fn identity() -> MapExpr {
        MapExpr::Identity
    }

    pub fn scale(c: Complex64) -> Result<MapExpr> {
        if c.norm() > 1.0 + 1e-12 {
            return Err(Error::NotSelfMap(c.norm()));
        }
        Ok(MapExpr::Scale(c))
    }

    /// Moebius map `(a z + b) / (c z + d)`, normalized so the coefficient of
    /// largest modulus equals one.
    pub fn moebius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<MapExpr> {
        let scale = [a, b, c, d]
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        if scale == 0.0 || (a * d - b * c).norm() < 1e-15 * scale * scale {
            return Err(Error::Precondition("degenerate Moebius coefficients".into()));
        }
        // Constructor output always contains an exactly-one coefficient
        // (pivot/pivot is exact), with the rest at most a couple of ulps
        // above modulus one. Recognizing that shape and keeping it
        // bit-for-bit makes normalization idempotent, so serialization
        // round-trips are fixed points.
        let map = if [a, b, c, d].contains(&Complex64::ONE) && scale <= 1.0 + 4.0 * f64::EPSILON {
            MapExpr::Moebius { a, b, c, d }
        } else {
            let largest = [a, b, c, d]
                .into_iter()
                .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
                .unwrap();
            MapExpr::Moebius {
                a: a / largest,
                b: b / largest,
                c: c / largest,
                d: d / largest,
            }
        };
        map.check_denominator()?;
        map.check_boundary_modulus()?;
        Ok(map)
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<MapExpr> {
        let map = MapExpr::Polynomial(Poly::new(coeffs));
        map.check_boundary_modulus()?;
        Ok(map)
    }

    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<MapExpr> {
        let map = MapExpr::Rational {
            num: Poly::new(num),
            den: Poly::new(den),
        };
        map.check_denominator()?;
        map.check_boundary_modulus()?;
        Ok(map)
    }

    pub fn blaschke(product: BlaschkeProduct) -> MapExpr {
        MapExpr::Blaschke(product)
    }

    pub fn singular_inner(factor: SingularFactor) -> MapExpr {
        MapExpr::SingularInner(factor)
    }

    /// `outer . inner` (apply `inner` first).
    pub fn compose(outer: MapExpr, inner: MapExpr) -> Result<MapExpr> {
        let depth = 1 + outer.depth().max(inner.depth());
        if depth > MAX_COMPOSE_DEPTH {
            return Err(Error::CompositionTooDeep(depth, MAX_COMPOSE_DEPTH));
        }
        Ok(MapExpr::Compose(Box::new(outer), Box::new(inner)))
    }

    pub fn depth(&self) -> usize {
        match self {
            MapExpr::Compose(o, i) => 1 + o.depth().max(i.depth()),
            _ => 0,
        }
    }

    fn check_denominator(&self) -> Result<()> {
        let den = match self {
            MapExpr::Moebius { c, d, .. } => Poly::new(vec![*d, *c]),
            MapExpr::Rational { den, .. } => den.clone(),
            _ => return Ok(()),
        };
        if den.degree() == 0 {
            return if den.is_zero() {
                Err(Error::Precondition("zero denominator".into()))
            } else {
                Ok(())
            };
        }
        for root in den.roots()? {
            if root.norm() <= 1.0 + 1e-12 {
                return Err(Error::DenominatorVanishesInDisk(root));
            }
        }
        Ok(())
    }

    /// Reject maps whose boundary modulus exceeds `1 + SELF_MAP_TOL`.
    /// By the maximum principle this certifies the interior as well.
    fn check_boundary_modulus(&self) -> Result<()> {
        let atoms = self.atom_locations();
        let mut worst = 0.0f64;
        for j in 0..BOUNDARY_CHECK_SAMPLES {
            let xi = Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * j as f64 / BOUNDARY_CHECK_SAMPLES as f64,
            );
            if atoms.iter().any(|&a| (xi - a).norm() < 1e-6) {
                continue;
            }
            let v = self.eval(xi)?;
            worst = worst.max(v.value.norm());
        }
        if worst > 1.0 + SELF_MAP_TOL {
            Err(Error::NotSelfMap(worst))
        } else {
            Ok(())
        }
    }

    /// Boundary atoms of every singular factor in the tree.
    pub fn atom_locations(&self) -> Vec<Complex64> {
        match self {
            MapExpr::SingularInner(s) => s.atoms().iter().map(|a| a.xi).collect(),
            MapExpr::Compose(o, i) => {
                // Atoms of the inner map obstruct boundary evaluation of the
                // composition; outer atoms only matter where inner is inner.
                let mut v = i.atom_locations();
                v.extend(o.atom_locations());
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn has_singular_part(&self) -> bool {
        match self {
            MapExpr::SingularInner(s) => !s.is_trivial(),
            MapExpr::Compose(o, i) => o.has_singular_part() || i.has_singular_part(),
            _ => false,
        }
    }

    /// Evaluate value and derivative at a point of the closed disk.
    pub fn eval(&self, z: Complex64) -> Result<EvalResult> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::PointOutsideDomain(z));
        }
        self.eval_unchecked(z)
    }

    fn eval_unchecked(&self, z: Complex64) -> Result<EvalResult> {
        let floor = 8.0 * f64::EPSILON;
        match self {
            MapExpr::Identity => Ok(EvalResult {
                value: z,
                derivative: ONE,
                condition_estimate: floor,
            }),
            MapExpr::Scale(c) => Ok(EvalResult {
                value: c * z,
                derivative: *c,
                condition_estimate: floor,
            }),
            MapExpr::Moebius { a, b, c, d } => {
                let den = c * z + d;
                if den.norm() < 1e-300 {
                    return Err(Error::PointOutsideDomain(z));
                }
                Ok(EvalResult {
                    value: (a * z + b) / den,
                    derivative: (a * d - b * c) / (den * den),
                    condition_estimate: floor,
                })
            }
            MapExpr::Polynomial(p) => {
                let (v, d) = p.eval_with_derivative(z);
                Ok(EvalResult {
                    value: v,
                    derivative: d,
                    condition_estimate: floor,
                })
            }
            MapExpr::Rational { num, den } => {
                let (nv, nd) = num.eval_with_derivative(z);
                let (dv, dd) = den.eval_with_derivative(z);
                if dv.norm() < 1e-300 {
                    return Err(Error::PointOutsideDomain(z));
                }
                Ok(EvalResult {
                    value: nv / dv,
                    derivative: (nd * dv - nv * dd) / (dv * dv),
                    condition_estimate: floor,
                })
            }
            MapExpr::Blaschke(b) => {
                let (v, d) = b.eval(z);
                Ok(EvalResult {
                    value: v,
                    derivative: d,
                    condition_estimate: floor + b.truncation_bound(z),
                })
            }
            MapExpr::SingularInner(s) => {
                let (v, d) = s.eval(z)?;
                Ok(EvalResult {
                    value: v,
                    derivative: d,
                    condition_estimate: floor,
                })
            }
            MapExpr::Compose(outer, inner) => {
                let ri = inner.eval_unchecked(z)?;
                // Float noise can push |inner(z)| a hair past 1; clamp back.
                let mut mid = ri.value;
                if mid.norm() > 1.0 {
                    if mid.norm() > 1.0 + 1e-9 + ri.condition_estimate {
                        return Err(Error::NotSelfMap(mid.norm()));
                    }
                    mid /= mid.norm();
                }
                let ro = outer.eval_unchecked(mid)?;
                Ok(EvalResult {
                    value: ro.value,
                    derivative: ro.derivative * ri.derivative,
                    condition_estimate: ro.condition_estimate
                        + ri.condition_estimate * (1.0 + ro.derivative.norm()),
                })
            }
        }
    }

    /// Value at the origin (never fails for a validated map).
    pub fn at_origin(&self) -> Complex64 {
        self.eval(ZEROC)
            .map(|r| r.value)
            .expect("validated maps evaluate at the origin")
    }

    pub fn fixes_origin(&self) -> bool {
        self.at_origin().norm() < 1e-12
    }

    /// Exact rational form `num/den` when the tree has one (no singular
    /// factors, no truncation tails, composite degree at most 512).
    pub fn as_rational(&self) -> Option<(Poly, Poly)> {
        const DEGREE_CAP: usize = 512;
        let (num, den) = match self {
            MapExpr::Identity => (Poly::identity(), Poly::constant(ONE)),
            MapExpr::Scale(c) => (Poly::new(vec![ZEROC, *c]), Poly::constant(ONE)),
            MapExpr::Moebius { a, b, c, d } => {
                (Poly::new(vec![*b, *a]), Poly::new(vec![*d, *c]))
            }
            MapExpr::Polynomial(p) => (p.clone(), Poly::constant(ONE)),
            MapExpr::Rational { num, den } => (num.clone(), den.clone()),
            MapExpr::Blaschke(bp) => {
                if bp.tail_sum() != 0.0 {
                    return None;
                }
                let mut num = Poly::constant(ONE);
                let mut den = Poly::constant(ONE);
                for &lam in bp.zeros() {
                    if lam.norm() == 0.0 {
                        num = num.mul(&Poly::identity());
                    } else {
                        let unim = Complex64::from_polar(1.0, -lam.arg());
                        num = num.mul(&Poly::new(vec![unim * lam, -unim]));
                        den = den.mul(&Poly::new(vec![ONE, -lam.conj()]));
                    }
                }
                (num, den)
            }
            MapExpr::SingularInner(_) => return None,
            MapExpr::Compose(outer, inner) => {
                let (no, do_) = outer.as_rational()?;
                let (ni, di) = inner.as_rational()?;
                let mut num = no.compose_fraction(&ni, &di);
                let mut den = do_.compose_fraction(&ni, &di);
                // compose_fraction clears denominators by its own degree;
                // pad the lower-degree side so both share the factor di^max.
                let (dn, dd) = (no.degree(), do_.degree());
                if dn > dd {
                    den = den.mul(&di.pow(dn - dd));
                } else if dd > dn {
                    num = num.mul(&di.pow(dd - dn));
                }
                (num, den)
            }
        };
        if num.degree().max(den.degree()) > DEGREE_CAP {
            return None;
        }
        Some((num, den))
    }
}

/// Pseudo-hyperbolic disk `{ zeta : |zeta - center| < ratio |1 - conj(center) zeta| }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicDisk {
    pub center: Complex64,
    pub ratio: f64,
}

impl HyperbolicDisk {
    pub fn new(center: Complex64, ratio: f64) -> Result<Self> {
        if center.norm() >= 1.0 {
            return Err(Error::PointOutsideDomain(center));
        }
        if !(0.0..1.0).contains(&ratio) || ratio == 0.0 {
            return Err(Error::Precondition(format!(
                "hyperbolic ratio must lie in (0, 1), got {ratio}"
            )));
        }
        Ok(HyperbolicDisk { center, ratio })
    }

    pub fn contains(&self, zeta: Complex64) -> bool {
        (zeta - self.center).norm() < self.ratio * (1.0 - self.center.conj() * zeta).norm()
    }

    /// The set is a Euclidean disk; its center.
    pub fn euclidean_center(&self) -> Complex64 {
        let e2 = self.ratio * self.ratio;
        self.center * (1.0 - e2) / (1.0 - e2 * self.center.norm_sqr())
    }

    pub fn euclidean_radius(&self) -> f64 {
        let e2 = self.ratio * self.ratio;
        self.ratio * (1.0 - self.center.norm_sqr()) / (1.0 - e2 * self.center.norm_sqr())
    }
}

/// Moebius map of the disk onto the disk `|w - center| < radius`, fixing the
/// origin and the internal tangency point `center/|center|`.
pub fn conformal_onto_disk(center: Complex64, radius: f64) -> Result<MapExpr> {
    if center.norm() >= radius {
        return Err(Error::ZeroNotInterior);
    }
    let reach = center.norm() + radius;
    if reach > 1.0 + 1e-12 {
        return Err(Error::NotContained);
    }
    if reach < 1.0 - 1e-12 {
        return Err(Error::NotTangent);
    }
    if center.norm() == 0.0 {
        return MapExpr::moebius(ONE, ZEROC, ZEROC, ONE);
    }
    // Real model: z -> (1-k) z / (1 - k z) sends the disk onto the disk of
    // center k/(1+k), radius 1/(1+k), tangent at 1. Rotate into position.
    let k = center.norm() / (1.0 - center.norm());
    let tau = center / center.norm();
    MapExpr::moebius(
        Complex64::new(1.0 - k, 0.0),
        ZEROC,
        -k * tau.conj(),
        ONE,
    )
}

/// Defect `(1 - |phi(z)|^2) - |phi'(z)| (1 - |z|^2)`, nonnegative for every
/// analytic self-map by the Schwarz–Pick inequality.
pub fn schwarz_pick_defect(map: &MapExpr, z: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::PointOutsideDomain(z));
    }
    let r = map.eval(z)?;
    Ok(defect_from_eval(&r, z))
}

/// Same defect, computed from an existing evaluation.
pub fn defect_from_eval(r: &EvalResult, z: Complex64) -> f64 {
    (1.0 - r.value.norm_sqr()) - r.derivative.norm() * (1.0 - z.norm_sqr())
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Serialized form of [`MapExpr`]. Complex scalars are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapExprDto {
    Identity,
    Scale {
        #[serde(with = "crate::util::complex_pair")]
        c: Complex64,
    },
    Moebius {
        #[serde(with = "crate::util::complex_pair")]
        a: Complex64,
        #[serde(with = "crate::util::complex_pair")]
        b: Complex64,
        #[serde(with = "crate::util::complex_pair")]
        c: Complex64,
        #[serde(with = "crate::util::complex_pair")]
        d: Complex64,
    },
    Polynomial {
        #[serde(with = "crate::util::complex_pair_vec")]
        coeffs: Vec<Complex64>,
    },
    Rational {
        #[serde(with = "crate::util::complex_pair_vec")]
        num: Vec<Complex64>,
        #[serde(with = "crate::util::complex_pair_vec")]
        den: Vec<Complex64>,
    },
    Blaschke {
        #[serde(with = "crate::util::complex_pair_vec")]
        zeros: Vec<Complex64>,
        #[serde(default)]
        tail_sum: f64,
    },
    Singular {
        atoms: Vec<Atom>,
    },
    Compose {
        outer: Box<MapExprDto>,
        inner: Box<MapExprDto>,
    },
}

impl MapExpr {
    pub fn to_dto(&self) -> MapExprDto {
        match self {
            MapExpr::Identity => MapExprDto::Identity,
            MapExpr::Scale(c) => MapExprDto::Scale { c: *c },
            MapExpr::Moebius { a, b, c, d } => MapExprDto::Moebius {
                a: *a,
                b: *b,
                c: *c,
                d: *d,
            },
            MapExpr::Polynomial(p) => MapExprDto::Polynomial {
                coeffs: p.coeffs().to_vec(),
            },
            MapExpr::Rational { num, den } => MapExprDto::Rational {
                num: num.coeffs().to_vec(),
                den: den.coeffs().to_vec(),
            },
            MapExpr::Blaschke(b) => MapExprDto::Blaschke {
                zeros: b.zeros().to_vec(),
                tail_sum: b.tail_sum(),
            },
            MapExpr::SingularInner(s) => MapExprDto::Singular {
                atoms: s.atoms().to_vec(),
            },
            MapExpr::Compose(o, i) => MapExprDto::Compose {
                outer: Box::new(o.to_dto()),
                inner: Box::new(i.to_dto()),
            },
        }
    }

    /// Rebuild from the wire format, re-running all construction checks.
    pub fn from_dto(dto: &MapExprDto) -> Result<MapExpr> {
        match dto {
            MapExprDto::Identity => Ok(MapExpr::Identity),
            MapExprDto::Scale { c } => MapExpr::scale(*c),
            MapExprDto::Moebius { a, b, c, d } => MapExpr::moebius(*a, *b, *c, *d),
            MapExprDto::Polynomial { coeffs } => MapExpr::polynomial(coeffs.clone()),
            MapExprDto::Rational { num, den } => MapExpr::rational(num.clone(), den.clone()),
            MapExprDto::Blaschke { zeros, tail_sum } => Ok(MapExpr::Blaschke(
                BlaschkeProduct::with_tail(zeros.clone(), *tail_sum)?,
            )),
            MapExprDto::Singular { atoms } => {
                Ok(MapExpr::SingularInner(SingularFactor::new(atoms.clone())?))
            }
            MapExprDto::Compose { outer, inner } => {
                MapExpr::compose(MapExpr::from_dto(outer)?, MapExpr::from_dto(inner)?)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dto()).expect("map serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<MapExpr> {
        let dto: MapExprDto = serde_json::from_str(json)?;
        MapExpr::from_dto(&dto)
    }
}

/// Guard distance used when sampling boundary values near singular atoms.
pub fn boundary_guard() -> f64 {
    ATOM_GUARD
}
