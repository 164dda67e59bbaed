//! Projection of conic divisors to the pencil of lines through a point `p`,
//! its fibers, the involution `q ↦ q*` and the Viète map.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{least_squares, CVec3, QuadForm, C64, ONE, ZERO};
use crate::conic::{conic_param, roots_projective, BinaryForm, ProjPoint1, ProjPoint2, RootCluster};
use crate::error::{Error, Result};

const ON_CONIC: f64 = 1e-9;

fn conic_residual(v: &CVec3, q: &QuadForm) -> f64 {
    q.eval(v).norm() / (v.norm_squared() * q.matrix().norm())
}

/// A point off the conic together with a fixed frame of the lines through it.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilCenter {
    p: ProjPoint2,
    frame: [CVec3; 2],
}

impl PencilCenter {
    /// The frame joins `p` to `α([1:0])` and `α([0:1])`, or to the first other pair of
    /// `α([1:1]), α([1:−1]), α([1:i]), α([1:−i])` when those lines coincide.
    pub fn new(p: ProjPoint2, q: &QuadForm) -> Result<Self> {
        if conic_residual(p.coords(), q) <= ON_CONIC {
            return Err(Error::CenterOnConic);
        }
        let param = conic_param(q);
        let i = C64::new(0.0, 1.0);
        let candidates: Vec<CVec3> = [(ONE, ZERO), (ZERO, ONE), (ONE, ONE), (ONE, -ONE), (ONE, i), (ONE, -i)]
            .iter()
            .map(|&(a, b)| param.eval(&ProjPoint1::new(a, b).expect("nonzero parameter")))
            .map(|c| p.coords().cross(&c).normalize())
            .collect();
        for a in 0..candidates.len() {
            for b in a + 1..candidates.len() {
                if candidates[a].cross(&candidates[b]).norm() > 1e-3 {
                    return Ok(Self { p, frame: [candidates[a], candidates[b]] });
                }
            }
        }
        Err(Error::CenterOnConic)
    }

    pub fn point(&self) -> &ProjPoint2 {
        &self.p
    }

    /// Coefficients of the line `t0·ℓ0 + t1·ℓ1`.
    pub fn line(&self, t: &ProjPoint1) -> CVec3 {
        let [t0, t1] = t.coords();
        self.frame[0] * t0 + self.frame[1] * t1
    }

    /// Pencil coordinate of a line through `p`.
    pub fn coordinate_of_line(&self, l: &CVec3) -> ProjPoint1 {
        let m = DMatrix::from_fn(3, 2, |r, c| self.frame[c][r]);
        let rhs = DVector::from_column_slice(l.as_slice());
        let t = least_squares(&m, &rhs).expect("the frame lines are independent");
        ProjPoint1::new(t[0], t[1]).expect("a line through p is a nonzero combination")
    }

    /// Pencil coordinate of the line joining `p` to `x`.
    pub fn coordinate_of_point(&self, x: &ProjPoint2) -> ProjPoint1 {
        self.coordinate_of_line(&self.p.coords().cross(x.coords()))
    }
}

/// Points of a line `ℓ·x = 0` on the conic, with multiplicity (one point of multiplicity two when tangent).
pub fn line_conic_points(l: &CVec3, q: &QuadForm, eps_cluster: f64) -> Result<Vec<(ProjPoint2, usize)>> {
    let k = (0..3).max_by(|&a, &b| l[a].norm().total_cmp(&l[b].norm())).expect("three coordinates");
    if l[k].norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let others: Vec<usize> = (0..3).filter(|&j| j != k).collect();
    let basis: Vec<CVec3> = others
        .iter()
        .map(|&j| {
            let mut e = CVec3::zeros();
            e[j] = ONE;
            e[k] = -l[j] / l[k];
            e
        })
        .collect();
    let (e1, e2) = (basis[0], basis[1]);
    let form = BinaryForm::new(vec![q.eval(&e2), q.bilinear(&e1, &e2) * 2.0, q.eval(&e1)]);
    let roots = roots_projective(&form, eps_cluster)?;
    Ok(roots
        .into_iter()
        .map(|RootCluster { point, multiplicity }| {
            let [s, t] = point.coords();
            (ProjPoint2::new(e1 * s + e2 * t).expect("independent basis"), multiplicity)
        })
        .collect())
}

/// The second intersection of the line `pq` with the conic: `Q(p)·q − 2B(p,q)·p`.
pub fn star_involution(x: &ProjPoint2, center: &PencilCenter, q: &QuadForm) -> Result<ProjPoint2> {
    let residual = conic_residual(x.coords(), q);
    if residual > ON_CONIC {
        return Err(Error::NotOnConic { residual });
    }
    let p = center.p.coords();
    let v = x.coords() * q.eval(p) - p * (q.bilinear(p, x.coords()) * 2.0);
    Ok(ProjPoint2::new(v).unwrap_or(*x))
}

/// The two conic points whose tangents pass through `p`: the polar line of `p` on the conic.
pub fn tangent_lines_from(center: &PencilCenter, q: &QuadForm, eps_cluster: f64) -> Result<(ProjPoint2, ProjPoint2)> {
    let polar = q.matrix() * center.p.coords();
    let pts = line_conic_points(&polar, q, eps_cluster)?;
    match pts.as_slice() {
        [(a, 1), (b, 1)] => Ok((*a, *b)),
        _ => Err(Error::DegenerateTangency),
    }
}

/// Effective divisor on the conic.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicDivisor {
    pub points: Vec<(ProjPoint2, usize)>,
}

impl ConicDivisor {
    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    /// Equality as multisets up to `tol` in projective distance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let mut used = vec![false; other.points.len()];
        self.points.len() == other.points.len()
            && self.points.iter().all(|(a, m)| {
                match (0..other.points.len())
                    .find(|&j| !used[j] && other.points[j].1 == *m && other.points[j].0.distance(a) <= tol)
                {
                    Some(j) => {
                        used[j] = true;
                        true
                    }
                    None => false,
                }
            })
    }
}

/// Effective divisor on the pencil of lines through `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilDivisor {
    pub points: Vec<(ProjPoint1, usize)>,
}

impl PencilDivisor {
    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    /// Adds `m` at `t`, merging with an existing point within `eps`.
    pub fn push(&mut self, t: ProjPoint1, m: usize, eps: f64) {
        match self.points.iter_mut().find(|(s, _)| s.distance(&t) <= eps) {
            Some((_, k)) => *k += m,
            None => self.points.push((t, m)),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let mut used = vec![false; other.points.len()];
        self.points.len() == other.points.len()
            && self.points.iter().all(|(a, m)| {
                match (0..other.points.len())
                    .find(|&j| !used[j] && other.points[j].1 == *m && other.points[j].0.distance(a) <= tol)
                {
                    Some(j) => {
                        used[j] = true;
                        true
                    }
                    None => false,
                }
            })
    }
}

pub fn project_divisor(d: &ConicDivisor, center: &PencilCenter, eps_cluster: f64) -> PencilDivisor {
    let mut out = PencilDivisor { points: Vec::new() };
    for (x, m) in &d.points {
        out.push(center.coordinate_of_point(x), *m, eps_cluster);
    }
    out
}

/// Every conic divisor projecting to `e`, in product order over the points of `e`.
pub fn fiber_enumerate(
    e: &PencilDivisor,
    center: &PencilCenter,
    q: &QuadForm,
    eps_cluster: f64,
) -> Result<Vec<ConicDivisor>> {
    let mut options: Vec<Vec<Vec<(ProjPoint2, usize)>>> = Vec::with_capacity(e.points.len());
    for (t, m) in &e.points {
        let pts = line_conic_points(&center.line(t), q, eps_cluster)?;
        let choices = match pts.as_slice() {
            [(x, 2)] => vec![vec![(*x, *m)]],
            [(a, 1), (b, 1)] => (0..=*m)
                .rev()
                .map(|j| [(*a, j), (*b, m - j)].into_iter().filter(|(_, k)| *k > 0).collect())
                .collect(),
            _ => return Err(Error::DegenerateTangency),
        };
        options.push(choices);
    }
    let mut out = vec![ConicDivisor { points: Vec::new() }];
    for choices in options {
        out = out
            .into_iter()
            .flat_map(|d| {
                choices.iter().map(move |c| {
                    let mut pts = d.points.clone();
                    pts.extend(c.iter().copied());
                    ConicDivisor { points: pts }
                })
            })
            .collect();
    }
    Ok(out)
}

/// `∏ (a1·u0 − a0·u1)^m` over the points `[a0 : a1]`.
pub fn viete_map(e: &PencilDivisor) -> BinaryForm {
    let clusters: Vec<RootCluster> =
        e.points.iter().map(|&(point, multiplicity)| RootCluster { point, multiplicity }).collect();
    BinaryForm::from_roots(&clusters)
}

pub fn viete_inverse(f: &BinaryForm, eps_cluster: f64) -> Result<PencilDivisor> {
    let roots = roots_projective(f, eps_cluster)?;
    Ok(PencilDivisor { points: roots.into_iter().map(|r| (r.point, r.multiplicity)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HomogPoly;
    use crate::conic::restrict_to_conic;
    use crate::testutil::*;
    use proptest::prelude::*;

    const I: C64 = C64::new(0.0, 1.0);
    const EPS: f64 = 1e-6;

    fn p2(a: C64, b: C64, c: C64) -> ProjPoint2 {
        ProjPoint2::new(CVec3::new(a, b, c)).unwrap()
    }

    fn origin_center(q: &QuadForm) -> PencilCenter {
        PencilCenter::new(p2(ZERO, ZERO, ONE), q).unwrap()
    }

    fn random_center(r: &mut rand_chacha::ChaCha8Rng, q: &QuadForm) -> PencilCenter {
        loop {
            if let Ok(c) = PencilCenter::new(ProjPoint2::new(random_cvec3(r)).unwrap(), q) {
                return c;
            }
        }
    }

    fn random_conic_point(r: &mut rand_chacha::ChaCha8Rng, q: &QuadForm) -> ProjPoint2 {
        conic_param(q).image(&ProjPoint1::new(random_c64(r), random_c64(r)).unwrap())
    }

    /// Generic pencil points: random lines through p, away from the tangent ones.
    fn generic_pencil_points(
        r: &mut rand_chacha::ChaCha8Rng,
        center: &PencilCenter,
        q: &QuadForm,
        n: usize,
    ) -> Vec<ProjPoint1> {
        let (a, b) = tangent_lines_from(center, q, EPS).unwrap();
        let avoid = [center.coordinate_of_point(&a), center.coordinate_of_point(&b)];
        let mut out: Vec<ProjPoint1> = Vec::new();
        while out.len() < n {
            let t = ProjPoint1::new(random_c64(r), random_c64(r)).unwrap();
            if avoid.iter().chain(out.iter()).all(|s| s.distance(&t) > 0.05) {
                out.push(t);
            }
        }
        out
    }

    #[test]
    fn star_examples() {
        let q = QuadForm::sphere();
        let c = origin_center(&q);
        let s = star_involution(&p2(I, ZERO, ONE), &c, &q).unwrap();
        assert!(s.distance(&p2(-I, ZERO, ONE)) < 1e-15);
        let fixed = p2(ONE, I, ZERO);
        assert!(star_involution(&fixed, &c, &q).unwrap().distance(&fixed) < 1e-15);
        assert!(matches!(star_involution(&p2(ONE, ZERO, ZERO), &c, &q), Err(Error::NotOnConic { .. })));
        assert_eq!(PencilCenter::new(p2(I, ZERO, ONE), &q).unwrap_err(), Error::CenterOnConic);
    }

    #[test]
    fn tangent_examples() {
        for q in [QuadForm::sphere(), QuadForm::hyperboloid()] {
            let c = origin_center(&q);
            let (a, b) = tangent_lines_from(&c, &q, EPS).unwrap();
            let expected = [p2(ONE, I, ZERO), p2(ONE, -I, ZERO)];
            for e in expected {
                assert!(a.distance(&e) < 1e-14 || b.distance(&e) < 1e-14);
            }
            assert!(a.distance(&b) > 0.5);
            for t in [a, b] {
                assert!(star_involution(&t, &c, &q).unwrap().distance(&t) < 1e-14);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let q = QuadForm::sphere();
        let c = origin_center(&q);
        let x = p2(I, ZERO, ONE);
        let e = project_divisor(&ConicDivisor { points: vec![(x, 1)] }, &c, EPS);
        assert_eq!(e.degree(), 1);
        let line = c.line(&e.points[0].0);
        let y_line = ProjPoint2::new(CVec3::new(ZERO, ONE, ZERO)).unwrap();
        assert!(ProjPoint2::new(line).unwrap().distance(&y_line) < 1e-14);

        let xs = star_involution(&x, &c, &q).unwrap();
        let e = project_divisor(&ConicDivisor { points: vec![(x, 1), (xs, 1)] }, &c, EPS);
        assert_eq!(e.points.len(), 1);
        assert_eq!(e.points[0].1, 2);
    }

    #[test]
    fn fiber_examples() {
        let q = QuadForm::sphere();
        let c = origin_center(&q);
        let mut r = rng(7);
        let t = generic_pencil_points(&mut r, &c, &q, 3);
        let e = PencilDivisor { points: vec![(t[0], 1), (t[1], 1)] };
        assert_eq!(fiber_enumerate(&e, &c, &q, EPS).unwrap().len(), 4);
        let e = PencilDivisor { points: vec![(t[0], 2), (t[1], 1)] };
        assert_eq!(fiber_enumerate(&e, &c, &q, EPS).unwrap().len(), 6);
        let (a, _) = tangent_lines_from(&c, &q, EPS).unwrap();
        let e = PencilDivisor { points: vec![(c.coordinate_of_point(&a), 1), (t[1], 1), (t[2], 1)] };
        assert_eq!(fiber_enumerate(&e, &c, &q, EPS).unwrap().len(), 4);
    }

    #[test]
    fn viete_examples() {
        let e = PencilDivisor {
            points: vec![(ProjPoint1::new(ZERO, ONE).unwrap(), 1), (ProjPoint1::infinity(), 1)],
        };
        let f = viete_map(&e);
        assert!(f.coeffs()[0].norm() < 1e-15 && f.coeffs()[2].norm() < 1e-15 && f.coeffs()[1].norm() > 0.5);
        let e = PencilDivisor { points: vec![(ProjPoint1::new(ONE, ONE).unwrap(), 2)] };
        let f = viete_map(&e);
        let c0 = f.coeffs()[0];
        let g = [ONE, -ONE * 2.0, ONE];
        assert!(f.coeffs().iter().zip(g).all(|(a, b)| (a - b * c0).norm() < 1e-14));
        assert_eq!(viete_inverse(&BinaryForm::zero(2), EPS), Err(Error::ZeroForm));
    }

    fn product_patterns(d: usize) -> Vec<Vec<usize>> {
        fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rem == 0 {
                out.push(cur.clone());
                return;
            }
            for m in (1..=rem.min(max)).rev() {
                cur.push(m);
                rec(rem - m, m, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(d, d, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn fiber_cardinality_matches_the_product_formula() {
        let mut r = rng(11);
        for q in [QuadForm::sphere(), QuadForm::hyperboloid()] {
            let c = random_center(&mut r, &q);
            let (a, b) = tangent_lines_from(&c, &q, EPS).unwrap();
            let tangent = [c.coordinate_of_point(&a), c.coordinate_of_point(&b)];
            for d in 1..=5 {
                for pattern in product_patterns(d) {
                    for tangents in 0..=pattern.len().min(2) {
                        let generic = generic_pencil_points(&mut r, &c, &q, pattern.len());
                        let points: Vec<(ProjPoint1, usize)> = pattern
                            .iter()
                            .enumerate()
                            .map(|(i, &m)| (if i < tangents { tangent[i] } else { generic[i] }, m))
                            .collect();
                        let expected: usize = points.iter().skip(tangents).map(|(_, m)| m + 1).product();
                        let e = PencilDivisor { points };
                        let fiber = fiber_enumerate(&e, &c, &q, EPS).unwrap();
                        assert_eq!(fiber.len(), expected, "{pattern:?} with {tangents} tangent");
                        for f in &fiber {
                            assert_eq!(f.degree(), d);
                            assert!(project_divisor(f, &c, EPS).approx_eq(&e, 1e-8));
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn star_is_an_involution_fixing_the_tangency_points(seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let c = random_center(&mut r, &q);
            let x = random_conic_point(&mut r, &q);
            let xs = star_involution(&x, &c, &q).unwrap();
            prop_assert!(conic_residual(xs.coords(), &q) < 1e-9);
            prop_assert!(star_involution(&xs, &c, &q).unwrap().distance(&x) < 1e-8);
            let (a, b) = tangent_lines_from(&c, &q, EPS).unwrap();
            let fixed = x.distance(&a) < 1e-6 || x.distance(&b) < 1e-6;
            prop_assert_eq!(xs.distance(&x) < 1e-6, fixed);
            prop_assert!(star_involution(&a, &c, &q).unwrap().distance(&a) < 1e-8);
            prop_assert!(star_involution(&b, &c, &q).unwrap().distance(&b) < 1e-8);
        }

        #[test]
        fn generic_fibers_have_two_to_the_d_elements(d in 1usize..=6, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let c = random_center(&mut r, &q);
            let pts = generic_pencil_points(&mut r, &c, &q, d);
            let e = PencilDivisor { points: pts.into_iter().map(|t| (t, 1)).collect() };
            let fiber = fiber_enumerate(&e, &c, &q, EPS).unwrap();
            prop_assert_eq!(fiber.len(), 1 << d);
            for f in &fiber {
                prop_assert!(project_divisor(f, &c, EPS).approx_eq(&e, 1e-8));
            }
        }

        #[test]
        fn viete_round_trip(d in 1usize..=6, seed in any::<u64>()) {
            let mut r = rng(seed);
            let mut e = PencilDivisor { points: Vec::new() };
            while e.degree() < d {
                let t = ProjPoint1::new(random_c64(&mut r), random_c64(&mut r)).unwrap();
                if e.points.iter().all(|(s, _)| s.distance(&t) > 1e-2) {
                    e.points.push((t, 1));
                }
            }
            let back = viete_inverse(&viete_map(&e).scale(random_c64(&mut r)), EPS).unwrap();
            prop_assert!(back.approx_eq(&e, 1e-8));
        }

        #[test]
        fn pencil_products_determine_their_divisor(d in 1usize..=4, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let c = random_center(&mut r, &q);
            let pts = generic_pencil_points(&mut r, &c, &q, d);
            let e = PencilDivisor { points: pts.iter().map(|&t| (t, 1)).collect() };
            let product = pts
                .iter()
                .fold(HomogPoly::constant(ONE), |acc, t| acc.mul(&HomogPoly::linear(&c.line(t))));
            let param = conic_param(&q);
            let roots = roots_projective(&restrict_to_conic(&product, &param), EPS).unwrap();
            let conic = ConicDivisor {
                points: roots.iter().map(|x| (param.image(&x.point), x.multiplicity)).collect(),
            };
            let doubled = project_divisor(&conic, &c, 1e-7);
            let recovered = PencilDivisor { points: doubled.points.iter().map(|&(t, m)| (t, m / 2)).collect() };
            prop_assert!(doubled.points.iter().all(|(_, m)| m % 2 == 0));
            prop_assert!(recovered.approx_eq(&e, 1e-7));
        }
    }
}
