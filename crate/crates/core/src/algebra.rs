//! Dense trivariate polynomials, quadratic forms and the ellipsoid inner product.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVec3 = Vector3<C64>;
pub type CMat3 = Matrix3<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerances shared by the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol_div: f64,
    pub tol_det: f64,
    pub tol_harm: f64,
    pub tol_fact: f64,
    pub tol_disc: f64,
    pub eps_cluster: f64,
    /// Relative noise assumed in the coefficients of a binary form when testing for multiple roots.
    pub coeff_noise: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_div: 1e-9,
            tol_det: 1e-12,
            tol_harm: 1e-9,
            tol_fact: 1e-8,
            tol_disc: 1e-9,
            eps_cluster: 1e-6,
            coeff_noise: 1e-13,
        }
    }
}

/// Number of monomials of degree `d` in three variables.
pub fn dim(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Exponent triple `x^a y^b z^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub [usize; 3]);

impl Monomial {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Position in graded-lex order (`a` descending, then `b` descending).
    pub fn index(&self) -> usize {
        let [a, b, _] = self.0;
        let r = self.degree() - a;
        r * (r + 1) / 2 + (r - b)
    }
}

/// Monomials of degree `d` in storage order.
pub fn monomials(d: usize) -> impl Iterator<Item = Monomial> {
    (0..=d)
        .rev()
        .flat_map(move |a| (0..=d - a).rev().map(move |b| Monomial([a, b, d - a - b])))
}

/// Homogeneous polynomial of fixed degree with dense complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogPoly {
    degree: usize,
    coeffs: Vec<C64>,
}

impl HomogPoly {
    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![ZERO; dim(degree)] }
    }

    pub fn constant(c: C64) -> Self {
        Self { degree: 0, coeffs: vec![c] }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), dim(degree), "coefficient count does not match degree");
        Self { degree, coeffs }
    }

    pub fn from_terms(degree: usize, terms: &[([usize; 3], C64)]) -> Self {
        let mut p = Self::zero(degree);
        for &(e, c) in terms {
            assert_eq!(e.iter().sum::<usize>(), degree, "term degree mismatch");
            p.coeffs[Monomial(e).index()] += c;
        }
        p
    }

    /// The coordinate function `x`, `y` or `z`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Self::from_terms(1, &[(e, ONE)])
    }

    /// Linear form `w0 x + w1 y + w2 z`.
    pub fn linear(w: &CVec3) -> Self {
        Self::from_coeffs(1, vec![w[0], w[1], w[2]])
    }

    /// Coefficient vector of a linear form.
    pub fn linear_coeffs(&self) -> CVec3 {
        assert_eq!(self.degree, 1);
        CVec3::new(self.coeffs[0], self.coeffs[1], self.coeffs[2])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: Monomial) -> C64 {
        self.coeffs[m.index()]
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, C64)> + '_ {
        monomials(self.degree).zip(self.coeffs.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn re(&self) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| C64::new(c.re, 0.0)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Value at `v` by direct monomial summation.
    pub fn eval(&self, v: &CVec3) -> C64 {
        let pw = powers(v, self.degree);
        self.terms()
            .map(|(m, c)| c * pw[0][m.0[0]] * pw[1][m.0[1]] * pw[2][m.0[2]])
            .sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (ma, ca) in self.terms().filter(|(_, c)| *c != ZERO) {
            for (mb, cb) in other.terms().filter(|(_, c)| *c != ZERO) {
                let e = [ma.0[0] + mb.0[0], ma.0[1] + mb.0[1], ma.0[2] + mb.0[2]];
                out.coeffs[Monomial(e).index()] += ca * cb;
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(ONE), |acc, _| acc.mul(self))
    }

    /// Partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.degree - 1);
        for (m, c) in self.terms() {
            if m.0[i] > 0 {
                let mut e = m.0;
                e[i] -= 1;
                out.coeffs[Monomial(e).index()] += c * m.0[i] as f64;
            }
        }
        out
    }

    /// Directional derivative `Σ u_i ∂_i`.
    pub fn directional(&self, u: &CVec3) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        (0..3).fold(Self::zero(self.degree - 1), |acc, i| &acc + &self.partial(i).scale(u[i]))
    }

    /// The polynomial `v ↦ P(v·M)`.
    pub fn compose_linear(&self, m: &CMat3) -> Self {
        let forms: Vec<Self> = (0..3)
            .map(|j| Self::linear(&CVec3::new(m[(0, j)], m[(1, j)], m[(2, j)])))
            .collect();
        let pw: Vec<Vec<Self>> = forms
            .iter()
            .map(|f| {
                let mut v = vec![Self::constant(ONE)];
                for k in 1..=self.degree {
                    let next = v[k - 1].mul(f);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(self.degree);
        for (mono, c) in self.terms().filter(|(_, c)| *c != ZERO) {
            let [a, b, cc] = mono.0;
            let t = pw[0][a].mul(&pw[1][b]).mul(&pw[2][cc]);
            out = &out + &t.scale(c);
        }
        out
    }
}

fn powers(v: &CVec3, d: usize) -> [Vec<C64>; 3] {
    let row = |x: C64| {
        let mut p = vec![ONE; d + 1];
        for k in 1..=d {
            p[k] = p[k - 1] * x;
        }
        p
    };
    [row(v[0]), row(v[1]), row(v[2])]
}

impl Add for &HomogPoly {
    type Output = HomogPoly;
    fn add(self, rhs: &HomogPoly) -> HomogPoly {
        assert_eq!(self.degree, rhs.degree, "adding polynomials of different degree");
        HomogPoly {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &HomogPoly {
    type Output = HomogPoly;
    fn sub(self, rhs: &HomogPoly) -> HomogPoly {
        assert_eq!(self.degree, rhs.degree, "subtracting polynomials of different degree");
        HomogPoly {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &HomogPoly {
    type Output = HomogPoly;
    fn neg(self) -> HomogPoly {
        self.scale(-ONE)
    }
}

impl Mul for &HomogPoly {
    type Output = HomogPoly;
    fn mul(self, rhs: &HomogPoly) -> HomogPoly {
        HomogPoly::mul(self, rhs)
    }
}

/// `poly_mul` as a free function.
pub fn poly_mul(p: &HomogPoly, s: &HomogPoly) -> HomogPoly {
    p.mul(s)
}

/// General polynomial stored as graded parts `parts[k]` of degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    parts: Vec<HomogPoly>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { parts: vec![HomogPoly::zero(0)] }
    }

    pub fn constant(c: C64) -> Self {
        Self { parts: vec![HomogPoly::constant(c)] }
    }

    pub fn from_homog(h: HomogPoly) -> Self {
        let mut parts: Vec<HomogPoly> = (0..h.degree).map(HomogPoly::zero).collect();
        parts.push(h);
        Self { parts }
    }

    pub fn from_parts(parts: Vec<HomogPoly>) -> Self {
        assert!(!parts.is_empty(), "a polynomial has at least a constant part");
        for (k, p) in parts.iter().enumerate() {
            assert_eq!(p.degree, k, "graded part has the wrong degree");
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[HomogPoly] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> Option<&HomogPoly> {
        self.parts.get(k)
    }

    /// Storage degree (index of the last part, which may be zero).
    pub fn degree(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn eval(&self, v: &CVec3) -> C64 {
        self.parts.iter().map(|p| p.eval(v)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.parts.iter().map(|p| p.norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_imag(&self) -> f64 {
        self.parts.iter().map(HomogPoly::max_imag).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { parts: self.parts.iter().map(|p| p.scale(s)).collect() }
    }

    /// Adds a homogeneous part into the matching grade.
    pub fn add_homog(&mut self, h: &HomogPoly) {
        while self.parts.len() <= h.degree {
            let k = self.parts.len();
            self.parts.push(HomogPoly::zero(k));
        }
        self.parts[h.degree] = &self.parts[h.degree] + h;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for p in &other.parts {
            out.add_homog(p);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }
}

impl From<HomogPoly> for Poly {
    fn from(h: HomogPoly) -> Self {
        Self::from_homog(h)
    }
}

/// Evaluation of either polynomial flavour.
pub trait PolyEval {
    fn poly_eval(&self, v: &CVec3) -> C64;
}

impl PolyEval for HomogPoly {
    fn poly_eval(&self, v: &CVec3) -> C64 {
        self.eval(v)
    }
}

impl PolyEval for Poly {
    fn poly_eval(&self, v: &CVec3) -> C64 {
        self.eval(v)
    }
}

pub fn poly_eval<P: PolyEval + ?Sized>(p: &P, v: &CVec3) -> C64 {
    p.poly_eval(v)
}

/// Splits `P` into its even-degree and odd-degree parts.
pub fn grade_split(p: &Poly) -> (Poly, Poly) {
    let pick = |parity: usize| Poly {
        parts: p
            .parts
            .iter()
            .map(|h| if h.degree % 2 == parity { h.clone() } else { HomogPoly::zero(h.degree) })
            .collect(),
    };
    (pick(0), pick(1))
}

/// Multiplies each graded part by the power of `Q` lifting it to the top degree.
pub fn homogenize_on_quadric(p: &Poly, q: &QuadForm) -> Result<(HomogPoly, usize)> {
    let present: Vec<&HomogPoly> = p.parts.iter().filter(|h| !h.is_zero()).collect();
    let Some(top) = present.iter().map(|h| h.degree).max() else {
        return Ok((HomogPoly::zero(0), 0));
    };
    let parity = top % 2;
    if present.iter().any(|h| h.degree % 2 != parity) {
        return Err(Error::MixedParity);
    }
    let qp = q.as_poly();
    let mut out = HomogPoly::zero(top);
    for h in present {
        out = &out + &h.mul(&qp.pow((top - h.degree) / 2));
    }
    Ok((out, parity))
}

/// Nondegenerate symmetric form `Q(v) = v·B·vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    b: CMat3,
    b_inv: CMat3,
    a: CMat3,
    a_inv: CMat3,
    is_real: bool,
    signature: Option<i32>,
}

impl QuadForm {
    pub fn new(b: CMat3) -> Result<Self> {
        Self::with_tolerance(b, Tolerances::default().tol_det)
    }

    pub fn with_tolerance(b: CMat3, tol_det: f64) -> Result<Self> {
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let asym = (b - b.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric);
        }
        let det = b.determinant().norm();
        if det <= tol_det * scale.powi(3) {
            return Err(Error::Degenerate { det });
        }
        let b_inv = b.try_inverse().ok_or(Error::Degenerate { det })?;
        let is_real = b.iter().all(|c| c.im.abs() <= 1e-15 * scale);
        let signature = is_real.then(|| {
            let re = b.map(|c| c.re);
            let eig = SymmetricEigen::new(re);
            eig.eigenvalues.iter().map(|l| l.signum() as i32).sum()
        });
        let a = symmetric_reduce(&b);
        let a_inv = a.try_inverse().ok_or(Error::Degenerate { det })?;
        Ok(Self { b, b_inv, a, a_inv, is_real, signature })
    }

    pub fn from_real(m: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(CMat3::from_fn(|i, j| C64::new(m[i][j], 0.0)))
    }

    /// `x² + y² + z²`.
    pub fn sphere() -> Self {
        Self::from_real([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).expect("identity form")
    }

    /// `x² + y² − z²`.
    pub fn hyperboloid() -> Self {
        Self::from_real([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]).expect("diagonal form")
    }

    pub fn matrix(&self) -> &CMat3 {
        &self.b
    }

    pub fn inverse(&self) -> &CMat3 {
        &self.b_inv
    }

    /// Reduction matrix `A` with `A·Aᵀ = B`.
    pub fn reduction(&self) -> &CMat3 {
        &self.a
    }

    pub fn reduction_inverse(&self) -> &CMat3 {
        &self.a_inv
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn signature(&self) -> Option<i32> {
        self.signature
    }

    /// Real and positive or negative definite.
    pub fn is_definite(&self) -> bool {
        matches!(self.signature, Some(s) if s.abs() == 3)
    }

    pub fn eval(&self, v: &CVec3) -> C64 {
        self.bilinear(v, v)
    }

    /// `p·B·qᵀ`.
    pub fn bilinear(&self, p: &CVec3, q: &CVec3) -> C64 {
        (self.b * q).dot(p)
    }

    pub fn as_poly(&self) -> HomogPoly {
        let b = &self.b;
        HomogPoly::from_terms(
            2,
            &[
                ([2, 0, 0], b[(0, 0)]),
                ([0, 2, 0], b[(1, 1)]),
                ([0, 0, 2], b[(2, 2)]),
                ([1, 1, 0], b[(0, 1)] + b[(1, 0)]),
                ([1, 0, 1], b[(0, 2)] + b[(2, 0)]),
                ([0, 1, 1], b[(1, 2)] + b[(2, 1)]),
            ],
        )
    }

    /// `∇_u Q = 2⟨u·B, x⟩` as a linear form.
    pub fn gradient_along(&self, u: &CVec3) -> HomogPoly {
        HomogPoly::linear(&(self.b.transpose() * u * C64::new(2.0, 0.0)))
    }

    /// Point on the ellipsoid `{Q = 1}` over the unit-sphere point `s`.
    pub fn ellipsoid_point(&self, s: &CVec3) -> CVec3 {
        self.a_inv.transpose() * s
    }
}

/// Returns `A` with `A·Aᵀ = B`.
pub fn quad_reduce(q: &QuadForm) -> CMat3 {
    q.a
}

/// Symmetric elimination with largest-pivot choice. When every remaining
/// diagonal entry is small against an off-diagonal one, rows `q` and `r` are
/// first combined so the pivot becomes `B_qq ± 2B_qr + B_rr`.
fn symmetric_reduce(b: &CMat3) -> CMat3 {
    let mut m = *b;
    let mut g = CMat3::identity();
    let mut out = CMat3::zeros();
    let mut used = [false; 3];
    for _ in 0..3 {
        let free: Vec<usize> = (0..3).filter(|&i| !used[i]).collect();
        let mut p = free[0];
        for &i in &free {
            if m[(i, i)].norm() > m[(p, p)].norm() {
                p = i;
            }
        }
        let mut off = (0, 0, 0.0);
        for (k, &i) in free.iter().enumerate() {
            for &j in &free[k + 1..] {
                if m[(i, j)].norm() > off.2 {
                    off = (i, j, m[(i, j)].norm());
                }
            }
        }
        if m[(p, p)].norm() < 0.5 * off.2 {
            let (i, j, _) = off;
            let plus = m[(i, i)] + m[(i, j)] * 2.0 + m[(j, j)];
            let minus = m[(i, i)] - m[(i, j)] * 2.0 + m[(j, j)];
            let s = if plus.norm() >= minus.norm() { ONE } else { -ONE };
            let mut t = CMat3::identity();
            t[(i, j)] = s;
            m = t * m * t.transpose();
            g = t * g;
            out = t * out;
            p = i;
        }
        let pivot = m[(p, p)];
        let root = C64::new(pivot.re, if pivot.im == 0.0 { 0.0 } else { pivot.im }).sqrt();
        let col = m.column(p) / root;
        m -= col * col.transpose();
        out.set_column(p, &col);
        used[p] = true;
    }
    g.try_inverse().expect("elementary transforms are invertible") * out
}

/// Least-squares solve of `Q·R = P` followed by a residual check against `‖P‖`.
pub fn divide_by_quadric(p: &HomogPoly, q: &QuadForm, tol_div: f64) -> Result<HomogPoly> {
    divide_by_quadric_scaled(p, q, p.norm(), tol_div)
}

/// As [`divide_by_quadric`], with the residual measured against `reference`.
pub fn divide_by_quadric_scaled(
    p: &HomogPoly,
    q: &QuadForm,
    reference: f64,
    tol_div: f64,
) -> Result<HomogPoly> {
    let d = p.degree;
    if d < 2 {
        return if p.is_zero() {
            Ok(HomogPoly::zero(0))
        } else {
            Err(Error::NotDivisible { residual: 1.0 })
        };
    }
    if reference == 0.0 || p.is_zero() {
        return Ok(HomogPoly::zero(d - 2));
    }
    let m = multiplication_matrix(&q.as_poly(), d - 2);
    let rhs = DVector::from_column_slice(&p.coeffs);
    let sol = least_squares(&m, &rhs).ok_or(Error::SolveFailure { residual: f64::INFINITY })?;
    let residual = (&m * &sol - &rhs).norm() / reference;
    if !(residual <= tol_div) {
        return Err(Error::NotDivisible { residual });
    }
    Ok(HomogPoly::from_coeffs(d - 2, sol.iter().copied().collect()))
}

/// Full-column-rank least squares through a Householder QR factorization.
pub(crate) fn least_squares(m: &DMatrix<C64>, rhs: &DVector<C64>) -> Option<DVector<C64>> {
    let qr = m.clone().qr();
    let qtb = qr.q().adjoint() * rhs;
    qr.r().solve_upper_triangular(&qtb)
}

/// Matrix of `R ↦ S·R` from `V(k)` to `V(k + deg S)`.
pub(crate) fn multiplication_matrix(s: &HomogPoly, k: usize) -> DMatrix<C64> {
    let rows = dim(k + s.degree);
    let mut m = DMatrix::zeros(rows, dim(k));
    for (j, mono) in monomials(k).enumerate() {
        let col = s.mul(&HomogPoly::from_terms(k, &[(mono.0, ONE)]));
        for (i, c) in col.coeffs.iter().enumerate() {
            m[(i, j)] = *c;
        }
    }
    m
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Closed form of `∫_{S²} x^a y^b z^c dm`.
pub fn monomial_sphere_integral(a: usize, b: usize, c: usize) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let num = double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1) * double_factorial(c as i64 - 1);
    4.0 * PI * num / double_factorial((a + b + c) as i64 + 1)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Tensor rule on the unit sphere: uniform in θ, Gauss–Legendre in cos φ.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<(f64, f64)>,
    weights: Vec<f64>,
    points: Vec<[f64; 3]>,
    exact_degree: usize,
}

impl QuadratureRule {
    pub fn new(exact_degree: usize) -> Self {
        let n_theta = exact_degree + 1;
        let n_phi = (exact_degree + 2) / 2;
        let (mu, wmu) = gauss_legendre(n_phi);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = 2.0 * PI * i as f64 / n_theta as f64;
            for (m, wm) in mu.iter().zip(&wmu) {
                let phi = m.acos();
                let sp = (1.0 - m * m).max(0.0).sqrt();
                nodes.push((theta, phi));
                weights.push(2.0 * PI / n_theta as f64 * wm);
                points.push([theta.cos() * sp, theta.sin() * sp, *m]);
            }
        }
        Self { nodes, weights, points, exact_degree }
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cartesian unit-sphere points matching `nodes`.
    pub fn sphere_points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Nodes pulled back to the ellipsoid `{Q = 1}`.
    pub fn ellipsoid_points(&self, q: &QuadForm) -> Vec<CVec3> {
        self.points
            .iter()
            .map(|s| q.ellipsoid_point(&CVec3::new(s[0].into(), s[1].into(), s[2].into())))
            .collect()
    }

    pub fn integrate_real(&self, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Weighted Hermitian product of two sample vectors.
    pub fn dot(&self, f: &[C64], g: &[C64]) -> C64 {
        self.weights.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| a * b.conj() * *w).sum()
    }
}

/// Hermitian product over the ellipsoid `{Q = 1}`.
pub fn inner_product(f: &HomogPoly, g: &HomogPoly, q: &QuadForm, rule: &QuadratureRule) -> Result<C64> {
    let required = f.degree + g.degree;
    if rule.exact_degree < required {
        return Err(Error::InsufficientQuadrature { required, available: rule.exact_degree });
    }
    let pts = rule.ellipsoid_points(q);
    let fs: Vec<C64> = pts.iter().map(|v| f.eval(v)).collect();
    let gs: Vec<C64> = pts.iter().map(|v| g.eval(v)).collect();
    Ok(rule.dot(&fs, &gs))
}
