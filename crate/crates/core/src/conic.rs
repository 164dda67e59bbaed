//! Rational parameterization of the conic `{Q = 0}`, projective points and lines,
//! restriction of polynomials to the conic and projective root finding.

use nalgebra::DMatrix;

use crate::algebra::{CMat3, CVec3, HomogPoly, QuadForm, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Absolute coefficient noise assumed on normalized binary forms.
const COEFF_NOISE: f64 = 1e-13;

fn normalize_in_place(v: &mut [C64]) -> bool {
    let m = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(m > 0.0) || !m.is_finite() {
        return false;
    }
    let i = v.iter().position(|c| c.norm() >= m * (1.0 - 1e-9)).expect("maximum exists");
    let s = v[i];
    for c in v.iter_mut() {
        *c /= s;
    }
    v[i] = ONE;
    true
}

/// `sin` of the Hermitian angle between two nonzero vectors.
fn projective_distance(a: &[C64], b: &[C64]) -> f64 {
    let na: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|c| c.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            wedge += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    (wedge / (na * nb)).sqrt().min(1.0)
}

/// Point of the complex projective plane, max-modulus coordinate scaled to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint2 {
    coords: CVec3,
}

impl ProjPoint2 {
    pub fn new(v: CVec3) -> Option<Self> {
        let mut c = [v[0], v[1], v[2]];
        normalize_in_place(&mut c).then(|| Self { coords: CVec3::new(c[0], c[1], c[2]) })
    }

    pub fn coords(&self) -> &CVec3 {
        &self.coords
    }

    pub fn distance(&self, other: &Self) -> f64 {
        projective_distance(self.coords.as_slice(), other.coords.as_slice())
    }
}

/// Point `[u0 : u1]` of the projective line, normalized like [`ProjPoint2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint1 {
    coords: [C64; 2],
}

impl ProjPoint1 {
    pub fn new(u0: C64, u1: C64) -> Option<Self> {
        let mut c = [u0, u1];
        normalize_in_place(&mut c).then_some(Self { coords: c })
    }

    pub fn infinity() -> Self {
        Self { coords: [ONE, ZERO] }
    }

    pub fn coords(&self) -> [C64; 2] {
        self.coords
    }

    pub fn distance(&self, other: &Self) -> f64 {
        projective_distance(&self.coords, &other.coords)
    }

    /// Quantized key giving a deterministic total order.
    pub fn sort_key(&self) -> [i64; 4] {
        let q = |x: f64| (x * 1e8).round() as i64;
        let [a, b] = self.coords;
        [q(a.re), q(a.im), q(b.re), q(b.im)]
    }
}

/// Binary form `Σ c_k u0^k u1^(n−k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryForm {
    coeffs: Vec<C64>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a binary form has at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![ZERO; degree + 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, u0: C64, u1: C64) -> C64 {
        let n = self.degree();
        let mut acc = ZERO;
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += c * u0.powu(k as u32) * u1.powu((n - k) as u32);
        }
        acc
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// The linear form `a1·u0 − a0·u1` vanishing at `[a0 : a1]`.
    pub fn vanishing_at(p: &ProjPoint1) -> Self {
        let [a0, a1] = p.coords;
        Self { coeffs: vec![-a0, a1] }
    }

    /// Product of linear forms over roots with multiplicity.
    pub fn from_roots(roots: &[RootCluster]) -> Self {
        roots.iter().fold(Self::new(vec![ONE]), |acc, r| {
            (0..r.multiplicity).fold(acc, |a, _| a.mul(&Self::vanishing_at(&r.point)))
        })
    }

    pub fn d_u0(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero(0);
        }
        Self { coeffs: (1..=n).map(|k| self.coeffs[k] * k as f64).collect() }
    }

    pub fn d_u1(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero(0);
        }
        Self { coeffs: (0..n).map(|k| self.coeffs[k] * (n - k) as f64).collect() }
    }

    /// Scaled to unit max-modulus coefficient.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m > 0.0 {
            self.scale(C64::new(1.0 / m, 0.0))
        } else {
            self.clone()
        }
    }
}

/// Root of a binary form with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    pub point: ProjPoint1,
    pub multiplicity: usize,
}

/// The three quadratics `α_j(u)` with `Q(α(u)) ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicParam {
    alphas: [BinaryForm; 3],
    a: CMat3,
}

impl ConicParam {
    pub fn alphas(&self) -> &[BinaryForm; 3] {
        &self.alphas
    }

    pub fn reduction(&self) -> &CMat3 {
        &self.a
    }

    /// The raw vector `α(u)`.
    pub fn eval(&self, u: &ProjPoint1) -> CVec3 {
        let [u0, u1] = u.coords;
        CVec3::new(self.alphas[0].eval(u0, u1), self.alphas[1].eval(u0, u1), self.alphas[2].eval(u0, u1))
    }

    pub fn image(&self, u: &ProjPoint1) -> ProjPoint2 {
        ProjPoint2::new(self.eval(u)).expect("the parameterization has no base points")
    }
}

/// Sphere parameterization composed with `A⁻¹`.
pub fn conic_param(q: &QuadForm) -> ConicParam {
    let i = C64::new(0.0, 1.0);
    let sphere = [
        BinaryForm::new(vec![-i, ZERO, i]),
        BinaryForm::new(vec![ZERO, i * 2.0, ZERO]),
        BinaryForm::new(vec![ONE, ZERO, ONE]),
    ];
    let ai = q.reduction_inverse();
    let alphas = [0, 1, 2].map(|j| {
        (0..3).fold(BinaryForm::zero(2), |acc, k| acc.add(&sphere[k].scale(ai[(k, j)])))
    });
    ConicParam { alphas, a: *q.reduction() }
}

/// `P(α0(u), α1(u), α2(u))` as a binary form of degree `2·deg P`.
pub fn restrict_to_conic(p: &HomogPoly, param: &ConicParam) -> BinaryForm {
    let d = p.degree();
    let pw: Vec<Vec<BinaryForm>> = param
        .alphas
        .iter()
        .map(|a| {
            let mut v = vec![BinaryForm::new(vec![ONE])];
            for k in 1..=d {
                let next = v[k - 1].mul(a);
                v.push(next);
            }
            v
        })
        .collect();
    let mut out = BinaryForm::zero(2 * d);
    for (m, c) in p.terms().filter(|(_, c)| *c != ZERO) {
        let [a, b, e] = m.0;
        let t = pw[0][a].mul(&pw[1][b]).mul(&pw[2][e]);
        out = out.add(&t.scale(c));
    }
    out
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Taylor coefficients `q_j`, `j ≤ m`, of `Σ a_k t^k` at `c`, with rounding bounds.
fn taylor(a: &[C64], c: C64, m: usize, noise: f64) -> Vec<(C64, f64)> {
    let cn = c.norm();
    (0..=m)
        .map(|j| {
            let mut q = ZERO;
            let mut e = 0.0;
            for (k, ak) in a.iter().enumerate().skip(j) {
                let b = binom(k, j);
                q += ak * b * c.powu((k - j) as u32);
                e += b * cn.powi((k - j) as i32);
            }
            (q, e * noise)
        })
        .collect()
}

/// True when the `m` roots near `c` are indistinguishable from an `m`-fold root
/// at the resolution `eps·(1+|c|)`, given coefficient noise.
fn is_multiple_root(a: &[C64], c: C64, m: usize, eps: f64, noise: f64) -> bool {
    if m == 0 || m >= a.len() {
        return m == 0;
    }
    let t = taylor(a, c, m, noise);
    let lead = t[m].0.norm();
    if lead == 0.0 {
        return false;
    }
    let radius = eps * (1.0 + c.norm());
    (0..m).all(|j| {
        let excess = (t[j].0.norm() - t[j].1).max(0.0);
        (excess / lead).powf(1.0 / (m - j) as f64) <= radius
    })
}

fn horner(a: &[C64], t: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in a.iter().rev() {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

fn derivative(a: &[C64]) -> Vec<C64> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn newton_polish(a: &[C64], mut t: C64) -> C64 {
    let (mut p, _) = horner(a, t);
    for _ in 0..30 {
        let (_, dp) = horner(a, t);
        if dp == ZERO {
            break;
        }
        let next = t - p / dp;
        let (pn, _) = horner(a, next);
        if !(pn.norm() < p.norm()) {
            break;
        }
        t = next;
        p = pn;
    }
    t
}

fn single_linkage(points: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = 1.0 + points[i].norm().max(points[j].norm());
            if (points[i] - points[j]).norm() <= radius * s {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Groups roots coarse-to-fine; a group is accepted once it passes the
/// multiple-root test or the radius reaches `eps`.
fn cluster(a: &[C64], roots: &[C64], radius: f64, eps: f64, noise: f64, out: &mut Vec<(C64, usize)>) {
    for g in single_linkage(roots, radius) {
        let members: Vec<C64> = g.iter().map(|&i| roots[i]).collect();
        let m = members.len();
        let center = members.iter().sum::<C64>() / m as f64;
        if m == 1 {
            out.push((newton_polish(a, members[0]), 1));
        } else if radius <= eps || is_multiple_root(a, center, m, eps, noise) {
            out.push((refine_multiple(a, center, m), m));
        } else {
            cluster(a, &members, (radius * 0.1).max(eps), eps, noise, out);
        }
    }
}

/// Newton on the `(m−1)`-th derivative, which has a simple root there.
fn refine_multiple(a: &[C64], c: C64, m: usize) -> C64 {
    let mut d = a.to_vec();
    for _ in 1..m {
        d = derivative(&d);
    }
    if d.len() < 2 {
        return c;
    }
    let polished = newton_polish(&d, c);
    if (polished - c).norm() <= 1e-3 * (1.0 + c.norm()) {
        polished
    } else {
        c
    }
}

/// Eigenvalues of the companion matrix of `Σ a_k t^k`. The QR iteration can stall
/// on symmetric root sets, so stalled attempts retry on `p(t + s)` for a few fixed shifts.
fn companion_roots(a: &[C64]) -> Option<Vec<C64>> {
    let k = a.len() - 1;
    (0..8).find_map(|attempt| {
        let shift = if attempt == 0 { ZERO } else { C64::from_polar(0.1 * attempt as f64, 0.7 + 1.3 * attempt as f64) };
        let b: Vec<C64> = taylor(a, shift, k, 0.0).into_iter().map(|(q, _)| q).collect();
        let lead = b[k];
        let mut comp = DMatrix::<C64>::zeros(k, k);
        for i in 1..k {
            comp[(i, i - 1)] = ONE;
        }
        for i in 0..k {
            comp[(i, k - 1)] = -b[i] / lead;
        }
        let schur = comp.try_schur(f64::EPSILON, 200 * (k + 1))?;
        Some(schur.eigenvalues()?.iter().map(|t| t + shift).collect())
    })
}

/// Roots of a binary form with multiplicities, sorted by [`ProjPoint1::sort_key`].
pub fn roots_projective(p: &BinaryForm, eps_cluster: f64) -> Result<Vec<RootCluster>> {
    roots_projective_with_noise(p, eps_cluster, COEFF_NOISE)
}

/// [`roots_projective`] for coefficients known only to `noise` relative to the largest one.
pub fn roots_projective_with_noise(p: &BinaryForm, eps_cluster: f64, noise: f64) -> Result<Vec<RootCluster>> {
    let scale = p.max_abs();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::ZeroForm);
    }
    let c: Vec<C64> = p.coeffs.iter().map(|x| x / scale).collect();
    let n = c.len() - 1;
    let reversed: Vec<C64> = c.iter().rev().copied().collect();
    let m_inf = (0..=n)
        .rev()
        .find(|&m| is_multiple_root(&reversed, ZERO, m, eps_cluster, noise))
        .unwrap_or(0);
    let affine = &c[..=n - m_inf];
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    let k = affine.len() - 1;
    if k > 0 {
        let raw = companion_roots(affine).ok_or(Error::SolveFailure { residual: f64::INFINITY })?;
        cluster(affine, &raw, 0.1, eps_cluster, noise, &mut clusters);
    }
    let mut out: Vec<RootCluster> = clusters
        .into_iter()
        .map(|(t, m)| RootCluster { point: ProjPoint1::new(t, ONE).expect("finite root"), multiplicity: m })
        .collect();
    if m_inf > 0 {
        out.push(RootCluster { point: ProjPoint1::infinity(), multiplicity: m_inf });
    }
    out.sort_by_key(|r| r.point.sort_key());
    Ok(out)
}

fn on_conic_residual(p: &ProjPoint2, q: &QuadForm) -> f64 {
    let v = p.coords();
    q.eval(v).norm() / (v.norm_squared() * q.matrix().norm())
}

/// Line through two conic points, or the tangent line when they coincide.
pub fn line_through(pa: &ProjPoint2, pb: &ProjPoint2, q: &QuadForm, eps_cluster: f64) -> Result<HomogPoly> {
    for p in [pa, pb] {
        let residual = on_conic_residual(p, q);
        if residual > 1e-9 {
            return Err(Error::NotOnConic { residual });
        }
    }
    if pa.distance(pb) <= eps_cluster {
        Ok(tangent_line(pa, q))
    } else {
        Ok(HomogPoly::linear(&pa.coords().cross(pb.coords())))
    }
}

/// The line `⟨B·p, x⟩ = 0`.
pub fn tangent_line(p: &ProjPoint2, q: &QuadForm) -> HomogPoly {
    HomogPoly::linear(&(q.matrix() * p.coords()))
}

/// Determinant of the Sylvester matrix of two binary forms.
pub fn sylvester_resultant(f: &BinaryForm, g: &BinaryForm) -> C64 {
    sylvester_matrix(f, g).map_or(ONE, |s| s.determinant())
}

fn sylvester_matrix(f: &BinaryForm, g: &BinaryForm) -> Option<DMatrix<C64>> {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    if size == 0 {
        return None;
    }
    let mut s = DMatrix::<C64>::zeros(size, size);
    for i in 0..n {
        for (j, c) in f.coeffs.iter().rev().enumerate() {
            s[(i, i + j)] = *c;
        }
    }
    for i in 0..m {
        for (j, c) in g.coeffs.iter().rev().enumerate() {
            s[(n + i, i + j)] = *c;
        }
    }
    Some(s)
}

/// Resultant of `∂p/∂u0` and `∂p/∂u1`: zero exactly when `p` has a multiple
/// projective root, at `[1:0]` included.
pub fn binary_discriminant(p: &BinaryForm) -> C64 {
    if p.degree() < 2 {
        return ONE;
    }
    sylvester_resultant(&p.d_u0(), &p.d_u1())
}

/// `|binary_discriminant|` over the Hadamard bound of its Sylvester matrix,
/// computed on the normalized form; lies in `[0, 1]`.
pub fn relative_discriminant(p: &BinaryForm) -> f64 {
    let p = p.normalized();
    if p.degree() < 2 {
        return 1.0;
    }
    match sylvester_matrix(&p.d_u0(), &p.d_u1()) {
        None => 1.0,
        Some(s) => {
            let bound: f64 = s.row_iter().map(|r| r.norm()).product();
            if bound == 0.0 {
                0.0
            } else {
                s.determinant().norm() / bound
            }
        }
    }
}

/// Coordinatewise complex conjugate.
pub fn conj_point(p: &ProjPoint2) -> ProjPoint2 {
    ProjPoint2::new(p.coords().map(|c| c.conj())).expect("conjugate of a nonzero vector")
}

/// Line coefficients scaled to a unit max-modulus entry of zero phase, with the scale removed.
pub fn normalize_line(l: &HomogPoly) -> (HomogPoly, C64) {
    let w = l.linear_coeffs();
    let n = ProjPoint2::new(w).expect("nonzero line");
    let k = (0..3).find(|&i| n.coords()[i] == ONE).expect("normalized entry");
    (HomogPoly::linear(n.coords()), w[k])
}
