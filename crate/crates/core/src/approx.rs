//! `L²` projection of sampled functions on the ellipsoid `{Q = 1}` into `Q`-harmonic bands,
//! and the multipole series of the bands.

use rayon::prelude::*;

use crate::algebra::{monomials, CVec3, HomogPoly, QuadForm, QuadratureRule, Tolerances, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicProjector;
use crate::sylvester::{canonical_factor, real_factor, Multipole};

/// Extra quadrature exactness recommended on top of `2·d_max` for non-polynomial inputs.
pub const QUADRATURE_MARGIN: usize = 16;

/// Bands below this fraction of `‖f‖` carry the zero multipole.
const ZERO_BAND: f64 = 1e-12;

const GS_DROP: f64 = 1e-8;

/// Harmonic part of a degree-`k` polynomial; degrees below two are harmonic already.
fn harmonic_part(p: &HomogPoly, projector: Option<&HarmonicProjector>, tol: &Tolerances) -> Result<HomogPoly> {
    match projector {
        Some(pr) => Ok(pr.project(p, tol.tol_harm)?.0),
        None => Ok(p.clone()),
    }
}

fn projector(q: &QuadForm, k: usize) -> Option<HarmonicProjector> {
    (k >= 2).then(|| HarmonicProjector::new(q, k))
}

fn sample_norm(rule: &QuadratureRule, s: &[C64]) -> f64 {
    rule.dot(s, s).re.max(0.0).sqrt()
}

/// Orthonormal basis of one harmonic band, as polynomials and as samples at the nodes.
#[derive(Debug, Clone)]
struct BandBasis {
    polys: Vec<HomogPoly>,
    samples: Vec<Vec<C64>>,
}

impl BandBasis {
    fn new(q: &QuadForm, k: usize, rule: &QuadratureRule, pts: &[CVec3], tol: &Tolerances) -> Result<Self> {
        let projector = projector(q, k);
        let target = 2 * k + 1;
        let mut basis = Self { polys: Vec::with_capacity(target), samples: Vec::with_capacity(target) };
        for m in monomials(k) {
            if basis.polys.len() == target {
                break;
            }
            let mut h = harmonic_part(&HomogPoly::from_terms(k, &[(m.0, ONE)]), projector.as_ref(), tol)?;
            let mut s: Vec<C64> = pts.iter().map(|v| h.eval(v)).collect();
            let start = sample_norm(rule, &s);
            if start == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for (e, es) in basis.polys.iter().zip(&basis.samples) {
                    let c = rule.dot(&s, es);
                    s.iter_mut().zip(es).for_each(|(a, b)| *a -= c * b);
                    h = &h - &e.scale(c);
                }
            }
            let n = sample_norm(rule, &s);
            if n > GS_DROP * start {
                let inv = C64::new(1.0 / n, 0.0);
                basis.polys.push(h.scale(inv));
                basis.samples.push(s.into_iter().map(|a| a * inv).collect());
            }
        }
        if basis.polys.len() != target {
            return Err(Error::SolveFailure { residual: 1.0 - basis.polys.len() as f64 / target as f64 });
        }
        Ok(basis)
    }
}

/// Orthonormal bases of `Har_Q(k)`, `k = 0..=d_max`, under the quadrature product on the ellipsoid.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    rule: QuadratureRule,
    points: Vec<CVec3>,
    bands: Vec<BandBasis>,
}

impl HarmonicBasis {
    pub fn new(q: &QuadForm, d_max: usize, rule: &QuadratureRule, tol: &Tolerances) -> Result<Self> {
        let required = 2 * d_max;
        if rule.exact_degree() < required {
            return Err(Error::InsufficientQuadrature { required, available: rule.exact_degree() });
        }
        let points = rule.ellipsoid_points(q);
        let bands = (0..=d_max)
            .into_par_iter()
            .map(|k| BandBasis::new(q, k, rule, &points, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rule: rule.clone(), points, bands })
    }

    pub fn d_max(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn points(&self) -> &[CVec3] {
        &self.points
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Orthonormal basis of band `k`.
    pub fn band(&self, k: usize) -> &[HomogPoly] {
        &self.bands[k].polys
    }

    pub fn sample(&self, f: impl Fn(&CVec3) -> C64 + Sync + Send) -> Vec<C64> {
        self.points.par_iter().map(&f).collect()
    }

    pub fn project(&self, f: impl Fn(&CVec3) -> C64 + Sync + Send) -> BandDecomposition {
        self.project_samples(&self.sample(f))
    }

    pub fn project_samples(&self, fs: &[C64]) -> BandDecomposition {
        let (bands, band_samples): (Vec<HomogPoly>, Vec<Vec<C64>>) = self
            .bands
            .par_iter()
            .enumerate()
            .map(|(k, b)| {
                let mut poly = HomogPoly::zero(k);
                let mut samples = vec![ZERO; fs.len()];
                for (e, es) in b.polys.iter().zip(&b.samples) {
                    let c = self.rule.dot(fs, es);
                    poly = &poly + &e.scale(c);
                    samples.iter_mut().zip(es).for_each(|(a, x)| *a += c * x);
                }
                (poly, samples)
            })
            .unzip();
        let band_norms: Vec<f64> = band_samples.iter().map(|s| sample_norm(&self.rule, s)).collect();
        let mut rest = fs.to_vec();
        for s in &band_samples {
            rest.iter_mut().zip(s).for_each(|(a, b)| *a -= b);
        }
        BandDecomposition {
            bands,
            band_norms,
            norm: sample_norm(&self.rule, fs),
            residual_norm: sample_norm(&self.rule, &rest),
        }
    }

    /// `‖f − Σ g_k‖` over the nodes.
    pub fn l2_distance(&self, f: impl Fn(&CVec3) -> C64 + Sync + Send, gs: &[HomogPoly]) -> f64 {
        let diff = self.sample(|v| f(v) - gs.iter().map(|g| g.eval(v)).sum::<C64>());
        sample_norm(&self.rule, &diff)
    }
}

/// `f ≈ Σ_k f_k` with `f_k ∈ Har_Q(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    pub bands: Vec<HomogPoly>,
    pub band_norms: Vec<f64>,
    /// `‖f‖`.
    pub norm: f64,
    /// `‖f − Σ f_k‖`, measured on the samples.
    pub residual_norm: f64,
}

impl BandDecomposition {
    pub fn d_max(&self) -> usize {
        self.bands.len() - 1
    }

    /// `‖f‖² − Σ ‖f_k‖²`.
    pub fn parseval_gap(&self) -> f64 {
        self.norm * self.norm - self.band_norms.iter().map(|n| n * n).sum::<f64>()
    }
}

pub fn l2_project(
    f: impl Fn(&CVec3) -> C64 + Sync + Send,
    q: &QuadForm,
    d_max: usize,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<BandDecomposition> {
    Ok(HarmonicBasis::new(q, d_max, rule, tol)?.project(f))
}

pub fn parseval_gap(decomp: &BandDecomposition) -> f64 {
    decomp.parseval_gap()
}

/// One multipole per band; `None` is the zero multipole. `norms[k]` is `‖λ∏L‖` on the ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMultipoles {
    pub multipoles: Vec<Option<Multipole>>,
    pub norms: Vec<f64>,
}

impl SeriesMultipoles {
    /// Harmonic projections `Φ_Q(w_k)` of the band multipoles.
    pub fn reconstruct(&self, q: &QuadForm, tol: &Tolerances) -> Result<Vec<HomogPoly>> {
        self.multipoles
            .iter()
            .enumerate()
            .map(|(k, w)| match w {
                None => Ok(HomogPoly::zero(k)),
                Some(w) => harmonic_part(&w.to_poly(), projector(q, k).as_ref(), tol),
            })
            .collect()
    }
}

/// Band coefficients carry rounding noise of order `ε·‖f‖`, which is large relative to small bands.
const BAND_NOISE: f64 = 1e-13;

/// Bands are factored to an accuracy relative to `‖f‖`: the coefficient noise and the residual
/// tolerance both grow like `‖f‖ / ‖f_k‖`. Real bands over a real definite quadric use the
/// real factorization when it exists.
fn factor_band(fk: &HomogPoly, norm_k: f64, norm_f: f64, q: &QuadForm, real_q: bool, tol: &Tolerances) -> Result<Multipole> {
    let noise = tol.coeff_noise.max(BAND_NOISE * norm_f / norm_k);
    let t = Tolerances { coeff_noise: noise, tol_fact: tol.tol_fact.max(1e3 * noise), ..*tol };
    let real = real_q && fk.max_imag() <= 1e-12 * fk.norm();
    let f = match real.then(|| real_factor(&fk.re(), q, &t)) {
        Some(Ok(f)) => f,
        _ => canonical_factor(fk, q, &t)?,
    };
    Ok(f.multipole())
}

/// Factors each band with [`factor_band`].
pub fn multipole_series(decomp: &BandDecomposition, basis: &HarmonicBasis, q: &QuadForm, tol: &Tolerances) -> Result<SeriesMultipoles> {
    let zero = ZERO_BAND * decomp.norm;
    let real_q = q.is_real() && q.is_definite();
    let results: Vec<Result<(Option<Multipole>, f64)>> = decomp
        .bands
        .par_iter()
        .zip(&decomp.band_norms)
        .map(|(fk, &nk)| {
            if nk <= zero {
                return Ok((None, 0.0));
            }
            let w = if fk.degree() == 0 {
                Multipole { lambda: fk.coeffs()[0], lines: Vec::new() }
            } else if fk.degree() == 1 {
                Multipole::new(ONE, std::slice::from_ref(fk))
            } else {
                factor_band(fk, nk, decomp.norm, q, real_q, tol)?
            };
            let rho = sample_norm(&basis.rule, &basis.sample(|v| w.eval(v)));
            Ok((Some(w), rho))
        })
        .collect();
    let mut multipoles = Vec::with_capacity(results.len());
    let mut norms = Vec::with_capacity(results.len());
    for r in results {
        let (w, n) = r?;
        multipoles.push(w);
        norms.push(n);
    }
    Ok(SeriesMultipoles { multipoles, norms })
}

/// The sequence `ρ(w_k, 0)²` and its partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Corollary20Stat {
    pub rho_sq: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

pub fn corollary20_stat(s: &SeriesMultipoles) -> Corollary20Stat {
    let rho_sq: Vec<f64> = s.norms.iter().map(|n| n * n).collect();
    let partial_sums = rho_sq
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    Corollary20Stat { rho_sq, partial_sums }
}
