//! JSON schemas of the command line interface.

use multipole::algebra::{dim, Monomial};
use multipole::conic::{ProjPoint1, ProjPoint2, RootCluster};
use multipole::deconstruct::MultipoleSequence;
use multipole::planar::{ConicDivisor, PencilDivisor};
use multipole::sylvester::{Multipole, MultipoleFactorization};
use multipole::{CMat3, CVec3, HomogPoly, Poly, QuadForm, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::CliError;

pub type Complex = [f64; 2];

pub fn complex(c: C64) -> Complex {
    [c.re, c.im]
}

pub fn to_c64(c: Complex) -> C64 {
    C64::new(c[0], c[1])
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Pair(Complex),
}

impl From<Number> for C64 {
    fn from(n: Number) -> Self {
        match n {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Pair(p) => to_c64(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exp: [usize; 3],
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub degree: usize,
    pub terms: Vec<Term>,
}

impl PolyJson {
    pub fn from_homog(p: &HomogPoly) -> Self {
        Self { degree: p.degree(), terms: homog_terms(p) }
    }

    pub fn from_poly(p: &Poly) -> Self {
        Self { degree: p.degree(), terms: p.parts().iter().flat_map(homog_terms).collect() }
    }

    fn parts(&self) -> Result<Vec<HomogPoly>, CliError> {
        let mut parts: Vec<Vec<C64>> = (0..=self.degree).map(|k| vec![C64::new(0.0, 0.0); dim(k)]).collect();
        for t in &self.terms {
            let k: usize = t.exp.iter().sum();
            if k > self.degree {
                return Err(CliError::Parse(format!("term {:?} exceeds the declared degree {}", t.exp, self.degree)));
            }
            parts[k][Monomial(t.exp).index()] += C64::new(t.re, t.im);
        }
        Ok(parts.into_iter().enumerate().map(|(k, c)| HomogPoly::from_coeffs(k, c)).collect())
    }

    pub fn to_poly(&self) -> Result<Poly, CliError> {
        Ok(Poly::from_parts(self.parts()?))
    }

    /// The polynomial when every term has the declared degree.
    pub fn to_homog(&self) -> Result<HomogPoly, CliError> {
        let mut parts = self.parts()?;
        if parts[..self.degree].iter().any(|p| !p.is_zero()) {
            return Err(CliError::Parse(format!("polynomial is not homogeneous of degree {}", self.degree)));
        }
        Ok(parts.pop().expect("degree part"))
    }
}

fn homog_terms(p: &HomogPoly) -> Vec<Term> {
    p.terms()
        .filter(|(_, c)| *c != C64::new(0.0, 0.0))
        .map(|(m, c)| Term { exp: m.0, re: c.re, im: c.im })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadJson {
    #[serde(rename = "B")]
    pub b: [[Number; 3]; 3],
    #[serde(default)]
    pub real: Option<bool>,
}

impl QuadJson {
    pub fn to_quadform(&self) -> Result<QuadForm, CliError> {
        let m = CMat3::from_fn(|i, j| self.b[i][j].into());
        let q = QuadForm::new(m).map_err(CliError::Core)?;
        if self.real == Some(true) && !q.is_real() {
            return Err(CliError::Parse("quadric declared real has complex entries".into()));
        }
        Ok(q)
    }
}

pub type Vector = [Complex; 3];

pub fn vector(v: &CVec3) -> Vector {
    [complex(v[0]), complex(v[1]), complex(v[2])]
}

pub fn to_cvec3(v: &[Number; 3]) -> CVec3 {
    CVec3::new(v[0].into(), v[1].into(), v[2].into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipoleJson {
    pub lambda: Complex,
    pub lines: Vec<Vector>,
}

impl MultipoleJson {
    pub fn new(m: &Multipole) -> Self {
        Self { lambda: complex(m.lambda), lines: m.lines.iter().map(vector).collect() }
    }

    pub fn to_multipole(&self) -> Multipole {
        Multipole {
            lambda: to_c64(self.lambda),
            lines: self.lines.iter().map(|l| CVec3::new(to_c64(l[0]), to_c64(l[1]), to_c64(l[2]))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationJson {
    pub lambda: Complex,
    pub lines: Vec<Vector>,
    pub remainder: PolyJson,
    pub parcelling: Vec<[usize; 2]>,
}

impl FactorizationJson {
    pub fn new(f: &MultipoleFactorization) -> Self {
        Self {
            lambda: complex(f.lambda),
            lines: f.lines.iter().map(|l| vector(&l.linear_coeffs())).collect(),
            remainder: PolyJson::from_homog(&f.remainder),
            parcelling: f.parcelling.pieces().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// `λ·∏L + Q·R`.
    pub fn reconstruct(&self, q: &QuadForm) -> Result<HomogPoly, CliError> {
        let product = self.lines.iter().fold(HomogPoly::constant(to_c64(self.lambda)), |acc, l| {
            acc.mul(&HomogPoly::linear(&CVec3::new(to_c64(l[0]), to_c64(l[1]), to_c64(l[2]))))
        });
        if self.lines.len() < 2 {
            return Ok(product);
        }
        Ok(&product + &q.as_poly().mul(&self.remainder.to_homog()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceJson {
    pub lambda: Complex,
    pub terms: BTreeMap<usize, MultipoleJson>,
}

impl SequenceJson {
    pub fn new(s: &MultipoleSequence) -> Self {
        Self {
            lambda: complex(s.lambda),
            terms: s
                .terms
                .iter()
                .enumerate()
                .filter_map(|(i, m)| m.as_ref().map(|m| (i + 1, MultipoleJson::new(m))))
                .collect(),
        }
    }

    pub fn to_sequence(&self) -> MultipoleSequence {
        let d = self.terms.keys().max().copied().unwrap_or(0);
        let mut terms = vec![None; d];
        for (k, m) in &self.terms {
            terms[k - 1] = Some(m.to_multipole());
        }
        MultipoleSequence { lambda: to_c64(self.lambda), terms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootJson {
    pub u: [Complex; 2],
    pub mult: usize,
}

impl RootJson {
    pub fn new(r: &RootCluster) -> Self {
        let [a, b] = r.point.coords();
        Self { u: [complex(a), complex(b)], mult: r.multiplicity }
    }

    pub fn to_pencil_point(&self) -> Result<ProjPoint1, CliError> {
        ProjPoint1::new(to_c64(self.u[0]), to_c64(self.u[1]))
            .ok_or_else(|| CliError::Parse("pencil point [0:0]".into()))
    }
}

pub fn pencil_divisor_json(e: &PencilDivisor) -> Vec<RootJson> {
    e.points
        .iter()
        .map(|&(point, multiplicity)| RootJson::new(&RootCluster { point, multiplicity }))
        .collect()
}

pub fn pencil_divisor(points: &[RootJson]) -> Result<PencilDivisor, CliError> {
    Ok(PencilDivisor { points: points.iter().map(|r| Ok((r.to_pencil_point()?, r.mult))).collect::<Result<_, CliError>>()? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConicPointJson {
    pub point: Vector,
    pub mult: usize,
}

pub fn conic_divisor_json(d: &ConicDivisor) -> Vec<ConicPointJson> {
    d.points.iter().map(|(p, m)| ConicPointJson { point: vector(p.coords()), mult: *m }).collect()
}

pub fn conic_divisor(points: &[ConicPointJson]) -> Result<ConicDivisor, CliError> {
    let pts = points
        .iter()
        .map(|c| {
            let v = CVec3::new(to_c64(c.point[0]), to_c64(c.point[1]), to_c64(c.point[2]));
            ProjPoint2::new(v).map(|p| (p, c.mult)).ok_or_else(|| CliError::Parse("zero conic point".into()))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(ConicDivisor { points: pts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_forms() {
        let v: Vec<Number> = serde_json::from_str("[1.5, [0, -2]]").unwrap();
        assert_eq!(C64::from(v[0]), C64::new(1.5, 0.0));
        assert_eq!(C64::from(v[1]), C64::new(0.0, -2.0));
    }

    #[test]
    fn poly_round_trip() {
        let text = r#"{"degree":2,"terms":[{"exp":[0,0,0],"re":3},{"exp":[1,0,1],"im":2},{"exp":[0,2,0],"re":1,"im":1}]}"#;
        let p: PolyJson = serde_json::from_str(text).unwrap();
        let poly = p.to_poly().unwrap();
        assert_eq!(poly.part(1).map(|h| h.is_zero()), Some(true));
        let back = PolyJson::from_poly(&poly);
        assert_eq!(back.to_poly().unwrap().sub(&poly).norm(), 0.0);
        assert!(p.to_homog().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let p: PolyJson = serde_json::from_str(r#"{"degree":1,"terms":[{"exp":[1,1,0],"re":1}]}"#).unwrap();
        assert!(matches!(p.to_poly(), Err(CliError::Parse(_))));
        assert!(serde_json::from_str::<PolyJson>(r#"{"degree":1,"terms":[],"extra":0}"#).is_err());
        let q: QuadJson = serde_json::from_str(r#"{"B":[[1,0,0],[0,1,0],[0,0,0]]}"#).unwrap();
        assert!(matches!(q.to_quadform(), Err(CliError::Core(_))));
        let q: QuadJson = serde_json::from_str(r#"{"B":[[1,0,0],[0,[1,1],0],[0,0,1]],"real":true}"#).unwrap();
        assert!(matches!(q.to_quadform(), Err(CliError::Parse(_))));
    }

    #[test]
    fn sequence_keys_are_degrees() {
        let m = Multipole { lambda: C64::new(2.0, 0.0), lines: vec![CVec3::new(1.0.into(), 0.0.into(), 0.0.into())] };
        let s = MultipoleSequence { lambda: C64::new(1.0, 0.0), terms: vec![Some(m), None] };
        let j = SequenceJson::new(&s);
        assert_eq!(j.terms.keys().copied().collect::<Vec<_>>(), vec![1]);
        let back = j.to_sequence();
        assert_eq!(back.terms.len(), 1);
        assert_eq!(back.terms[0].as_ref().unwrap().lambda, C64::new(2.0, 0.0));
    }
}
