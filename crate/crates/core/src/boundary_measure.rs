//! Cylinder measures on the boundary, quasi-regular coefficients and the
//! Herz majorization check.
//!
//! The spectral measure of `v` gives the cylinder `∂Γ(z)` the mass
//! `⟨α(1_{∂Γ(z)})v, v⟩`. For `|z| ≥ depth(v)` this is `B_{last z}(v(z), v(z))`
//! by compatibility; shorter stems sum the contiguous block of seeds below.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::multrep::{coefficient, Backend, MultVector};
use crate::par::Execution;
use crate::words::{multiply, Alphabet, Letter, Word};

enum Source {
    Spectral(MultVector),
    Uniform(Alphabet),
}

/// A finitely additive measure on boundary cylinders, memoized by stem.
pub struct CylinderMeasure {
    source: Source,
    cache: RwLock<HashMap<Word, f64>>,
}

impl std::fmt::Debug for CylinderMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.source {
            Source::Spectral(_) => "spectral",
            Source::Uniform(_) => "uniform",
        };
        f.debug_struct("CylinderMeasure").field("kind", &kind).finish()
    }
}

impl CylinderMeasure {
    pub fn spectral(v: &MultVector) -> Self {
        CylinderMeasure { source: Source::Spectral(v.clone()), cache: RwLock::new(HashMap::new()) }
    }

    /// `μ(∂Γ(x)) = |A|⁻¹ (|A| − 1)^{1 − |x|}`.
    pub fn uniform(alphabet: &Alphabet) -> Self {
        CylinderMeasure { source: Source::Uniform(alphabet.clone()), cache: RwLock::new(HashMap::new()) }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match &self.source {
            Source::Spectral(v) => v.alphabet(),
            Source::Uniform(a) => a,
        }
    }

    /// Mass of the cylinder with stem `z`; the empty stem gives the total.
    pub fn measure(&self, z: &Word) -> f64 {
        if let Some(&m) = self.cache.read().expect("cache lock").get(z) {
            return m;
        }
        let m = self.compute(z);
        self.cache.write().expect("cache lock").insert(z.clone(), m);
        m
    }

    pub fn total(&self) -> f64 {
        self.measure(&Word::identity())
    }

    fn compute(&self, z: &Word) -> f64 {
        match &self.source {
            Source::Uniform(al) => {
                if z.is_empty() {
                    1.0
                } else {
                    let n = al.len() as f64;
                    (n - 1.0).powi(1 - z.len() as i32) / n
                }
            }
            Source::Spectral(v) => {
                let al = v.alphabet();
                if z.len() >= v.depth() {
                    let a = z.last().expect("nonempty");
                    let x = v.eval(z).expect("deep enough");
                    return quadratic(v, &x, a);
                }
                let block = (al.len() - 1).pow((v.depth() - z.len()) as u32);
                let (start, count) = if z.is_empty() {
                    (0, al.sphere_size(v.depth()).expect("within cap") as usize)
                } else {
                    (al.sphere_index(z) * block, block)
                };
                let mut acc = 0.0;
                for i in start..start + count {
                    let w = al.sphere_word(v.depth(), i);
                    let a = w.last().expect("nonempty");
                    let x = v.eval(&w).expect("at depth");
                    acc += quadratic(v, &x, a);
                }
                acc.max(0.0)
            }
        }
    }
}

fn quadratic(v: &MultVector, x: &CVector, a: Letter) -> f64 {
    (x.adjoint() * v.system().forms().get(a) * x)[(0, 0)].re.max(0.0)
}

/// `φ_N(x) = Σ_{|C| = N} sqrt(μ(x·C) μ(C))`, requiring `N ≥ |x| + 1` so that
/// each `x·C` is a single cylinder.
pub fn quasi_regular_coefficient(mu: &CylinderMeasure, x: &Word, n: usize) -> Result<f64> {
    quasi_regular_coefficient_with(mu, x, n, Execution::default())
}

pub fn quasi_regular_coefficient_with(mu: &CylinderMeasure, x: &Word, n: usize, exec: Execution) -> Result<f64> {
    if n < x.len() + 1 {
        return Err(Error::Precondition(format!("depth {n} is below |x| + 1 = {}", x.len() + 1)));
    }
    let al = mu.alphabet().clone();
    let size = al.check_cap(n)?;
    let chunk = size.div_ceil(64).max(1);
    let ranges: Vec<(usize, usize)> = (0..size).step_by(chunk).map(|s| (s, (s + chunk).min(size))).collect();
    let parts = exec.map(ranges, |(lo, hi)| {
        let mut acc = 0.0;
        for i in lo..hi {
            let c = al.sphere_word(n, i);
            let mc = mu.measure(&c);
            if mc > 0.0 {
                acc += (mu.measure(&multiply(&al, x, &c)) * mc).sqrt();
            }
        }
        acc
    });
    Ok(parts.iter().sum())
}

/// Ratios `μ(x·C)/μ(C)` on the depth-`N` partition, where `μ(C) > 0`.
#[derive(Clone, Debug)]
pub struct RnApprox {
    pub x: Word,
    pub depth: usize,
    pub ratios: Vec<(Word, f64)>,
}

pub fn rn_approx(mu: &CylinderMeasure, x: &Word, n: usize) -> Result<RnApprox> {
    if n < x.len() + 1 {
        return Err(Error::Precondition(format!("depth {n} is below |x| + 1 = {}", x.len() + 1)));
    }
    let al = mu.alphabet().clone();
    al.check_cap(n)?;
    let ratios = al
        .sphere(n)
        .filter_map(|c| {
            let m = mu.measure(&c);
            (m > 0.0).then(|| {
                let r = mu.measure(&multiply(&al, x, &c)) / m;
                (c, r)
            })
        })
        .collect();
    Ok(RnApprox { x: x.clone(), depth: n, ratios })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HerzReport {
    pub x: Word,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl HerzReport {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Absolute slack allowed in [`herz_check`].
pub const HERZ_SLACK: f64 = 1e-9;

/// `|⟨π(x)v, v⟩| ≤ φ_N(x)` for the spectral measure of `v`.
pub fn herz_check(v: &MultVector, x: &Word, n: usize) -> Result<HerzReport> {
    let mu = CylinderMeasure::spectral(v);
    herz_check_with(v, &mu, x, n)
}

/// As [`herz_check`], reusing a spectral measure of `v`.
pub fn herz_check_with(v: &MultVector, mu: &CylinderMeasure, x: &Word, n: usize) -> Result<HerzReport> {
    let rhs = quasi_regular_coefficient(mu, x, n)?;
    let lhs = coefficient(x, v, v, Backend::Fast)?.norm();
    Ok(HerzReport { x: x.clone(), n, lhs, rhs, pass: lhs <= rhs + HERZ_SLACK })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoRow {
    pub n: usize,
    pub word_length: usize,
    pub phi: f64,
}

/// `φ_{|wⁿ|+1}(wⁿ)` for `n = 1..=max_power`.
pub fn no_harish_chandra_demo(mu: &CylinderMeasure, w: &Word, max_power: usize) -> Result<Vec<DemoRow>> {
    if w.is_empty() {
        return Err(Error::Precondition("the word must not be the identity".into()));
    }
    let al = mu.alphabet().clone();
    let mut p = Word::identity();
    let mut out = Vec::with_capacity(max_power);
    for n in 1..=max_power {
        p = multiply(&al, &p, w);
        let phi = quasi_regular_coefficient(mu, &p, p.len() + 1)?;
        out.push(DemoRow { n, word_length: p.len(), phi });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::multrep::SystemWithForms;
    use crate::system::{FormTuple, MatrixSystem};

    fn spherical_f() -> MultVector {
        let s = MatrixSystem::spherical(2, 1.0 / 3f64.sqrt());
        let b = FormTuple::scalar(s.dims(), 1.0);
        let sys = SystemWithForms::new(s, b).unwrap().shared();
        MultVector::seed_at(sys, &Word::letter(0), CVector::from_element(1, C64::new(1.0, 0.0))).unwrap()
    }

    fn w(s: &str) -> Word {
        Alphabet::standard(2).parse_word(s).unwrap()
    }

    #[test]
    fn spectral_masses() {
        let mu = CylinderMeasure::spectral(&spherical_f());
        assert!((mu.measure(&w("a")) - 1.0).abs() < 1e-15);
        assert_eq!(mu.measure(&w("b")), 0.0);
        for z in ["aa", "ab", "aB"] {
            assert!((mu.measure(&w(z)) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((mu.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quasi_regular_values() {
        let mu = CylinderMeasure::spectral(&spherical_f());
        let phi2 = quasi_regular_coefficient(&mu, &w("a"), 2).unwrap();
        assert!((phi2 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let phi3 = quasi_regular_coefficient(&mu, &w("a"), 3).unwrap();
        assert!(phi3 <= phi2 + 1e-12);
        assert!((quasi_regular_coefficient(&mu, &w("e"), 4).unwrap() - 1.0).abs() < 1e-12);
        assert!(quasi_regular_coefficient(&mu, &w("ab"), 2).is_err());
    }

    #[test]
    fn herz_equality_case() {
        let r = herz_check(&spherical_f(), &w("a"), 2).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((r.rhs - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn demo_decreases() {
        let mu = CylinderMeasure::spectral(&spherical_f());
        let rows = no_harish_chandra_demo(&mu, &w("a"), 5).unwrap();
        assert!(rows[0].phi < 1.0);
        assert!(rows.windows(2).all(|p| p[1].phi < p[0].phi));
        let uni = CylinderMeasure::uniform(&Alphabet::standard(2));
        let rows = no_harish_chandra_demo(&uni, &w("ab"), 4).unwrap();
        assert!(rows.iter().all(|r| r.phi < 1.0));
        assert!(rows.windows(2).all(|p| p[1].phi < p[0].phi));
        assert!(no_harish_chandra_demo(&uni, &w("e"), 3).is_err());
    }
}
