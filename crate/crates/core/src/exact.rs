//! Exact arithmetic in a real quadratic field `Q(√d)`.
//!
//! Systems whose maps and forms have entries `p + q√d` with rational `p, q`
//! (for instance the spherical system with `H = √3/3`) can be checked for
//! exact compatibility and have their brute-force coefficients computed
//! without rounding.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::multrep::brute::{self, Kernel, Seeds};
use crate::multrep::MultVector;
use crate::par::Execution;
use crate::scalar::{Dense, Ring};
use crate::system::{FormTuple, MatrixSystem};
use crate::words::{Alphabet, Word};

/// `rational + irrational·√radicand`. Elements with a zero irrational part
/// combine with any radicand.
#[derive(Clone, Debug)]
pub struct QuadSurd {
    rational: BigRational,
    irrational: BigRational,
    radicand: i64,
}

impl QuadSurd {
    pub fn new(rational: BigRational, irrational: BigRational, radicand: i64) -> Self {
        QuadSurd { rational, irrational, radicand }
    }

    pub fn rational(q: BigRational) -> Self {
        QuadSurd { rational: q, irrational: BigRational::zero(), radicand: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::rational)
            .ok_or_else(|| Error::Exact(format!("{x} is not finite")))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irrational
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    fn radicand_with(&self, other: &Self) -> i64 {
        if self.irrational.is_zero() {
            other.radicand
        } else {
            debug_assert!(other.irrational.is_zero() || other.radicand == self.radicand);
            self.radicand
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.irrational.is_zero() {
            r
        } else {
            r + self.irrational.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
        }
    }

    /// Parses `"p/q"`, an integer or float JSON number, or
    /// `{"rational": "p/q", "sqrt": "r/s"}` meaning `p/q + (r/s)·√d`.
    pub fn from_json(v: &Value, radicand: i64) -> Result<Self> {
        match v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Self::from_int(i))
                } else {
                    Self::from_f64(n.as_f64().unwrap_or(f64::NAN))
                }
            }
            Value::String(s) => parse_rational(s).map(Self::rational),
            Value::Object(m) => {
                let part = |key: &str| -> Result<BigRational> {
                    match m.get(key) {
                        None => Ok(BigRational::zero()),
                        Some(Value::String(s)) => parse_rational(s),
                        Some(Value::Number(n)) => n
                            .as_i64()
                            .map(|i| BigRational::from_integer(BigInt::from(i)))
                            .ok_or_else(|| Error::Parse(format!("`{key}` must be an integer or a fraction string"))),
                        Some(other) => Err(Error::Parse(format!("invalid exact part {other}"))),
                    }
                };
                for key in m.keys() {
                    if key != "rational" && key != "sqrt" {
                        return Err(Error::Parse(format!("unknown exact field `{key}`")));
                    }
                }
                Ok(QuadSurd::new(part("rational")?, part("sqrt")?, radicand))
            }
            other => Err(Error::Parse(format!("invalid exact entry {other}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        if self.irrational.is_zero() {
            Value::String(self.rational.to_string())
        } else {
            serde_json::json!({"rational": self.rational.to_string(), "sqrt": self.irrational.to_string()})
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| Error::Parse(format!("invalid rational `{s}`")))?;
    let d: BigInt = den.parse().map_err(|_| Error::Parse(format!("invalid rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        self.rational == other.rational
            && self.irrational == other.irrational
            && (self.irrational.is_zero() || self.radicand == other.radicand)
    }
}

impl Eq for QuadSurd {}

impl Ring for QuadSurd {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    fn add(&self, other: &Self) -> Self {
        QuadSurd {
            rational: &self.rational + &other.rational,
            irrational: &self.irrational + &other.irrational,
            radicand: self.radicand_with(other),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.radicand_with(other);
        let dd = BigRational::from_integer(BigInt::from(d));
        QuadSurd {
            rational: &self.rational * &other.rational + &self.irrational * &other.irrational * dd,
            irrational: &self.rational * &other.irrational + &self.irrational * &other.rational,
            radicand: d,
        }
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.irrational.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}√{}", self.irrational, self.radicand),
            (false, false) => {
                let sign = if self.irrational.is_negative() { '-' } else { '+' };
                write!(f, "{} {sign} {}√{}", self.rational, self.irrational.abs(), self.radicand)
            }
        }
    }
}

/// A matrix system with forms over `Q(√radicand)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSystem {
    alphabet: Alphabet,
    dims: Vec<usize>,
    radicand: i64,
    maps: Vec<Dense<QuadSurd>>,
    forms: Vec<Dense<QuadSurd>>,
}

impl ExactSystem {
    /// `maps[b * n + a]` is `H_ba`; inverse pairs must be zero.
    pub fn new(
        alphabet: Alphabet,
        dims: Vec<usize>,
        radicand: i64,
        maps: Vec<Dense<QuadSurd>>,
        forms: Vec<Dense<QuadSurd>>,
    ) -> Result<Self> {
        let n = alphabet.len();
        if radicand < 1 {
            return Err(Error::Exact("radicand must be a positive integer".into()));
        }
        if dims.len() != n || maps.len() != n * n || forms.len() != n {
            return Err(Error::Shape("exact system tables have the wrong length".into()));
        }
        for b in 0..n {
            for a in 0..n {
                let m = &maps[b * n + a];
                if (m.rows, m.cols) != (dims[b], dims[a]) {
                    return Err(Error::Shape(format!(
                        "exact map {}|{} has the wrong shape",
                        alphabet.name(b),
                        alphabet.name(a)
                    )));
                }
                if alphabet.inverse(a) == b && !m.is_zero() {
                    return Err(Error::Exact(format!(
                        "exact map {}|{} must vanish",
                        alphabet.name(b),
                        alphabet.name(a)
                    )));
                }
            }
        }
        for (a, m) in forms.iter().enumerate() {
            if (m.rows, m.cols) != (dims[a], dims[a]) {
                return Err(Error::Shape(format!("exact form at `{}` has the wrong shape", alphabet.name(a))));
            }
        }
        let all = maps.iter().chain(&forms).flat_map(|m| m.data.iter());
        for z in all {
            if !z.irrational.is_zero() && z.radicand != radicand {
                return Err(Error::Exact("entries use different radicands".into()));
            }
        }
        Ok(ExactSystem { alphabet, dims, radicand, maps, forms })
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn map(&self, b: usize, a: usize) -> &Dense<QuadSurd> {
        &self.maps[b * self.alphabet.len() + a]
    }

    pub fn form(&self, a: usize) -> &Dense<QuadSurd> {
        &self.forms[a]
    }

    /// Whether `B_a = Σ_b H_baᵀ B_b H_ba` holds exactly.
    pub fn is_exactly_compatible(&self) -> bool {
        let al = &self.alphabet;
        for a in al.letters() {
            let d = self.dims[a];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = QuadSurd::zero();
                    for b in al.letters() {
                        let h = self.map(b, a);
                        let bb = &self.forms[b];
                        for r in 0..self.dims[b] {
                            for s in 0..self.dims[b] {
                                let t = h.get(r, i).mul(bb.get(r, s)).mul(h.get(s, j));
                                acc = acc.add(&t);
                            }
                        }
                    }
                    if !acc.add(&neg(self.forms[a].get(i, j))).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_float(&self) -> (MatrixSystem, FormTuple) {
        let conv = |m: &Dense<QuadSurd>| CMatrix::from_fn(m.rows, m.cols, |i, j| C64::new(m.get(i, j).to_f64(), 0.0));
        let system = MatrixSystem::new(self.alphabet.clone(), self.dims.clone(), self.maps.iter().map(conv).collect())
            .expect("shapes checked on construction");
        let forms = FormTuple::new(self.forms.iter().map(conv).collect());
        (system, forms)
    }

    pub fn kernel(&self) -> Kernel<QuadSurd> {
        Kernel {
            alphabet: self.alphabet.clone(),
            dims: self.dims.clone(),
            maps: self.maps.clone(),
            forms: self.forms.clone(),
        }
    }
}

fn neg(x: &QuadSurd) -> QuadSurd {
    QuadSurd::new(-x.rational.clone(), -x.irrational.clone(), x.radicand)
}

fn exact_seeds(f: &MultVector) -> Result<Vec<QuadSurd>> {
    f.values()
        .iter()
        .map(|z| {
            if z.im != 0.0 {
                Err(Error::Exact("exact mode needs real vector entries".into()))
            } else {
                QuadSurd::from_f64(z.re)
            }
        })
        .collect()
}

/// `⟨π(x)f, g⟩` by the literal sphere sum in exact arithmetic. The seeds of
/// `f` and `g` are read as the exact binary values of their doubles.
pub fn exact_coefficient(x: &Word, f: &MultVector, g: &MultVector, exec: Execution) -> Result<QuadSurd> {
    let exact = f
        .system()
        .exact()
        .ok_or_else(|| Error::Exact("the system carries no exact data".into()))?;
    if !std::sync::Arc::ptr_eq(f.system(), g.system()) && f.system().system() != g.system().system() {
        return Err(Error::SystemMismatch);
    }
    if !exact.is_exactly_compatible() {
        return Err(Error::Exact("forms are not exactly compatible".into()));
    }
    let kern = exact.kernel();
    let fs = exact_seeds(f)?;
    let gs = exact_seeds(g)?;
    brute::coefficient(
        &kern,
        x,
        Seeds { depth: f.depth(), stride: f.stride(), values: &fs },
        Seeds { depth: g.depth(), stride: g.stride(), values: &gs },
        exec,
    )
}

/// Spherical system of the given rank with `H = √(2r−1)/(2r−1)` and unit forms.
pub fn spherical(rank: usize) -> ExactSystem {
    let alphabet = Alphabet::standard(rank);
    let n = alphabet.len();
    let q = (n - 1) as i64;
    let h = QuadSurd::new(BigRational::zero(), BigRational::new(BigInt::one(), BigInt::from(q)), q);
    let mut maps = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            let v = if alphabet.inverse(a) == b { QuadSurd::zero() } else { h.clone() };
            maps.push(Dense { rows: 1, cols: 1, data: vec![v] });
        }
    }
    let forms = vec![Dense { rows: 1, cols: 1, data: vec![QuadSurd::from_int(1)] }; n];
    ExactSystem::new(alphabet, vec![1; n], q, maps, forms).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, ONE};
    use crate::multrep::SystemWithForms;

    #[test]
    fn field_arithmetic() {
        let r3 = QuadSurd::new(BigRational::zero(), BigRational::one(), 3);
        assert_eq!(r3.square(), QuadSurd::from_int(3));
        let x = QuadSurd::from_json(&serde_json::json!({"rational": "1/2", "sqrt": "-1/3"}), 3).unwrap();
        assert_eq!(x.to_string(), "1/2 - 1/3√3");
        assert!((x.to_f64() - (0.5 - 3f64.sqrt() / 3.0)).abs() < 1e-15);
        assert_eq!(QuadSurd::from_json(&serde_json::json!("3/6"), 3).unwrap(), QuadSurd::from_f64(0.5).unwrap());
        assert!(QuadSurd::from_json(&serde_json::json!("1/0"), 3).is_err());
    }

    #[test]
    fn spherical_coefficient_is_exact() {
        let ex = spherical(2);
        assert!(ex.is_exactly_compatible());
        let (s, b) = ex.to_float();
        let sys = SystemWithForms::new(s, b).unwrap().with_exact(ex).unwrap().shared();
        let a = sys.alphabet().parse_word("a").unwrap();
        let f = MultVector::seed_at(sys.clone(), &a, CVector::from_element(1, ONE)).unwrap();
        let c = exact_coefficient(&a, &f, &f, Execution::Sequential).unwrap();
        assert_eq!(c.square(), QuadSurd::rational(BigRational::new(BigInt::one(), BigInt::from(3))));
        let e = exact_coefficient(&Word::identity(), &f, &f, Execution::Parallel).unwrap();
        assert_eq!(e, QuadSurd::from_int(1));
    }

    #[test]
    fn inexact_forms_are_detected() {
        let mut ex = spherical(2);
        ex.forms[0] = Dense { rows: 1, cols: 1, data: vec![QuadSurd::from_int(2)] };
        assert!(!ex.is_exactly_compatible());
    }
}
