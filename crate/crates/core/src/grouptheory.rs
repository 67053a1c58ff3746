//! Character table of the C3v double group (the group of the Λ line) with
//! exact Gaussian-integer characters, direct products and decomposition.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Order of the C3v double group.
pub const GROUP_ORDER: i64 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("class structure mismatch: {0} vs {1} classes")]
    ClassMismatch(usize, usize),
    #[error("not a representation: multiplicity of {irrep} is {numerator}/{denominator}")]
    NotARepresentation {
        irrep: String,
        numerator: String,
        denominator: i64,
    },
    #[error("character {0} is not a Gaussian integer within tolerance")]
    NonIntegral(String),
    #[error("unknown irrep `{0}`")]
    UnknownIrrep(String),
}

/// a + bi with integer a, b.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt::new(0, 0);
    pub const ONE: GaussInt = GaussInt::new(1, 0);
    pub const I: GaussInt = GaussInt::new(0, 1);

    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: i64) -> Self {
        Self { re, im: 0 }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    /// Nearest Gaussian integer if within `tol` of `z`.
    pub fn from_complex(z: Complex64, tol: f64) -> Option<Self> {
        let g = Self::new(z.re.round() as i64, z.im.round() as i64);
        ((g.to_complex() - z).norm() <= tol).then_some(g)
    }
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for GaussInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Mul<i64> for GaussInt {
    type Output = Self;
    fn mul(self, s: i64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re, self.im) {
            (r, 0) => write!(f, "{r}"),
            (0, 1) => f.write_str("i"),
            (0, -1) => f.write_str("-i"),
            (0, i) => write!(f, "{i}i"),
            (r, i) if i < 0 => write!(f, "{r}-{}i", -i),
            (r, i) => write!(f, "{r}+{i}i"),
        }
    }
}

impl Serialize for GaussInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub label: &'static str,
    /// Common alternative notation.
    pub alias: &'static str,
    pub size: i64,
}

/// Characters per conjugacy class, in the table's class order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RepVector {
    pub characters: Vec<GaussInt>,
}

impl RepVector {
    pub fn new(characters: Vec<GaussInt>) -> Self {
        Self { characters }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| GaussInt::real(v)).collect())
    }

    /// Round measured characters to Gaussian integers (tolerance `tol`).
    pub fn from_complex(values: &[Complex64], tol: f64) -> Result<Self, GroupError> {
        values
            .iter()
            .map(|&z| GaussInt::from_complex(z, tol).ok_or_else(|| GroupError::NonIntegral(format!("{z}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    pub fn dimension(&self) -> GaussInt {
        self.characters[0]
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn add(&self, other: &RepVector) -> Result<RepVector, GroupError> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(&self, other: &RepVector, f: impl Fn(GaussInt, GaussInt) -> GaussInt) -> Result<RepVector, GroupError> {
        if self.len() != other.len() {
            return Err(GroupError::ClassMismatch(self.len(), other.len()));
        }
        Ok(RepVector::new(
            self.characters.iter().zip(&other.characters).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }
}

impl fmt::Display for RepVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.characters.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Irrep {
    pub name: &'static str,
    pub characters: RepVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterTable {
    pub classes: Vec<ClassInfo>,
    pub irreps: Vec<Irrep>,
}

/// The C3v double-group table. Classes: E, Ē, 2C₃, 2C̄₃, 3I×C₂, 3I×C̄₂.
pub fn builtin_table() -> CharacterTable {
    let g = GaussInt::real;
    let i = GaussInt::I;
    let classes = vec![
        ClassInfo { label: "E", alias: "E", size: 1 },
        ClassInfo { label: "Ē", alias: "Ebar", size: 1 },
        ClassInfo { label: "2C₃", alias: "2C3", size: 2 },
        ClassInfo { label: "2C̄₃", alias: "2C3bar", size: 2 },
        ClassInfo { label: "3I×C₂", alias: "3σᵥ", size: 3 },
        ClassInfo { label: "3I×C̄₂", alias: "3σ̄ᵥ", size: 3 },
    ];
    let row = |name, c: [GaussInt; 6]| Irrep { name, characters: RepVector::new(c.to_vec()) };
    let irreps = vec![
        row("Λ₁", [g(1), g(1), g(1), g(1), g(1), g(1)]),
        row("Λ₂", [g(1), g(1), g(1), g(1), g(-1), g(-1)]),
        row("Λ₃", [g(2), g(2), g(-1), g(-1), g(0), g(0)]),
        row("Λ₄", [g(1), g(-1), g(-1), g(1), i, -i]),
        row("Λ₅", [g(1), g(-1), g(-1), g(1), -i, i]),
        row("Λ₆", [g(2), g(-2), g(1), g(-1), g(0), g(0)]),
    ];
    CharacterTable { classes, irreps }
}

/// Spin-½ representation D₁/₂ restricted to the double group.
pub fn spinor_rep() -> RepVector {
    RepVector::from_ints(&[2, -2, 1, -1, 0, 0])
}

/// Regular representation (|G| on E, zero elsewhere).
pub fn regular_rep() -> RepVector {
    RepVector::from_ints(&[GROUP_ORDER, 0, 0, 0, 0, 0])
}

/// Classwise character product.
pub fn product(a: &RepVector, b: &RepVector) -> Result<RepVector, GroupError> {
    a.zip(b, |x, y| x * y)
}

impl CharacterTable {
    pub fn order(&self) -> i64 {
        self.classes.iter().map(|c| c.size).sum()
    }

    pub fn irrep(&self, name: &str) -> Result<&Irrep, GroupError> {
        let want = normalise_name(name);
        self.irreps
            .iter()
            .find(|r| normalise_name(r.name) == want)
            .ok_or_else(|| GroupError::UnknownIrrep(name.to_string()))
    }

    /// Σ_c size·a(c)·conj(b(c)), exact.
    pub fn weighted_inner(&self, a: &RepVector, b: &RepVector) -> Result<GaussInt, GroupError> {
        if a.len() != self.classes.len() {
            return Err(GroupError::ClassMismatch(a.len(), self.classes.len()));
        }
        if b.len() != self.classes.len() {
            return Err(GroupError::ClassMismatch(b.len(), self.classes.len()));
        }
        Ok(self
            .classes
            .iter()
            .zip(a.characters.iter().zip(&b.characters))
            .fold(GaussInt::ZERO, |acc, (c, (&x, &y))| acc + x * y.conj() * c.size))
    }

    /// max |⟨χᵢ, χⱼ⟩ − δᵢⱼ| with the 1/|G| class-weighted inner product.
    pub fn row_orthogonality_error(&self) -> f64 {
        let g = self.order() as f64;
        let mut err: f64 = 0.0;
        for (i, a) in self.irreps.iter().enumerate() {
            for (j, b) in self.irreps.iter().enumerate() {
                let v = self.weighted_inner(&a.characters, &b.characters).expect("table is consistent");
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((v.to_complex() / g - want).norm());
            }
        }
        err
    }

    /// max |Σᵢ χᵢ(c) conj χᵢ(c′) − δ_cc′ |G|/size(c)| scaled by 1/|G|.
    pub fn column_orthogonality_error(&self) -> f64 {
        let g = self.order();
        let mut err: f64 = 0.0;
        for c in 0..self.classes.len() {
            for d in 0..self.classes.len() {
                let s = self.irreps.iter().fold(GaussInt::ZERO, |acc, r| {
                    acc + r.characters.characters[c] * r.characters.characters[d].conj()
                });
                let want = if c == d { g / self.classes[c].size } else { 0 };
                err = err.max(((s - GaussInt::real(want)).to_complex() / g as f64).norm());
            }
        }
        err
    }

    /// Σ dim² over the irreps.
    pub fn sum_dim_squared(&self) -> i64 {
        self.irreps.iter().map(|r| r.characters.dimension().re.pow(2)).sum()
    }

    /// Multiplicity of each irrep in `rep`; errors unless every multiplicity
    /// is a non-negative integer.
    pub fn decompose(&self, rep: &RepVector) -> Result<Decomposition, GroupError> {
        let g = self.order();
        let mut terms = Vec::with_capacity(self.irreps.len());
        for irrep in &self.irreps {
            let s = self.weighted_inner(rep, &irrep.characters)?;
            if s.im != 0 || s.re % g != 0 || s.re < 0 {
                return Err(GroupError::NotARepresentation {
                    irrep: irrep.name.to_string(),
                    numerator: s.to_string(),
                    denominator: g,
                });
            }
            terms.push((irrep.name, (s.re / g) as u32));
        }
        Ok(Decomposition { terms })
    }

    /// Σ mᵢ χᵢ.
    pub fn recompose(&self, d: &Decomposition) -> RepVector {
        let mut acc = RepVector::new(vec![GaussInt::ZERO; self.classes.len()]);
        for (name, m) in &d.terms {
            let irrep = self.irrep(name).expect("decomposition names come from the table");
            for (a, &c) in acc.characters.iter_mut().zip(&irrep.characters.characters) {
                *a = *a + c * i64::from(*m);
            }
        }
        acc
    }

    /// Aligned text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<6}", ""));
        for c in &self.classes {
            out.push_str(&format!("{:>9}", c.label));
        }
        out.push('\n');
        for r in &self.irreps {
            out.push_str(&format!("{:<6}", r.name));
            for ch in &r.characters.characters {
                out.push_str(&format!("{:>9}", ch.to_string()));
            }
            out.push('\n');
        }
        out
    }
}

fn normalise_name(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '₁' => '1',
            '₂' => '2',
            '₃' => '3',
            '₄' => '4',
            '₅' => '5',
            '₆' => '6',
            'Λ' => 'L',
            c => c,
        })
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .replace("Lambda", "L")
        .replace("lambda", "L")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub terms: Vec<(&'static str, u32)>,
}

impl Decomposition {
    pub fn multiplicity(&self, name: &str) -> u32 {
        let want = normalise_name(name);
        self.terms
            .iter()
            .find(|(n, _)| normalise_name(n) == want)
            .map_or(0, |(_, m)| *m)
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .filter(|(_, m)| *m > 0)
            .map(|(n, m)| if *m == 1 { n.to_string() } else { format!("{m}{n}") })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" ⊕ "))
        }
    }
}

/// Spinor Λ-line labels distinguishable by the C3 character alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LambdaLabel {
    /// Λ₆ pairs only.
    Lambda6,
    /// Λ₄ ⊕ Λ₅ pairs only.
    Lambda45,
    /// Accidental degeneracy containing both.
    Mixed,
    /// Character inconsistent with a spinor representation.
    Unresolved,
}

impl fmt::Display for LambdaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LambdaLabel::Lambda6 => "Λ₆",
            LambdaLabel::Lambda45 => "Λ₄+Λ₅",
            LambdaLabel::Mixed => "mixed",
            LambdaLabel::Unresolved => "unresolved",
        })
    }
}

/// Classify a spinor subspace from its dimension and real C3 character:
/// Λ₆ contributes χ(C₃) = 1 per two states, Λ₄ and Λ₅ contribute −1 each.
pub fn lambda_label_from_c3(dim: usize, chi: f64) -> LambdaLabel {
    let d = dim as f64;
    let n6 = (d + chi) / 3.0;
    let n6r = n6.round();
    if (n6 - n6r).abs() > 1e-6 || n6r < 0.0 {
        return LambdaLabel::Unresolved;
    }
    let n6 = n6r as usize;
    if 2 * n6 > dim {
        return LambdaLabel::Unresolved;
    }
    match (n6, dim - 2 * n6) {
        (_, 0) => LambdaLabel::Lambda6,
        (0, _) => LambdaLabel::Lambda45,
        _ => LambdaLabel::Mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let t = builtin_table();
        assert_eq!(t.irrep("Λ3").unwrap().characters, RepVector::from_ints(&[2, 2, -1, -1, 0, 0]));
        assert_eq!(t.irrep("L6").unwrap().characters, spinor_rep());
        let l4 = &t.irrep("Λ₄").unwrap().characters;
        let l5 = &t.irrep("Lambda5").unwrap().characters;
        let conj: Vec<GaussInt> = l4.characters.iter().map(|c| c.conj()).collect();
        assert_eq!(conj, l5.characters);
        assert_eq!(t.order(), GROUP_ORDER);
    }

    #[test]
    fn orthogonality_exact() {
        let t = builtin_table();
        assert_eq!(t.row_orthogonality_error(), 0.0);
        assert_eq!(t.column_orthogonality_error(), 0.0);
        assert_eq!(t.sum_dim_squared(), 12);
    }

    #[test]
    fn spinor_products() {
        let t = builtin_table();
        let l1 = &t.irrep("Λ1").unwrap().characters;
        let l3 = &t.irrep("Λ3").unwrap().characters;
        assert_eq!(product(l1, &spinor_rep()).unwrap(), spinor_rep());
        assert_eq!(product(l1, l1).unwrap(), *l1);
        let p = product(l3, &spinor_rep()).unwrap();
        assert_eq!(p, RepVector::from_ints(&[4, -4, -1, 1, 0, 0]));
        let d = t.decompose(&p).unwrap();
        assert_eq!(d.to_string(), "Λ₄ ⊕ Λ₅ ⊕ Λ₆");
    }

    #[test]
    fn regular_rep_contains_each_irrep_dim_times() {
        let t = builtin_table();
        let d = t.decompose(&regular_rep()).unwrap();
        for r in &t.irreps {
            assert_eq!(i64::from(d.multiplicity(r.name)), r.characters.dimension().re);
        }
    }

    #[test]
    fn not_a_representation() {
        let t = builtin_table();
        let bad = RepVector::from_ints(&[1, 0, 0, 0, 0, 0]);
        assert!(matches!(t.decompose(&bad), Err(GroupError::NotARepresentation { .. })));
        let short = RepVector::from_ints(&[1, 1]);
        assert!(matches!(product(&short, &spinor_rep()), Err(GroupError::ClassMismatch(2, 6))));
    }

    #[test]
    fn c3_labels() {
        assert_eq!(lambda_label_from_c3(2, 1.0), LambdaLabel::Lambda6);
        assert_eq!(lambda_label_from_c3(2, -2.0), LambdaLabel::Lambda45);
        assert_eq!(lambda_label_from_c3(4, -1.0), LambdaLabel::Mixed);
        assert_eq!(lambda_label_from_c3(2, 0.3), LambdaLabel::Unresolved);
    }

    #[test]
    fn gauss_display() {
        assert_eq!(GaussInt::new(0, -1).to_string(), "-i");
        assert_eq!(GaussInt::new(2, 3).to_string(), "2+3i");
        assert_eq!(GaussInt::from_complex(Complex64::new(0.999_999_999_9, 1e-11), 1e-9), Some(GaussInt::new(1, 0)));
        assert_eq!(GaussInt::from_complex(Complex64::new(0.5, 0.0), 1e-9), None);
    }
}
