//! Ternary quartics, the monomial vector `v(x,y,z)` and sums of squares of
//! quadratic forms.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::symkernel::SymMatrix;

/// Exponent triples of the 15 quartic monomials in canonical order.
pub const MONOMIALS: [(u8, u8, u8); 15] = [
    (4, 0, 0),
    (3, 1, 0),
    (3, 0, 1),
    (2, 2, 0),
    (2, 1, 1),
    (2, 0, 2),
    (1, 3, 0),
    (1, 2, 1),
    (1, 1, 2),
    (1, 0, 3),
    (0, 4, 0),
    (0, 3, 1),
    (0, 2, 2),
    (0, 1, 3),
    (0, 0, 4),
];

/// Exponents of the quadratic monomials `x^2, xy, xz, y^2, yz, z^2`.
pub const QUADRATIC_MONOMIALS: [(u8, u8, u8); 6] =
    [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)];

/// Position of `x^i y^j z^k` in [`MONOMIALS`], if `i + j + k == 4`.
pub fn monomial_index(i: u8, j: u8, k: u8) -> Option<usize> {
    if i + j + k != 4 {
        return None;
    }
    // Canonical order is lexicographically decreasing in (i, j).
    let i = i as usize;
    let j = j as usize;
    let before: usize = (i + 1..=4).map(|ii| 5 - ii).sum();
    Some(before + (4 - i - j))
}

/// `PRODUCT_INDEX[a][b]` is the quartic monomial of `v_a * v_b`.
pub(crate) const PRODUCT_INDEX: [[usize; 6]; 6] = {
    let mut table = [[0usize; 6]; 6];
    let mut a = 0;
    while a < 6 {
        let mut b = 0;
        while b < 6 {
            let (i1, j1, k1) = QUADRATIC_MONOMIALS[a];
            let (i2, j2, k2) = QUADRATIC_MONOMIALS[b];
            let (i, j, k) = (i1 + i2, j1 + j2, k1 + k2);
            let mut m = 0;
            while m < 15 {
                let (ei, ej, ek) = MONOMIALS[m];
                if ei == i && ej == j && ek == k {
                    table[a][b] = m;
                }
                m += 1;
            }
            b += 1;
        }
        a += 1;
    }
    table
};

/// Homogeneous degree-4 polynomial in `x, y, z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TernaryQuartic {
    coeffs: [f64; 15],
}

impl TernaryQuartic {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs(coeffs: [f64; 15]) -> Self {
        Self { coeffs }
    }

    /// Builds a quartic from `(exponents, coefficient)` terms; repeated
    /// monomials accumulate. Returns `None` on an exponent triple not summing to 4.
    pub fn from_terms(terms: &[((u8, u8, u8), f64)]) -> Option<Self> {
        let mut q = Self::zero();
        for &((i, j, k), c) in terms {
            q.coeffs[monomial_index(i, j, k)?] += c;
        }
        Some(q)
    }

    pub fn coeffs(&self) -> &[f64; 15] {
        &self.coeffs
    }

    pub fn coeff(&self, i: u8, j: u8, k: u8) -> f64 {
        monomial_index(i, j, k).map_or(0.0, |m| self.coeffs[m])
    }

    pub fn set_coeff(&mut self, i: u8, j: u8, k: u8, value: f64) -> bool {
        match monomial_index(i, j, k) {
            Some(m) => {
                self.coeffs[m] = value;
                true
            }
            None => false,
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * s) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `p(x, y, z)` as the plain sum of `p_ijk x^i y^j z^k`.
    pub fn evaluate(&self, x: f64, y: f64, z: f64) -> f64 {
        MONOMIALS
            .iter()
            .zip(&self.coeffs)
            .map(|(&(i, j, k), &c)| c * x.powi(i as i32) * y.powi(j as i32) * z.powi(k as i32))
            .sum()
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &TernaryQuartic) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn evaluate(p: &TernaryQuartic, x: f64, y: f64, z: f64) -> f64 {
    p.evaluate(x, y, z)
}

/// `v(x,y,z) = (x^2, xy, xz, y^2, yz, z^2)` together with its point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentVector {
    pub point: [f64; 3],
    pub vec: [f64; 6],
}

impl MomentVector {
    /// The six product identities of a moment vector, as residuals:
    /// the 2x2 minors of `[[x^2, xy, xz], [xy, y^2, yz], [xz, yz, z^2]]`.
    pub fn identity_residuals(v: &[f64; 6]) -> [f64; 6] {
        minors(v)
    }

    /// Outer product `v v^T`.
    pub fn outer(&self) -> SymMatrix {
        SymMatrix::outer(&self.vec)
    }
}

pub(crate) fn minors(v: &[f64; 6]) -> [f64; 6] {
    [
        v[0] * v[3] - v[1] * v[1],
        v[0] * v[5] - v[2] * v[2],
        v[3] * v[5] - v[4] * v[4],
        v[0] * v[4] - v[1] * v[2],
        v[1] * v[4] - v[2] * v[3],
        v[1] * v[5] - v[2] * v[4],
    ]
}

pub fn monomial_vector(x: f64, y: f64, z: f64) -> MomentVector {
    MomentVector { point: [x, y, z], vec: [x * x, x * y, x * z, y * y, y * z, z * z] }
}

/// Quadratic form with coefficients against `x^2, xy, xz, y^2, yz, z^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadraticForm {
    pub q: [f64; 6],
}

impl QuadraticForm {
    pub fn new(q: [f64; 6]) -> Self {
        Self { q }
    }

    pub fn evaluate(&self, x: f64, y: f64, z: f64) -> f64 {
        let v = monomial_vector(x, y, z).vec;
        self.q.iter().zip(&v).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

const QUADRATIC_NAMES: [&str; 6] = ["x²", "xy", "xz", "y²", "yz", "z²"];

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.q.iter().copied().zip(QUADRATIC_NAMES.iter().map(|s| s.to_string())))
    }
}

fn superscript(e: u8) -> &'static str {
    match e {
        2 => "²",
        3 => "³",
        4 => "⁴",
        _ => "",
    }
}

fn monomial_name((i, j, k): (u8, u8, u8)) -> String {
    let mut s = String::new();
    for (var, e) in [('x', i), ('y', j), ('z', k)] {
        if e > 0 {
            s.push(var);
            s.push_str(superscript(e));
        }
    }
    s
}

/// Writes `c·name` terms; with a precision (`{:.3}`) coefficients are
/// rounded and terms that round to zero are skipped.
fn write_terms(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (f64, String)>) -> fmt::Result {
    let prec = f.precision();
    let mut first = true;
    for (c, name) in terms {
        let shown = match prec {
            Some(p) => format!("{:.*}", p, c.abs()),
            None => c.abs().to_string(),
        };
        if c == 0.0 || shown.trim_end_matches(['0', '.']).is_empty() {
            continue;
        }
        if first {
            if c < 0.0 {
                write!(f, "−")?;
            }
        } else {
            write!(f, " {} ", if c < 0.0 { "−" } else { "+" })?;
        }
        write!(f, "{shown}·{name}")?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for TernaryQuartic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().copied().zip(MONOMIALS.iter().map(|&m| monomial_name(m))))
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `sum_i (v^T q_i)^2` in coefficient form.
pub fn expand_squares(qs: &[QuadraticForm]) -> TernaryQuartic {
    let mut acc = [CompensatedSum::default(); 15];
    for q in qs {
        for a in 0..6 {
            for b in 0..6 {
                acc[PRODUCT_INDEX[a][b]].add(q.q[a] * q.q[b]);
            }
        }
    }
    TernaryQuartic { coeffs: acc.map(|s| s.value()) }
}

/// Coefficients of `v^T A v`.
pub fn gram_to_quartic(a: &SymMatrix) -> TernaryQuartic {
    debug_assert_eq!(a.dim(), 6);
    let mut acc = [CompensatedSum::default(); 15];
    for i in 0..6 {
        for j in 0..6 {
            acc[PRODUCT_INDEX[i][j]].add(a.get(i, j));
        }
    }
    TernaryQuartic { coeffs: acc.map(|s| s.value()) }
}

/// Largest coefficient gap between `p` and `sum_i (v^T q_i)^2`.
pub fn sample_certificate_gap(p: &TernaryQuartic, qs: &[QuadraticForm]) -> f64 {
    p.max_abs_diff(&expand_squares(qs))
}

fn exponent_key((i, j, k): (u8, u8, u8)) -> String {
    format!("{i}{j}{k}")
}

fn parse_exponent_key(key: &str) -> Option<(u8, u8, u8)> {
    let digits: Vec<u8> = key.bytes().map(|b| b.wrapping_sub(b'0')).collect();
    if digits.len() != 3 || digits.iter().any(|&d| d > 4) {
        return None;
    }
    let (i, j, k) = (digits[0], digits[1], digits[2]);
    monomial_index(i, j, k).map(|_| (i, j, k))
}

impl Serialize for TernaryQuartic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a [f64; 15]);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(15))?;
                for (m, c) in MONOMIALS.iter().zip(self.0) {
                    map.serialize_entry(&exponent_key(*m), c)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(1))?;
        map.serialize_entry("p", &Coeffs(&self.coeffs))?;
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuarticRepr {
    p: Option<BTreeMap<String, f64>>,
    parray: Option<Vec<f64>>,
}

impl<'de> Deserialize<'de> for TernaryQuartic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = QuarticRepr::deserialize(deserializer)?;
        let mut q = TernaryQuartic::zero();
        match (repr.p, repr.parray) {
            (Some(map), None) => {
                for (key, value) in map {
                    let (i, j, k) = parse_exponent_key(&key)
                        .ok_or_else(|| D::Error::custom(format!("unknown monomial key {key:?}")))?;
                    q.set_coeff(i, j, k, value);
                }
            }
            (None, Some(arr)) => {
                if arr.len() != 15 {
                    return Err(D::Error::custom(format!(
                        "parray must hold 15 coefficients, found {}",
                        arr.len()
                    )));
                }
                q.coeffs.copy_from_slice(&arr);
            }
            _ => return Err(D::Error::custom("expected exactly one of \"p\" or \"parray\"")),
        }
        if q.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(D::Error::custom("coefficients must be finite"));
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_sum() -> TernaryQuartic {
        TernaryQuartic::from_terms(&[
            ((4, 0, 0), 1.0),
            ((0, 4, 0), 1.0),
            ((0, 0, 4), 1.0),
            ((2, 2, 0), 2.0),
            ((2, 0, 2), 2.0),
            ((0, 2, 2), 2.0),
        ])
        .unwrap()
    }

    /// Independent evaluation: expand the product of variables one factor at a time.
    fn naive_eval(p: &TernaryQuartic, x: f64, y: f64, z: f64) -> f64 {
        let mut total = 0.0;
        for (m, &c) in MONOMIALS.iter().zip(p.coeffs()) {
            let mut term = c;
            for _ in 0..m.0 {
                term *= x;
            }
            for _ in 0..m.1 {
                term *= y;
            }
            for _ in 0..m.2 {
                term *= z;
            }
            total += term;
        }
        total
    }

    #[test]
    fn canonical_indexing() {
        for (idx, &(i, j, k)) in MONOMIALS.iter().enumerate() {
            assert_eq!(monomial_index(i, j, k), Some(idx));
        }
        assert_eq!(monomial_index(1, 1, 1), None);
        assert_eq!(PRODUCT_INDEX[0][0], 0);
        assert_eq!(PRODUCT_INDEX[1][1], 3);
        assert_eq!(PRODUCT_INDEX[0][3], 3);
    }

    #[test]
    fn evaluate_examples() {
        let x4 = TernaryQuartic::from_terms(&[((4, 0, 0), 1.0)]).unwrap();
        assert_eq!(x4.evaluate(1.0, 2.0, 3.0), 1.0);
        assert_eq!(square_sum().evaluate(1.0, 1.0, 1.0), 9.0);
    }

    #[test]
    fn evaluate_matches_naive_oracle() {
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..100 {
            let mut c = [0.0; 15];
            c.iter_mut().for_each(|v| *v = next());
            let p = TernaryQuartic::from_coeffs(c);
            let (x, y, z) = (next(), next(), next());
            let a = p.evaluate(x, y, z);
            let b = naive_eval(&p, x, y, z);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn monomial_vector_examples() {
        assert_eq!(monomial_vector(1.0, 0.0, 0.0).vec, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(monomial_vector(1.0, 2.0, 3.0).vec, [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
        assert_eq!(monomial_vector(-1.5, 2.0, -0.25).vec, monomial_vector(1.5, -2.0, 0.25).vec);
        for r in MomentVector::identity_residuals(&monomial_vector(0.3, -1.7, 2.2).vec) {
            assert!(r.abs() < 1e-14);
        }
    }

    #[test]
    fn expand_examples() {
        let x4 = expand_squares(&[QuadraticForm::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])]);
        assert_eq!(x4, TernaryQuartic::from_terms(&[((4, 0, 0), 1.0)]).unwrap());

        let s = expand_squares(&[QuadraticForm::new([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])]);
        assert_eq!(s, square_sum());

        let m = expand_squares(&[QuadraticForm::new([0.0, 1.0, 1.0, 0.0, 1.0, 0.0])]);
        let want = TernaryQuartic::from_terms(&[
            ((2, 2, 0), 1.0),
            ((2, 0, 2), 1.0),
            ((0, 2, 2), 1.0),
            ((2, 1, 1), 2.0),
            ((1, 2, 1), 2.0),
            ((1, 1, 2), 2.0),
        ])
        .unwrap();
        assert_eq!(m, want);
        assert!(expand_squares(&[]).is_zero());
    }

    #[test]
    fn gram_of_identity() {
        let p = gram_to_quartic(&SymMatrix::identity(6));
        let want = TernaryQuartic::from_terms(&[
            ((4, 0, 0), 1.0),
            ((0, 4, 0), 1.0),
            ((0, 0, 4), 1.0),
            ((2, 2, 0), 1.0),
            ((2, 0, 2), 1.0),
            ((0, 2, 2), 1.0),
        ])
        .unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn gram_of_moment_matrix_matches_evaluation() {
        let v0 = monomial_vector(0.7, -1.2, 0.4);
        let p = gram_to_quartic(&v0.outer());
        for &(x, y, z) in &[(1.0, 2.0, 3.0), (-0.5, 0.1, 0.9), (2.0, -1.0, -1.0)] {
            let v = monomial_vector(x, y, z).vec;
            let d: f64 = v.iter().zip(&v0.vec).map(|(a, b)| a * b).sum();
            assert!((p.evaluate(x, y, z) - d * d).abs() < 1e-12 * (1.0 + d * d));
        }
    }

    #[test]
    fn certificate_gap_examples() {
        let x4 = TernaryQuartic::from_terms(&[((4, 0, 0), 1.0)]).unwrap();
        let q = QuadraticForm::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sample_certificate_gap(&x4, &[q]), 0.0);
        assert_eq!(sample_certificate_gap(&x4, &[]), 1.0);
    }

    #[test]
    fn certificate_gap_is_linear_in_small_perturbations() {
        let qs = [QuadraticForm::new([0.3, -0.2, 0.5, 1.0, 0.1, -0.7]), QuadraticForm::new([1.0, 0.4, 0.0, -0.3, 0.2, 0.6])];
        let p = expand_squares(&qs);
        let dir = [0.5, -1.0, 0.25, 0.75, -0.5, 1.0];
        let gap = |delta: f64| {
            let mut pert = qs;
            for (c, d) in pert[0].q.iter_mut().zip(dir) {
                *c += delta * d;
            }
            sample_certificate_gap(&p, &pert)
        };
        let g1 = gap(1e-3);
        let g2 = gap(5e-4);
        assert!(g1 > 0.0);
        // First-order behaviour: halving the perturbation roughly halves the gap.
        assert!((g1 / g2 - 2.0).abs() < 0.05, "ratio {}", g1 / g2);
        assert!(g1 <= 10.0 * 1e-3);
    }

    #[test]
    fn json_forms() {
        let p: TernaryQuartic = serde_json::from_str(r#"{"p":{"400":1.0,"220":2.0}}"#).unwrap();
        assert_eq!(p.coeff(4, 0, 0), 1.0);
        assert_eq!(p.coeff(2, 2, 0), 2.0);
        let arr: Vec<f64> = (0..15).map(f64::from).collect();
        let json = serde_json::json!({ "parray": arr });
        let q: TernaryQuartic = serde_json::from_value(json).unwrap();
        assert_eq!(q.coeffs()[14], 14.0);
        let back: TernaryQuartic = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
        assert_eq!(back, q);

        assert!(serde_json::from_str::<TernaryQuartic>(r#"{"p":{"111":1.0}}"#).is_err());
        assert!(serde_json::from_str::<TernaryQuartic>(r#"{"p":{"40":1.0}}"#).is_err());
        assert!(serde_json::from_str::<TernaryQuartic>(r#"{"p":{},"extra":1}"#).is_err());
        assert!(serde_json::from_str::<TernaryQuartic>(r#"{"parray":[1,2]}"#).is_err());
        assert!(serde_json::from_str::<TernaryQuartic>(r#"{}"#).is_err());
    }

    #[test]
    fn display() {
        let q = QuadraticForm::new([0.5, 0.0, 0.0, 0.0, -1.25, 0.0]);
        assert_eq!(q.to_string(), "0.5·x² − 1.25·yz");
        assert_eq!(TernaryQuartic::zero().to_string(), "0");
        let q = QuadraticForm::new([1.0 / 3.0, 1e-20, 0.0, 0.0, 0.0, -2.0]);
        assert_eq!(format!("{q:.3}"), "0.333·x² − 2.000·z²");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gram_form_matches_evaluation(
                upper in proptest::collection::vec(-2.0..2.0f64, 21),
                x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64,
            ) {
                let a = SymMatrix::from_upper(6, upper).unwrap();
                let v = monomial_vector(x, y, z).vec;
                let direct = a.quad_form(&v);
                let via = gram_to_quartic(&a).evaluate(x, y, z);
                prop_assert!((direct - via).abs() <= 1e-10 * (1.0 + direct.abs()));
            }

            #[test]
            fn single_square_matches_evaluation(
                q in proptest::array::uniform6(-2.0..2.0f64),
                x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64,
            ) {
                let form = QuadraticForm::new(q);
                let s = form.evaluate(x, y, z);
                let p = expand_squares(&[form]);
                prop_assert!((p.evaluate(x, y, z) - s * s).abs() <= 1e-10 * (1.0 + s * s));
            }

            #[test]
            fn moment_vector_parity(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
                prop_assert_eq!(monomial_vector(-x, -y, -z).vec, monomial_vector(x, y, z).vec);
            }
        }
    }
}
