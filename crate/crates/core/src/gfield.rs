//! Finite-field arithmetic for random linear network coding.
//!
//! Supports GF(2^k) for k in {1, 4, 8} and GF(p) for primes below 2^16.
//! Both kinds multiply through log/antilog tables; GF(256) uses the AES
//! polynomial x^8 + x^4 + x^3 + x + 1.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("rank {rank} of {needed}: not yet decodable")]
    NotYetDecodable { rank: usize, needed: usize },
    #[error("inconsistent linear system: header in span but payload is not")]
    InconsistentSystem,
    #[error("unsupported field `{0}`")]
    Unsupported(String),
}

/// Element of a [`Field`], stored as its canonical integer representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FieldElement(u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Which field a [`Field`] implements. Parsed from `gfN`: N in {2, 16, 256}
/// selects the binary extension field, any other prime N selects GF(N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FieldKind {
    Binary { k: u32 },
    Prime { p: u32 },
}

impl FieldKind {
    pub const GF256: FieldKind = FieldKind::Binary { k: 8 };

    pub fn order(self) -> u32 {
        match self {
            FieldKind::Binary { k } => 1 << k,
            FieldKind::Prime { p } => p,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gf{}", self.order())
    }
}

impl FromStr for FieldKind {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Unsupported(s.to_string());
        let order: u32 = s.trim().strip_prefix("gf").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match order {
            2 => Ok(FieldKind::Binary { k: 1 }),
            16 => Ok(FieldKind::Binary { k: 4 }),
            256 => Ok(FieldKind::Binary { k: 8 }),
            p if p < (1 << 16) && is_prime(p) => Ok(FieldKind::Prime { p }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for FieldKind {
    type Error = FieldError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FieldKind> for String {
    fn from(kind: FieldKind) -> String {
        kind.to_string()
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Reduction polynomials, including the x^k term.
fn binary_modulus(k: u32) -> Option<u32> {
    match k {
        1 => Some(0b11),
        4 => Some(0x13),
        8 => Some(0x11B),
        _ => None,
    }
}

#[derive(Debug)]
struct Tables {
    kind: FieldKind,
    order: u32,
    /// exp[i] = g^i for i in 0..2(q-1), so products need no modular reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// A finite field with precomputed log/antilog tables. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.tables.kind == other.tables.kind
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(kind: FieldKind) -> Result<Self, FieldError> {
        let order = kind.order();
        let slow_mul: Box<dyn Fn(u32, u32) -> u32> = match kind {
            FieldKind::Binary { k } => {
                let modulus = binary_modulus(k).ok_or_else(|| FieldError::Unsupported(kind.to_string()))?;
                Box::new(move |a, b| carryless_mul_mod(a, b, k, modulus))
            }
            FieldKind::Prime { p } => {
                if !(is_prime(p) && p < (1 << 16)) {
                    return Err(FieldError::Unsupported(kind.to_string()));
                }
                Box::new(move |a, b| ((a as u64 * b as u64) % p as u64) as u32)
            }
        };
        let group = order - 1;
        let generator = (1..order)
            .find(|&g| multiplicative_order(g, group, &slow_mul) == group)
            .expect("finite field multiplicative group is cyclic");
        let mut exp = vec![0u16; 2 * group as usize];
        let mut log = vec![0u16; order as usize];
        let mut x = 1u32;
        for i in 0..group {
            exp[i as usize] = x as u16;
            exp[(i + group) as usize] = x as u16;
            log[x as usize] = i as u16;
            x = slow_mul(x, generator);
        }
        Ok(Self { tables: Arc::new(Tables { kind, order, exp, log }) })
    }

    pub fn gf256() -> Self {
        Self::new(FieldKind::GF256).expect("GF(256) is supported")
    }

    pub fn kind(&self) -> FieldKind {
        self.tables.kind
    }

    pub fn order(&self) -> u32 {
        self.tables.order
    }

    /// Canonical element for `value`, reduced into the field.
    pub fn element(&self, value: u32) -> FieldElement {
        FieldElement((value % self.tables.order) as u16)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.tables.order).map(|v| FieldElement(v as u16))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match self.tables.kind {
            FieldKind::Binary { .. } => FieldElement(a.0 ^ b.0),
            FieldKind::Prime { p } => FieldElement(((a.0 as u32 + b.0 as u32) % p) as u16),
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match self.tables.kind {
            FieldKind::Binary { .. } => a,
            FieldKind::Prime { p } => FieldElement(((p - a.0 as u32) % p) as u16),
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let t = &self.tables;
        FieldElement(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let t = &self.tables;
        let group = (t.order - 1) as usize;
        Ok(FieldElement(t.exp[(group - t.log[a.0 as usize] as usize) % group]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(0..self.tables.order) as u16)
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> GfVector {
        GfVector((0..len).map(|_| self.random(rng)).collect())
    }

    /// `dst += coeff * src`, element-wise.
    pub fn axpy(&self, dst: &mut GfVector, coeff: FieldElement, src: &GfVector) -> Result<(), FieldError> {
        check_len(dst.len(), src.len())?;
        if coeff.is_zero() {
            return Ok(());
        }
        for (d, &s) in dst.0.iter_mut().zip(&src.0) {
            *d = self.add(*d, self.mul(coeff, s));
        }
        Ok(())
    }

    pub fn scale(&self, v: &mut GfVector, coeff: FieldElement) {
        for x in v.0.iter_mut() {
            *x = self.mul(coeff, *x);
        }
    }

    /// Σ coeffs[i] · vectors[i]. `len` is the length of the result, needed
    /// when `vectors` is empty.
    pub fn lincomb(&self, coeffs: &GfVector, vectors: &[GfVector], len: usize) -> Result<GfVector, FieldError> {
        check_len(coeffs.len(), vectors.len())?;
        let mut out = GfVector::zeros(len);
        for (&a, v) in coeffs.0.iter().zip(vectors) {
            self.axpy(&mut out, a, v)?;
        }
        Ok(out)
    }

    pub fn dot(&self, a: &GfVector, b: &GfVector) -> Result<FieldElement, FieldError> {
        check_len(a.len(), b.len())?;
        Ok(a.0.iter().zip(&b.0).fold(FieldElement::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y))))
    }

    /// Row rank by Gaussian elimination on a copy of `m`.
    pub fn rank(&self, m: &GfMatrix) -> usize {
        let mut rows = m.rows.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = self.inv(rows[rank][col]).expect("pivot is nonzero");
            self.scale(&mut rows[rank], inv);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && !row[col].is_zero() {
                    let factor = self.neg(row[col]);
                    self.axpy(row, factor, &pivot_row).expect("equal lengths");
                }
            }
            rank += 1;
        }
        rank
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), FieldError> {
    if expected == found {
        Ok(())
    } else {
        Err(FieldError::LengthMismatch { expected, found })
    }
}

fn carryless_mul_mod(mut a: u32, mut b: u32, k: u32, modulus: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << k) != 0 {
            a ^= modulus;
        }
    }
    acc
}

fn multiplicative_order(g: u32, group: u32, mul: &dyn Fn(u32, u32) -> u32) -> u32 {
    let mut x = g;
    let mut ord = 1;
    while x != 1 {
        x = mul(x, g);
        ord += 1;
        if ord > group {
            return 0;
        }
    }
    ord
}

/// Fixed-length vector over a field: a rumor payload (length t) or a coding
/// header (length m).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GfVector(Vec<FieldElement>);

impl GfVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![FieldElement::ZERO; len])
    }

    /// i-th standard basis vector of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[i] = FieldElement::ONE;
        v
    }

    pub fn from_values(field: &Field, values: &[u32]) -> Self {
        Self(values.iter().map(|&x| field.element(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.0
    }

    /// Lowercase hex, two digits per element for fields of order <= 256 and
    /// four digits otherwise.
    pub fn to_hex(&self, field: &Field) -> String {
        let wide = field.order() > 256;
        self.0
            .iter()
            .map(|x| if wide { format!("{:04x}", x.0) } else { format!("{:02x}", x.0) })
            .collect()
    }
}

impl std::ops::Index<usize> for GfVector {
    type Output = FieldElement;
    fn index(&self, i: usize) -> &FieldElement {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for GfVector {
    fn index_mut(&mut self, i: usize) -> &mut FieldElement {
        &mut self.0[i]
    }
}

impl From<Vec<FieldElement>> for GfVector {
    fn from(v: Vec<FieldElement>) -> Self {
        Self(v)
    }
}

/// Row-major r × m matrix; rows may be appended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    cols: usize,
    rows: Vec<GfVector>,
}

impl GfMatrix {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<GfVector>) -> Result<Self, FieldError> {
        for r in &rows {
            check_len(cols, r.len())?;
        }
        Ok(Self { cols, rows })
    }

    pub fn identity(n: usize) -> Self {
        Self { cols: n, rows: (0..n).map(|i| GfVector::unit(n, i)).collect() }
    }

    pub fn push_row(&mut self, row: GfVector) -> Result<(), FieldError> {
        check_len(self.cols, row.len())?;
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[GfVector] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// α · W for a coefficient vector α of length r.
    pub fn left_mul(&self, field: &Field, alpha: &GfVector) -> Result<GfVector, FieldError> {
        field.lincomb(alpha, &self.rows, self.cols)
    }
}

/// Incrementally maintained reduced row echelon basis of coding headers,
/// with the payloads carried through the same row operations.
///
/// Inserting a row costs O(rank · (m + t)). Once rank reaches m every basis
/// header is a unit vector and its payload is the decoded original.
#[derive(Debug, Clone)]
pub struct DecodingBasis {
    field: Field,
    header_len: usize,
    payload_len: usize,
    /// (pivot column, header, payload), header[pivot] == 1 and every other
    /// basis row is zero in that column.
    rows: Vec<(usize, GfVector, GfVector)>,
}

impl DecodingBasis {
    pub fn new(field: Field, header_len: usize, payload_len: usize) -> Self {
        Self { field, header_len, payload_len, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.header_len
    }

    /// Adds a received pair. Returns `Ok(true)` when the rank grew and
    /// `Ok(false)` when the header was already in the span.
    pub fn insert(&mut self, header: &GfVector, payload: &GfVector) -> Result<bool, FieldError> {
        check_len(self.header_len, header.len())?;
        check_len(self.payload_len, payload.len())?;
        let f = &self.field;
        let mut w = header.clone();
        let mut c = payload.clone();
        for (pivot, bw, bc) in &self.rows {
            let coeff = w[*pivot];
            if !coeff.is_zero() {
                let factor = f.neg(coeff);
                f.axpy(&mut w, factor, bw)?;
                f.axpy(&mut c, factor, bc)?;
            }
        }
        let Some(pivot) = (0..self.header_len).find(|&j| !w[j].is_zero()) else {
            return if c.is_zero() { Ok(false) } else { Err(FieldError::InconsistentSystem) };
        };
        let inv = f.inv(w[pivot])?;
        f.scale(&mut w, inv);
        f.scale(&mut c, inv);
        for (_, bw, bc) in self.rows.iter_mut() {
            let coeff = bw[pivot];
            if !coeff.is_zero() {
                let factor = f.neg(coeff);
                f.axpy(bw, factor, &w)?;
                f.axpy(bc, factor, &c)?;
            }
        }
        self.rows.push((pivot, w, c));
        Ok(true)
    }

    /// The m original payloads, ordered by rumor index.
    pub fn solve(&self) -> Result<Vec<GfVector>, FieldError> {
        if !self.is_full() {
            return Err(FieldError::NotYetDecodable { rank: self.rank(), needed: self.header_len });
        }
        let mut out = vec![GfVector::default(); self.header_len];
        for (pivot, _, c) in &self.rows {
            out[*pivot] = c.clone();
        }
        Ok(out)
    }
}

/// Recovers the m originals from received (payload, header) pairs.
pub fn decode(field: &Field, m: usize, t: usize, received: &[(GfVector, GfVector)]) -> Result<Vec<GfVector>, FieldError> {
    let mut basis = DecodingBasis::new(field.clone(), m, t);
    for (c, w) in received {
        basis.insert(w, c)?;
    }
    basis.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Shift-and-add multiplication, independent of the tables.
    fn peasant_mul(a: u8, b: u8) -> u8 {
        let (mut a, mut b, mut p) = (a, b, 0u8);
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            let carry = a & 0x80 != 0;
            a <<= 1;
            if carry {
                a ^= 0x1B;
            }
            b >>= 1;
        }
        p
    }

    /// Rank over GF(2) as log2 of the size of the span, enumerated.
    fn span_rank_gf2(rows: &[[u8; 4]]) -> usize {
        let mut span = std::collections::HashSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut acc = [0u8; 4];
            for (i, row) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for j in 0..4 {
                        acc[j] ^= row[j];
                    }
                }
            }
            span.insert(acc);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn gf256_tables_match_peasant_multiplication() {
        let f = Field::gf256();
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                let got = f.mul(f.element(a as u32), f.element(b as u32)).value();
                assert_eq!(got, peasant_mul(a, b) as u16, "{a} * {b}");
            }
        }
    }

    #[test]
    fn inverses_by_exhaustive_search() {
        let f = Field::gf256();
        for a in 1..256u32 {
            let a = f.element(a);
            let brute = (1..256u32).map(|x| f.element(x)).find(|&x| peasant_mul(a.value() as u8, x.value() as u8) == 1);
            assert_eq!(Some(f.inv(a).unwrap()), brute);
        }
        let gf2 = Field::new(FieldKind::Binary { k: 1 }).unwrap();
        assert_eq!(gf2.inv(FieldElement::ONE), Ok(FieldElement::ONE));
        assert_eq!(f.inv(FieldElement::ZERO), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn small_fields_have_inverses() {
        for name in ["gf2", "gf16", "gf256", "gf7", "gf257", "gf65521"] {
            let f = Field::new(name.parse().unwrap()).unwrap();
            assert_eq!(f.kind().to_string(), name);
            let step = (f.order() / 97).max(1);
            for a in (1..f.order()).step_by(step as usize) {
                let a = f.element(a);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
        }
        assert!("gf12".parse::<FieldKind>().is_err());
        assert!("gf32".parse::<FieldKind>().is_err());
    }

    #[test]
    fn lincomb_cases() {
        let f = Field::gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<_> = (0..3).map(|_| f.random_vector(5, &mut rng)).collect();
        assert_eq!(f.lincomb(&GfVector::unit(3, 0), &vs, 5).unwrap(), vs[0]);
        assert!(f.lincomb(&GfVector::zeros(3), &vs, 5).unwrap().is_zero());
        assert_eq!(
            f.lincomb(&GfVector::zeros(2), &vs, 5),
            Err(FieldError::LengthMismatch { expected: 2, found: 3 })
        );

        let gf2 = Field::new(FieldKind::Binary { k: 1 }).unwrap();
        let v = GfVector::from_values(&gf2, &[1, 0, 1, 1]);
        let sum = gf2.lincomb(&GfVector::from_values(&gf2, &[1, 1]), &[v.clone(), v], 4).unwrap();
        assert!(sum.as_slice().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rank_examples() {
        let f = Field::gf256();
        assert_eq!(f.rank(&GfMatrix::identity(3)), 3);
        let zero = GfMatrix::from_rows(3, vec![GfVector::zeros(3); 2]).unwrap();
        assert_eq!(f.rank(&zero), 0);
    }

    #[test]
    fn gf2_rank_matches_span_enumeration() {
        let f = Field::new(FieldKind::Binary { k: 1 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let rows: Vec<[u8; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.gen_range(0..2))).collect();
            let m = GfMatrix::from_rows(
                4,
                rows.iter().map(|r| GfVector::from_values(&f, &r.map(u32::from))).collect(),
            )
            .unwrap();
            assert_eq!(f.rank(&m), span_rank_gf2(&rows));
        }
    }

    #[test]
    fn decode_unit_cases() {
        let f = Field::gf256();
        let c = GfVector::from_values(&f, &[7, 9, 200]);
        let w1 = f.element(0x53);
        let decoded = decode(&f, 1, 3, &[(c.clone(), GfVector::from(vec![w1]))]).unwrap();
        let mut expect = c.clone();
        f.scale(&mut expect, f.inv(w1).unwrap());
        assert_eq!(decoded, vec![expect]);

        let originals: Vec<_> = (0..3).map(|i| GfVector::from_values(&f, &[i, i + 1])).collect();
        let rows: Vec<_> = originals.iter().enumerate().map(|(i, c)| (c.clone(), GfVector::unit(3, i))).collect();
        assert_eq!(decode(&f, 3, 2, &rows).unwrap(), originals);
        assert_eq!(
            decode(&f, 3, 2, &rows[..2]),
            Err(FieldError::NotYetDecodable { rank: 2, needed: 3 })
        );
    }

    #[test]
    fn encode_then_decode_round_trip() {
        let f = Field::gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let originals: Vec<_> = (0..3).map(|_| f.random_vector(8, &mut rng)).collect();
        let rows: Vec<_> = (0..6)
            .map(|_| {
                let w = f.random_vector(3, &mut rng);
                (f.lincomb(&w, &originals, 8).unwrap(), w)
            })
            .collect();
        assert_eq!(decode(&f, 3, 8, &rows).unwrap(), originals);
    }

    #[test]
    fn inconsistent_rows_are_detected() {
        let f = Field::gf256();
        let c = GfVector::from_values(&f, &[1, 2]);
        let w = GfVector::unit(2, 0);
        let bad = GfVector::from_values(&f, &[1, 3]);
        let mut basis = DecodingBasis::new(f, 2, 2);
        assert_eq!(basis.insert(&w, &c), Ok(true));
        assert_eq!(basis.insert(&w, &c), Ok(false));
        assert_eq!(basis.insert(&w, &bad), Err(FieldError::InconsistentSystem));
    }

    proptest::proptest! {
        #[test]
        fn prime_field_axioms(p_index in 0usize..6, a in 0u32..70_000, b in 0u32..70_000, c in 0u32..70_000) {
            let p = [2u32, 3, 7, 251, 257, 65_521][p_index];
            let f = Field::new(FieldKind::Prime { p }).unwrap();
            let (a, b, c) = (f.element(a % p), f.element(b % p), f.element(c % p));
            // Reference arithmetic in plain integers.
            let (x, y, z) = (a.value() as u64, b.value() as u64, c.value() as u64);
            let p = p as u64;
            proptest::prop_assert_eq!(f.mul(a, b).value() as u64, x * y % p);
            proptest::prop_assert_eq!(f.add(a, b).value() as u64, (x + y) % p);
            proptest::prop_assert_eq!(f.mul(a, f.add(b, c)).value() as u64, x * ((y + z) % p) % p);
            if x != 0 {
                proptest::prop_assert_eq!(f.inv(a).unwrap().value() as u64 * x % p, 1);
            }
        }
    }
}
