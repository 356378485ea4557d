//! Z2^n degrees: bit tuples with componentwise XOR addition, the standard
//! scalar-product pairing and the sign rule it induces.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An element of Z2^n, stored as a tuple of bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Degree(Vec<u8>);

/// Parity of a degree: total weight mod 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Degree {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput(format!("degree entries must be bits, got {bits:?}")));
        }
        Ok(Degree(bits))
    }

    pub fn zero(n: usize) -> Self {
        Degree(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    fn check_len(&self, other: &Degree) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        Ok(())
    }

    /// Degree of a product: componentwise sum mod 2.
    pub fn sum(&self, other: &Degree) -> Result<Degree> {
        self.check_len(other)?;
        Ok(Degree(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Standard scalar product <a,b> = sum_i a_i b_i (as an integer).
    pub fn pairing(&self, other: &Degree) -> Result<u32> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(&a, &b)| (a & b) as u32).sum())
    }

    /// Koszul sign (-1)^<a,b> governing the exchange of two homogeneous factors.
    pub fn koszul_sign(&self, other: &Degree) -> Result<i8> {
        Ok(if self.pairing(other)? % 2 == 0 { 1 } else { -1 })
    }

    /// Even iff the total weight sum_i a_i is even; equivalently <a,a> mod 2.
    pub fn parity(&self) -> Parity {
        if self.0.iter().map(|&b| b as u32).sum::<u32>() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Parity::Odd
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// All 2^n degrees in canonical order: the zero degree first, then the
/// remaining even degrees ascending lexicographically, then the odd ones.
///
/// For n = 2 this gives (0,0), (1,1), (0,1), (1,0).
pub fn enumerate_degrees(n: usize) -> Result<Vec<Degree>> {
    if n == 0 {
        return Err(Error::Domain("grading rank n must be at least 1".into()));
    }
    if n > 16 {
        return Err(Error::Domain(format!("grading rank n = {n} unreasonably large")));
    }
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for mask in 0u32..(1 << n) {
        // Fill bits from the left so lexicographic order matches tuple order.
        let bits: Vec<u8> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
        let d = Degree(bits);
        match d.parity() {
            Parity::Even => even.push(d),
            Parity::Odd => odd.push(d),
        }
    }
    even.sort();
    odd.sort();
    even.extend(odd);
    Ok(even)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(bits: &[u8]) -> Degree {
        Degree::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn sum_is_componentwise_xor() {
        assert_eq!(d(&[1, 0]).sum(&d(&[1, 1])).unwrap(), d(&[0, 1]));
        assert_eq!(d(&[0]).sum(&d(&[1])).unwrap(), d(&[1]));
    }

    #[test]
    fn sum_rejects_length_mismatch() {
        assert_eq!(
            d(&[1, 0]).sum(&d(&[1])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn pairing_and_sign() {
        assert_eq!(d(&[1, 0]).pairing(&d(&[1, 1])).unwrap(), 1);
        assert_eq!(d(&[1, 0]).koszul_sign(&d(&[1, 1])).unwrap(), -1);
        assert_eq!(d(&[1, 1]).pairing(&d(&[1, 1])).unwrap(), 2);
        assert_eq!(d(&[1, 1]).koszul_sign(&d(&[1, 1])).unwrap(), 1);
        // <a,0> = 0 for every a
        assert_eq!(d(&[1, 1]).koszul_sign(&Degree::zero(2)).unwrap(), 1);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(d(&[1, 1]).parity(), Parity::Even);
        assert_eq!(d(&[0, 1]).parity(), Parity::Odd);
        assert_eq!(Degree::zero(3).parity(), Parity::Even);
    }

    #[test]
    fn canonical_enumeration_n2() {
        let ds = enumerate_degrees(2).unwrap();
        assert_eq!(ds, vec![d(&[0, 0]), d(&[1, 1]), d(&[0, 1]), d(&[1, 0])]);
    }

    #[test]
    fn canonical_enumeration_n1() {
        assert_eq!(enumerate_degrees(1).unwrap(), vec![d(&[0]), d(&[1])]);
    }

    #[test]
    fn canonical_enumeration_n3_structure() {
        let ds = enumerate_degrees(3).unwrap();
        assert_eq!(ds.len(), 8);
        assert!(ds[0].is_zero());
        // evens precede odds
        let first_odd = ds.iter().position(|x| x.is_odd()).unwrap();
        assert!(ds[first_odd..].iter().all(|x| x.is_odd()));
        assert!(ds[..first_odd].iter().all(|x| !x.is_odd()));
        assert_eq!(first_odd, 4);
    }

    #[test]
    fn enumerate_rejects_n0() {
        assert!(enumerate_degrees(0).is_err());
    }

    #[test]
    fn degree_rejects_non_bits() {
        assert!(Degree::new(vec![0, 2]).is_err());
    }

    #[test]
    fn sign_bilinearity() {
        // sign(a+b, c) = sign(a,c) * sign(b,c) over a small exhaustive sweep
        for n in 1..=3usize {
            let ds = enumerate_degrees(n).unwrap();
            for a in &ds {
                for b in &ds {
                    for c in &ds {
                        let lhs = a.sum(b).unwrap().koszul_sign(c).unwrap();
                        let rhs = a.koszul_sign(c).unwrap() * b.koszul_sign(c).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn serde_degree_is_bit_array() {
        let j = serde_json::to_string(&d(&[1, 0])).unwrap();
        assert_eq!(j, "[1,0]");
        let back: Degree = serde_json::from_str("[0,1]").unwrap();
        assert_eq!(back, d(&[0, 1]));
    }
}
