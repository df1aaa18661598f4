//! Split of the perturbable monomials by whether they contain `w_s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A perturbable monomial: `w_e` or the ordered product `w_e·w_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Monomial {
    Deg1(usize),
    Deg2(usize, usize),
}

impl Monomial {
    pub fn contains(&self, k: usize) -> bool {
        match *self {
            Monomial::Deg1(e) => e == k,
            Monomial::Deg2(e, l) => e == k || l == k,
        }
    }
}

/// All `d + d²` monomials in draw order: degree 1 ascending, then degree 2
/// row-major.
pub fn monomials(d: usize) -> impl Iterator<Item = Monomial> {
    (0..d)
        .map(Monomial::Deg1)
        .chain((0..d * d).map(move |k| Monomial::Deg2(k / d, k % d)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialPartition {
    pub d: usize,
    pub s_index: usize,
    pub phi_s: Vec<Monomial>,
    pub phi_n: Vec<Monomial>,
}

impl MonomialPartition {
    pub fn is_sensitive(&self, m: Monomial) -> bool {
        m.contains(self.s_index)
    }
}

/// `Φ_s = {w_s} ∪ {w_e·w_l : e = s or l = s}`, `Φ_n` = everything else.
pub fn partition_monomials(d: usize, s_index: usize) -> Result<MonomialPartition> {
    if s_index >= d {
        return Err(Error::invalid("s_index", format!("{s_index} is out of range for d = {d}")));
    }
    let (phi_s, phi_n) = monomials(d).partition(|m| m.contains(s_index));
    Ok(MonomialPartition {
        d,
        s_index,
        phi_s,
        phi_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Monomial::*;

    #[test]
    fn d2_s0() {
        let p = partition_monomials(2, 0).unwrap();
        assert_eq!(p.phi_s, vec![Deg1(0), Deg2(0, 0), Deg2(0, 1), Deg2(1, 0)]);
        assert_eq!(p.phi_n, vec![Deg1(1), Deg2(1, 1)]);
    }

    #[test]
    fn d1_everything_sensitive() {
        let p = partition_monomials(1, 0).unwrap();
        assert_eq!(p.phi_s.len(), 2);
        assert!(p.phi_n.is_empty());
    }

    #[test]
    fn out_of_range() {
        assert!(partition_monomials(3, 3).is_err());
    }
}
