use serde::{Deserialize, Serialize};

use super::Gf2Error;

/// Polynomial over GF(2) modulo `x^n - 1`, stored as its set of exponents.
///
/// The support is kept sorted and duplicate free; every exponent lies in `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct CyclicPoly {
    modulus: usize,
    support: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    modulus: usize,
    support: Vec<usize>,
}

impl TryFrom<RawPoly> for CyclicPoly {
    type Error = Gf2Error;

    fn try_from(raw: RawPoly) -> Result<Self, Self::Error> {
        CyclicPoly::new(raw.modulus, raw.support)
    }
}

impl From<CyclicPoly> for RawPoly {
    fn from(p: CyclicPoly) -> Self {
        RawPoly {
            modulus: p.modulus,
            support: p.support,
        }
    }
}

impl CyclicPoly {
    pub fn new(modulus: usize, mut support: Vec<usize>) -> Result<Self, Gf2Error> {
        if modulus == 0 {
            return Err(Gf2Error::InvalidPoly("modulus must be positive".into()));
        }
        if support.is_empty() {
            return Err(Gf2Error::InvalidPoly("support must be nonempty".into()));
        }
        support.sort_unstable();
        if let Some(&e) = support.iter().find(|&&e| e >= modulus) {
            return Err(Gf2Error::InvalidPoly(format!("exponent {e} not reduced modulo {modulus}")));
        }
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Gf2Error::InvalidPoly("duplicate exponent".into()));
        }
        Ok(Self { modulus, support })
    }

    /// `1 + x` modulo `x^n - 1`, the repetition-code seed.
    pub fn repetition(n: usize) -> Result<Self, Gf2Error> {
        if n < 2 {
            return Err(Gf2Error::InvalidPoly("repetition seed needs n >= 2".into()));
        }
        Self::new(n, vec![0, 1])
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    /// Polynomial of the transposed circulant: every exponent negated.
    pub fn reversed(&self) -> Self {
        let n = self.modulus;
        let support = self.support.iter().map(|&e| (n - e) % n).collect();
        Self::new(n, support).expect("negation preserves validity")
    }

    /// Multiplication by `x^shift`.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.modulus;
        let support = self.support.iter().map(|&e| (e + shift) % n).collect();
        Self::new(n, support).expect("shift preserves validity")
    }

    /// Lexicographically smallest support among all cyclic shifts.
    pub fn canonical(&self) -> Self {
        let n = self.modulus;
        // only shifts that move some exponent to 0 can be minimal
        self.support
            .iter()
            .map(|&e| self.shifted((n - e) % n))
            .min_by(|a, b| a.support.cmp(&b.support))
            .expect("nonempty support")
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Comma-joined exponents, the form used in CSV tables.
    pub fn support_string(&self) -> String {
        self.support.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_support(modulus: usize, text: &str) -> Result<Self, Gf2Error> {
        let support = text
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| Gf2Error::Parse(format!("bad exponent {t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(modulus, support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: &[usize]) -> CyclicPoly {
        CyclicPoly::new(n, s.to_vec()).unwrap()
    }

    #[test]
    fn invariants_enforced() {
        assert!(CyclicPoly::new(5, vec![]).is_err());
        assert!(CyclicPoly::new(5, vec![5]).is_err());
        assert!(CyclicPoly::new(5, vec![1, 1]).is_err());
        assert!(CyclicPoly::new(0, vec![0]).is_err());
        assert_eq!(p(5, &[3, 1]).support(), &[1, 3]);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(p(5, &[2, 3]).canonical(), p(5, &[0, 1]));
        assert_eq!(p(7, &[1, 2, 4]).canonical(), p(7, &[0, 1, 3]));
        assert_eq!(p(9, &[0]).canonical(), p(9, &[0]));
    }

    #[test]
    fn canonical_is_shift_invariant_and_idempotent() {
        let base = p(11, &[0, 3, 4, 9]);
        let c = base.canonical();
        assert_eq!(c.canonical(), c);
        for s in 0..11 {
            assert_eq!(base.shifted(s).canonical(), c);
        }
        assert!(c.support().contains(&0));
    }

    #[test]
    fn serde_rejects_invalid() {
        let ok: CyclicPoly = serde_json::from_str(r#"{"modulus":7,"support":[3,0,1]}"#).unwrap();
        assert_eq!(ok, p(7, &[0, 1, 3]));
        assert!(serde_json::from_str::<CyclicPoly>(r#"{"modulus":7,"support":[7]}"#).is_err());
    }

    #[test]
    fn support_string_round_trip() {
        let q = p(21, &[0, 4, 13]);
        assert_eq!(q.support_string(), "0,4,13");
        assert_eq!(CyclicPoly::parse_support(21, "0,4,13").unwrap(), q);
    }
}
