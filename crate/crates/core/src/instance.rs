//! Election instances: a candidate count, an inverse temperature and a finite
//! mixture of voter populations.

use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of an instance's mixture.
pub const FRACTION_SUM_TOL: f64 = 1e-12;

/// Dense candidate index in `0..m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Candidate(pub usize);

impl Candidate {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A population share of voters that all hold the same utility vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoterType {
    pub fraction: f64,
    pub utilities: Vec<f64>,
}

/// The exchangeable family "utility `high` on a uniformly random `k`-subset of
/// the non-special candidates, `low` on the rest, `base` on the special one".
///
/// Stands in for all `C(m−1, k)` subset types at once: sampling draws the
/// subset per voter and population quantities use the symmetric marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSubsetFamily {
    pub fraction: f64,
    pub special: usize,
    pub base: f64,
    pub high: f64,
    pub low: f64,
    pub k: usize,
}

impl SymmetricSubsetFamily {
    /// One member of the family: the `k` lowest non-special indices are high.
    pub fn representative(&self, m: usize) -> Vec<f64> {
        let mut u = vec![self.low; m];
        u[self.special] = self.base;
        let mut placed = 0;
        for (j, slot) in u.iter_mut().enumerate() {
            if placed == self.k {
                break;
            }
            if j != self.special {
                *slot = self.high;
                placed += 1;
            }
        }
        u
    }

    /// Writes a uniformly drawn member of the family into `out`.
    pub fn fill_random<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let m = out.len();
        out.fill(self.low);
        out[self.special] = self.base;
        for i in index::sample(rng, m - 1, self.k) {
            // skip over the special candidate
            let j = if i >= self.special { i + 1 } else { i };
            out[j] = self.high;
        }
    }
}

/// A mixture component of an [`Instance`].
#[derive(Clone, Copy, Debug)]
pub enum Component<'a> {
    Type(&'a VoterType),
    Family(&'a SymmetricSubsetFamily),
}

impl Component<'_> {
    pub fn fraction(&self) -> f64 {
        match self {
            Component::Type(t) => t.fraction,
            Component::Family(f) => f.fraction,
        }
    }
}

/// Candidate count `m`, inverse temperature `beta ≥ 1`, and the voter mixture.
///
/// Construction validates every invariant, including on deserialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    m: usize,
    beta: f64,
    types: Vec<VoterType>,
    families: Vec<SymmetricSubsetFamily>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    m: usize,
    beta: f64,
    #[serde(default)]
    types: Vec<VoterType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    families: Vec<SymmetricSubsetFamily>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        Instance::new(r.m, r.beta, r.types, r.families)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(i: Instance) -> Self {
        InstanceRepr { m: i.m, beta: i.beta, types: i.types, families: i.families }
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl Instance {
    pub fn new(
        m: usize,
        beta: f64,
        types: Vec<VoterType>,
        families: Vec<SymmetricSubsetFamily>,
    ) -> Result<Self> {
        let inst = Instance { m, beta, types, families };
        inst.validate()?;
        Ok(inst)
    }

    /// Single-type instance.
    pub fn single(beta: f64, utilities: Vec<f64>) -> Result<Self> {
        Instance::new(utilities.len(), beta, vec![VoterType { fraction: 1.0, utilities }], vec![])
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.m < 2 {
            return bad(format!("need at least 2 candidates, got {}", self.m));
        }
        if self.m > u16::MAX as usize {
            return bad(format!("at most {} candidates are supported", u16::MAX));
        }
        if !(self.beta.is_finite() && self.beta >= 1.0) {
            return bad(format!("beta must be a finite value >= 1, got {}", self.beta));
        }
        if self.types.is_empty() && self.families.is_empty() {
            return bad("mixture is empty".into());
        }
        for (i, t) in self.types.iter().enumerate() {
            if !(t.fraction > 0.0 && t.fraction <= 1.0) {
                return bad(format!("type {i}: fraction {} not in (0, 1]", t.fraction));
            }
            if t.utilities.len() != self.m {
                return bad(format!("type {i}: {} utilities for {} candidates", t.utilities.len(), self.m));
            }
            if let Some(u) = t.utilities.iter().find(|&&u| !unit(u)) {
                return bad(format!("type {i}: utility {u} outside [0, 1]"));
            }
        }
        for (i, f) in self.families.iter().enumerate() {
            if !(f.fraction > 0.0 && f.fraction <= 1.0) {
                return bad(format!("family {i}: fraction {} not in (0, 1]", f.fraction));
            }
            if f.special >= self.m {
                return bad(format!("family {i}: special candidate {} out of range", f.special));
            }
            if f.k == 0 || f.k >= self.m {
                return bad(format!("family {i}: subset size {} not in [1, m)", f.k));
            }
            if ![f.base, f.high, f.low].into_iter().all(unit) {
                return bad(format!("family {i}: utilities outside [0, 1]"));
            }
        }
        let total: f64 = self.components().map(|c| c.fraction()).sum();
        if (total - 1.0).abs() > FRACTION_SUM_TOL {
            return bad(format!("fractions sum to {total}, not 1"));
        }
        Ok(())
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn types(&self) -> &[VoterType] {
        &self.types
    }

    pub fn families(&self) -> &[SymmetricSubsetFamily] {
        &self.families
    }

    /// Finite types first, then families.
    pub fn components(&self) -> impl Iterator<Item = Component<'_>> + '_ {
        self.types
            .iter()
            .map(Component::Type)
            .chain(self.families.iter().map(Component::Family))
    }

    /// Same mixture at a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Instance> {
        Instance::new(self.m, beta, self.types.clone(), self.families.clone())
    }

    /// Renames candidate `j` to `perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Instance> {
        if !is_permutation(perm, self.m) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{}", self.m)));
        }
        let types = self
            .types
            .iter()
            .map(|t| {
                let mut u = vec![0.0; self.m];
                for (j, &x) in t.utilities.iter().enumerate() {
                    u[perm[j]] = x;
                }
                VoterType { fraction: t.fraction, utilities: u }
            })
            .collect();
        let families = self
            .families
            .iter()
            .map(|f| SymmetricSubsetFamily { special: perm[f.special], ..f.clone() })
            .collect();
        Instance::new(self.m, self.beta, types, families)
    }

    pub fn from_json(s: &str) -> Result<Instance> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub(crate) fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family() -> SymmetricSubsetFamily {
        SymmetricSubsetFamily { fraction: 0.5, special: 2, base: 0.5, high: 1.0, low: 0.0, k: 2 }
    }

    #[test]
    fn json_schema_round_trip() {
        let json = r#"{"m": 4, "beta": 2.0,
            "types": [{"fraction": 0.5, "utilities": [1, 0, 0.5, 0]}],
            "families": [{"fraction": 0.5, "special": 2, "base": 0.5, "high": 1, "low": 0, "k": 2}]}"#;
        let inst = Instance::from_json(json).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.families()[0], family());
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn families_key_is_optional() {
        let inst = Instance::from_json(r#"{"m":2,"beta":1,"types":[{"fraction":1,"utilities":[0,1]}]}"#).unwrap();
        assert!(inst.families().is_empty());
    }

    #[test]
    fn rejects_bad_fractions() {
        let t = |f| VoterType { fraction: f, utilities: vec![0.0, 1.0] };
        assert!(Instance::new(2, 1.0, vec![t(0.5), t(0.4)], vec![]).is_err());
        assert!(Instance::new(2, 1.0, vec![t(0.5), t(0.5 + 1e-9)], vec![]).is_err());
        assert!(Instance::new(2, 1.0, vec![t(0.5), t(0.5 + 1e-14)], vec![]).is_ok());
    }

    #[test]
    fn rejects_out_of_model_inputs() {
        assert!(Instance::single(0.5, vec![0.0, 1.0]).is_err());
        assert!(Instance::single(1.0, vec![0.0, 1.2]).is_err());
        assert!(Instance::single(1.0, vec![0.3]).is_err());
        let mut f = family();
        f.fraction = 1.0;
        f.k = 4;
        assert!(Instance::new(4, 1.0, vec![], vec![f]).is_err());
    }

    #[test]
    fn family_members() {
        let f = family();
        assert_eq!(f.representative(4), vec![1.0, 1.0, 0.5, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut buf = vec![0.0; 4];
        for _ in 0..100 {
            f.fill_random(&mut rng, &mut buf);
            assert_eq!(buf[2], 0.5);
            assert_eq!(buf.iter().filter(|&&x| x == 1.0).count(), 2);
        }
    }

    #[test]
    fn relabel_moves_utilities() {
        let inst = Instance::single(1.0, vec![0.1, 0.2, 0.3]).unwrap();
        let r = inst.relabel(&[1, 2, 0]).unwrap();
        assert_eq!(r.types()[0].utilities, vec![0.3, 0.1, 0.2]);
        assert!(inst.relabel(&[0, 0, 1]).is_err());
    }
}
