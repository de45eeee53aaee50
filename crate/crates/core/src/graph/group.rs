//! Groups presented by a normal-form oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Generator `k` is letter `k` (1-based), its inverse is `-k`.
pub type Letter = i8;

/// A word in the generators; oracle outputs are canonical words.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Vec<Letter> {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v
    }

    /// Formal inverse: reversed word with inverted letters.
    pub fn formal_inverse(&self) -> Vec<Letter> {
        self.0.iter().rev().map(|&l| -l).collect()
    }

    /// Exponent sum of generator `k` (1-based).
    pub fn exponent_sum(&self, k: Letter) -> i64 {
        self.0
            .iter()
            .map(|&l| match l {
                l if l == k => 1,
                l if l == -k => -1,
                _ => 0,
            })
            .sum()
    }
}

const NAMES: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.0 {
            let c = NAMES[(l.unsigned_abs() - 1) as usize % NAMES.len()];
            if l > 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{}", c.to_ascii_uppercase())?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Reduces words over `rank` generators to a unique canonical form.
pub trait NormalFormOracle: Send + Sync {
    fn name(&self) -> &str;

    fn rank(&self) -> usize;

    fn normalize(&self, letters: &[Letter]) -> Word;

    /// Hard cap on the horizon radius when no vertex budget is configured.
    fn radius_cap(&self) -> u32 {
        12
    }

    /// Upper estimate of the ball of radius `r` in the word metric.
    fn ball_size_estimate(&self, r: u32) -> u128 {
        let k = 2 * self.rank() as u128;
        (0..=r).map(|i| k.saturating_pow(i)).fold(0u128, u128::saturating_add)
    }

    /// Number of decomposition levels reported by default, if bounded.
    fn default_levels(&self) -> Option<usize> {
        None
    }

    fn generators(&self) -> Vec<Letter> {
        (1..=self.rank() as Letter).flat_map(|k| [k, -k]).collect()
    }

    fn multiply(&self, a: &Word, b: &Word) -> Word {
        self.normalize(&a.concat(b))
    }

    fn inverse(&self, a: &Word) -> Word {
        self.normalize(&a.formal_inverse())
    }
}

/// `Z^d` with canonical words `a^x b^y ...`.
#[derive(Clone, Debug)]
pub struct FreeAbelianOracle {
    rank: usize,
    name: String,
}

impl FreeAbelianOracle {
    pub fn new(rank: usize) -> Self {
        assert!((1..=8).contains(&rank));
        let name = if rank == 1 {
            "Z".to_string()
        } else {
            format!("Z^{rank}")
        };
        Self { rank, name }
    }

    pub fn coordinates(&self, w: &Word) -> Vec<i64> {
        (1..=self.rank as Letter).map(|k| w.exponent_sum(k)).collect()
    }
}

impl NormalFormOracle for FreeAbelianOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn normalize(&self, letters: &[Letter]) -> Word {
        let mut exps = vec![0i64; self.rank];
        for &l in letters {
            let k = l.unsigned_abs() as usize - 1;
            exps[k] += l.signum() as i64;
        }
        let mut out = Vec::new();
        for (k, &e) in exps.iter().enumerate() {
            let letter = (k + 1) as Letter * e.signum() as Letter;
            out.extend(std::iter::repeat_n(letter, e.unsigned_abs() as usize));
        }
        Word(out)
    }

    fn radius_cap(&self) -> u32 {
        match self.rank {
            1 => 50,
            2 => 30,
            _ => 12,
        }
    }

    fn ball_size_estimate(&self, r: u32) -> u128 {
        // Lattice points of the L1 ball: sum_k 2^k C(d,k) C(r,k).
        let d = self.rank as u128;
        let r = r as u128;
        let binom = |n: u128, k: u128| -> u128 {
            if k > n {
                return 0;
            }
            (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
        };
        (0..=d).map(|k| (1u128 << k) * binom(d, k) * binom(r, k)).sum()
    }

    fn default_levels(&self) -> Option<usize> {
        Some(5)
    }
}

/// Free group `F_k` with freely reduced words.
#[derive(Clone, Debug)]
pub struct FreeGroupOracle {
    rank: usize,
    name: String,
}

impl FreeGroupOracle {
    pub fn new(rank: usize) -> Self {
        assert!((1..=8).contains(&rank));
        Self {
            rank,
            name: format!("F{rank}"),
        }
    }
}

impl NormalFormOracle for FreeGroupOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn normalize(&self, letters: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    fn radius_cap(&self) -> u32 {
        match self.rank {
            1 => 50,
            2 => 12,
            3 => 8,
            _ => 6,
        }
    }

    fn ball_size_estimate(&self, r: u32) -> u128 {
        let k = 2 * self.rank as u128;
        if k == 2 {
            return 2 * r as u128 + 1;
        }
        1 + k * ((k - 1).saturating_pow(r) - 1) / (k - 2)
    }

    fn default_levels(&self) -> Option<usize> {
        Some(3)
    }
}

/// Finite cyclic group `Z/n` with canonical words `a^k`, `0 <= k < n`.
#[derive(Clone, Debug)]
pub struct CyclicOracle {
    order: u32,
    name: String,
}

impl CyclicOracle {
    pub fn new(order: u32) -> Self {
        assert!(order >= 1);
        Self {
            order,
            name: format!("Z/{order}"),
        }
    }
}

impl NormalFormOracle for CyclicOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        1
    }

    fn normalize(&self, letters: &[Letter]) -> Word {
        let n = self.order as i64;
        let e: i64 = letters.iter().map(|&l| l.signum() as i64).sum();
        Word(vec![1; e.rem_euclid(n) as usize])
    }

    fn radius_cap(&self) -> u32 {
        50
    }

    fn ball_size_estimate(&self, r: u32) -> u128 {
        (2 * r as u128 + 1).min(self.order as u128)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresetKind {
    FreeAbelian(usize),
    FreeGroup(usize),
    Custom(String),
}

/// A group together with its symmetric generating set and oracle.
#[derive(Clone)]
pub struct GroupPreset {
    kind: PresetKind,
    oracle: Arc<dyn NormalFormOracle>,
}

impl fmt::Debug for GroupPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupPreset")
            .field("kind", &self.kind)
            .field("oracle", &self.oracle.name())
            .finish()
    }
}

impl GroupPreset {
    pub fn free_abelian(rank: usize) -> Self {
        Self {
            kind: PresetKind::FreeAbelian(rank),
            oracle: Arc::new(FreeAbelianOracle::new(rank)),
        }
    }

    pub fn free_group(rank: usize) -> Self {
        Self {
            kind: PresetKind::FreeGroup(rank),
            oracle: Arc::new(FreeGroupOracle::new(rank)),
        }
    }

    pub fn custom(oracle: Arc<dyn NormalFormOracle>) -> Self {
        Self {
            kind: PresetKind::Custom(oracle.name().to_string()),
            oracle,
        }
    }

    pub fn kind(&self) -> &PresetKind {
        &self.kind
    }

    pub fn oracle(&self) -> &dyn NormalFormOracle {
        self.oracle.as_ref()
    }

    pub fn name(&self) -> &str {
        self.oracle.name()
    }

    pub fn generators(&self) -> Vec<Letter> {
        self.oracle.generators()
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, PresetKind::FreeAbelian(_)) || matches!(self.kind, PresetKind::FreeGroup(1))
    }
}

fn random_word(rng: &mut ChaCha8Rng, gens: &[Letter], max_len: usize) -> Vec<Letter> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| gens[rng.gen_range(0..gens.len())]).collect()
}

/// Round-trip checks on random words of length at most 8: normal forms are
/// fixed points, inserting `g g^-1` is invisible, `w w^-1` is the identity,
/// and multiplication of normal forms agrees with concatenation.
pub fn validate_oracle(oracle: &dyn NormalFormOracle, seed: u64) -> Result<()> {
    let fail = |msg: String| Error::OracleFailure {
        oracle: oracle.name().to_string(),
        msg,
    };
    let gens = oracle.generators();
    if gens.is_empty() {
        return Err(fail("empty generating set".into()));
    }
    if !oracle.normalize(&[]).is_empty() {
        return Err(fail("identity does not normalize to the empty word".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..256 {
        let w = random_word(&mut rng, &gens, 8);
        let v = random_word(&mut rng, &gens, 8);
        let nf = oracle.normalize(&w);
        if oracle.normalize(nf.letters()) != nf {
            return Err(fail(format!("normal form of {:?} is not canonical", Word(w))));
        }
        for &g in &gens {
            let mut padded = w.clone();
            let at = rng.gen_range(0..=padded.len());
            padded.splice(at..at, [g, -g]);
            if oracle.normalize(&padded) != nf {
                return Err(fail(format!(
                    "inserting a cancelling pair changes the normal form of {:?}",
                    Word(w)
                )));
            }
        }
        let mut ww = w.clone();
        ww.extend(Word(w.clone()).formal_inverse());
        if !oracle.normalize(&ww).is_empty() {
            return Err(fail(format!("{:?} times its inverse is not the identity", Word(w))));
        }
        let joined = [w.as_slice(), v.as_slice()].concat();
        if oracle.multiply(&nf, &oracle.normalize(&v)) != oracle.normalize(&joined) {
            return Err(fail(
                "multiplication of normal forms disagrees with concatenation".into(),
            ));
        }
    }
    Ok(())
}

/// Named oracles selectable by preset strings.
#[derive(Clone)]
pub struct OracleRegistry {
    entries: BTreeMap<String, GroupPreset>,
}

impl Default for OracleRegistry {
    fn default() -> Self {
        let mut reg = Self {
            entries: BTreeMap::new(),
        };
        reg.register_preset("Z", GroupPreset::free_abelian(1));
        reg.register_preset("Z^2", GroupPreset::free_abelian(2));
        reg.register_preset("Z2", GroupPreset::free_abelian(2));
        reg.register_preset("Z^3", GroupPreset::free_abelian(3));
        reg.register_preset("F2", GroupPreset::free_group(2));
        reg.register_preset("F3", GroupPreset::free_group(3));
        reg
    }
}

impl OracleRegistry {
    pub fn register(&mut self, name: &str, oracle: Arc<dyn NormalFormOracle>) {
        self.register_preset(name, GroupPreset::custom(oracle));
    }

    pub fn register_preset(&mut self, name: &str, preset: GroupPreset) {
        self.entries.insert(name.to_string(), preset);
    }

    pub fn get(&self, name: &str) -> Result<GroupPreset> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "group preset",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let f2 = FreeGroupOracle::new(2);
        assert_eq!(f2.normalize(&[1, 2, -2, -1, 2]), Word(vec![2]));
        assert_eq!(f2.inverse(&Word(vec![1, 2])), Word(vec![-2, -1]));
    }

    #[test]
    fn abelian_canonical_order() {
        let z2 = FreeAbelianOracle::new(2);
        assert_eq!(z2.normalize(&[2, 1, -2, 1, 2]), Word(vec![1, 1, 2]));
        assert_eq!(z2.coordinates(&Word(vec![1, 1, -2])), vec![2, -1]);
    }

    #[test]
    fn builtin_oracles_pass_round_trips() {
        for preset in [
            GroupPreset::free_abelian(1),
            GroupPreset::free_abelian(2),
            GroupPreset::free_group(2),
            GroupPreset::free_group(3),
        ] {
            validate_oracle(preset.oracle(), 11).unwrap();
        }
        validate_oracle(&CyclicOracle::new(5), 11).unwrap();
    }

    struct Broken;

    impl NormalFormOracle for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn rank(&self) -> usize {
            2
        }
        // Cancels only at the end of the word.
        fn normalize(&self, letters: &[Letter]) -> Word {
            let mut v = letters.to_vec();
            while v.len() >= 2 && v[v.len() - 1] == -v[v.len() - 2] {
                v.truncate(v.len() - 2);
            }
            Word(v)
        }
    }

    #[test]
    fn broken_oracle_is_rejected() {
        assert!(matches!(validate_oracle(&Broken, 3), Err(Error::OracleFailure { .. })));
    }

    #[test]
    fn ball_estimates() {
        assert_eq!(FreeAbelianOracle::new(1).ball_size_estimate(3), 7);
        assert_eq!(FreeAbelianOracle::new(2).ball_size_estimate(2), 13);
        assert_eq!(FreeGroupOracle::new(2).ball_size_estimate(2), 17);
    }

    #[test]
    fn registry_lookup() {
        let reg = OracleRegistry::default();
        assert_eq!(reg.get("Z^2").unwrap().kind(), &PresetKind::FreeAbelian(2));
        assert!(reg.get("BS(1,2)").is_err());
    }
}
