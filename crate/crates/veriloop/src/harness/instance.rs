//! Seeded random instances.
//!
//! Every instance owns a ChaCha8 stream: the generator is seeded with the
//! run's `master_seed` and switched to stream `instance_index`, so instances
//! are independent of each other, of thread scheduling, and of how many
//! trials the run has. The same generator keeps going after the state is
//! drawn, supplying hash seeds and lengths for the check.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use veriloop_core::{CqState, HermitianBlock, Register, Symbol};

use crate::error::{Error, Result};

pub const MAX_BITS: usize = 8;
pub const MAX_EVE: usize = 16;
/// Instances are scaled by `2^{-u·MAX_SCALE_BITS}`, `u` uniform in `[0, 1)`.
pub const MAX_SCALE_BITS: f64 = 6.0;

/// How `A`, `B` and Eve are correlated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `B` drawn independently of `A`.
    Independent,
    /// `B = A`.
    Copied,
    /// `B = A` through a binary symmetric channel with flip probability `p`.
    NoisyCopy(f64),
    /// `A` uniform, Eve holds `e` with `z = e mod 2`, and
    /// `B = A ⊕ δ·(z ⊕ ⟨s, A⟩)` for hidden masks `s, δ ≠ 0`: the verification
    /// verdict then tells Eve the parity `⟨s, A⟩`.
    AdversarialParity,
}

impl Profile {
    pub const CYCLE: [Profile; 4] =
        [Profile::Independent, Profile::Copied, Profile::NoisyCopy(0.1), Profile::AdversarialParity];
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Independent => f.write_str("independent"),
            Profile::Copied => f.write_str("copied"),
            Profile::NoisyCopy(p) => write!(f, "noisy-copy({p})"),
            Profile::AdversarialParity => f.write_str("adversarial-parity"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Profile::Independent),
            "copied" => Ok(Profile::Copied),
            "adversarial-parity" => Ok(Profile::AdversarialParity),
            _ => {
                let p = s
                    .strip_prefix("noisy-copy(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown profile {s:?}")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidSpec(format!("flip probability {p} outside [0, 1]")));
                }
                Ok(Profile::NoisyCopy(p))
            }
        }
    }
}

impl Serialize for Profile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n_bits_a: usize,
    pub n_bits_b: usize,
    pub eve_alphabet: usize,
    pub profile: Profile,
    pub master_seed: u64,
    pub instance_index: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bits_a == 0 || self.n_bits_b == 0 || self.eve_alphabet == 0 {
            return Err(Error::InvalidSpec("sizes must be positive".into()));
        }
        if self.n_bits_a > MAX_BITS || self.n_bits_b > MAX_BITS {
            return Err(Error::CapExceeded(format!("key length above {MAX_BITS} bits")));
        }
        if self.eve_alphabet > MAX_EVE {
            return Err(Error::CapExceeded(format!("Eve alphabet above {MAX_EVE}")));
        }
        if self.profile != Profile::Independent && self.n_bits_a != self.n_bits_b {
            return Err(Error::InvalidSpec(format!("profile {} needs n_bits_a = n_bits_b", self.profile)));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.instance_index);
        rng
    }
}

/// Normalized exponentials raised to `sharpness` (1 gives a flat Dirichlet draw).
fn weights(rng: &mut ChaCha8Rng, n: usize, sharpness: i32) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| (-(1.0 - rng.gen::<f64>()).ln()).powi(sharpness)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn parity(x: u64) -> u64 {
    (x.count_ones() & 1) as u64
}

/// Draws `ρ_{ABE}` with classical Eve (diagonal blocks of dimension
/// `eve_alphabet`), scaled to a random trace in `(2^{-6}, 1]`.
pub fn random_instance(spec: &InstanceSpec) -> Result<CqState> {
    random_instance_with(spec, &mut spec.rng())
}

/// As [`random_instance`], drawing from a caller-held generator.
pub fn random_instance_with(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<CqState> {
    spec.validate()?;
    let (na, nb, ne) = (spec.n_bits_a, spec.n_bits_b, spec.eve_alphabet);
    let scale = (-rng.gen::<f64>() * MAX_SCALE_BITS).exp2();
    // joint[(a, b)][e]
    let mut joint: std::collections::BTreeMap<(u64, u64), Vec<f64>> = Default::default();
    let mut add = |a: u64, b: u64, e: usize, w: f64| {
        if w > 0.0 {
            joint.entry((a, b)).or_insert_with(|| vec![0.0; ne])[e] += w;
        }
    };

    if spec.profile == Profile::AdversarialParity {
        let n = na;
        let s = rng.gen_range(1..1u64 << n);
        let delta = rng.gen_range(1..1u64 << n);
        let pa = 1.0 / (1u64 << n) as f64;
        let pe = 1.0 / ne as f64;
        for a in 0..1u64 << n {
            for e in 0..ne {
                let z = e as u64 & 1;
                let b = if z != parity(s & a) { a ^ delta } else { a };
                add(a, b, e, pa * pe);
            }
        }
    } else {
        let pa = weights(rng, 1 << na, 1);
        // Eve's view of A: a random channel, sharpened so she learns something
        let channel: Vec<Vec<f64>> = (0..1usize << na).map(|_| weights(rng, ne, 3)).collect();
        let pb = match spec.profile {
            Profile::Independent => Some(weights(rng, 1 << nb, 1)),
            _ => None,
        };
        for a in 0..1u64 << na {
            for b in 0..1u64 << nb {
                let pb_given_a = match spec.profile {
                    Profile::Independent => pb.as_ref().expect("drawn above")[b as usize],
                    Profile::Copied => {
                        if a == b {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Profile::NoisyCopy(p) => {
                        let d = (a ^ b).count_ones() as i32;
                        p.powi(d) * (1.0 - p).powi(na as i32 - d)
                    }
                    Profile::AdversarialParity => unreachable!(),
                };
                for (e, &w) in channel[a as usize].iter().enumerate() {
                    add(a, b, e, pa[a as usize] * pb_given_a * w);
                }
            }
        }
    }

    let terms = joint
        .into_iter()
        .map(|((a, b), eve)| {
            let key = vec![Symbol::bits(a, na)?, Symbol::bits(b, nb)?];
            Ok((key, HermitianBlock::diagonal(eve.into_iter().map(|w| w * scale).collect())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CqState::build(vec![Register::bits("A", na), Register::bits("B", nb)], ne, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(profile: Profile) -> InstanceSpec {
        InstanceSpec { n_bits_a: 3, n_bits_b: 3, eve_alphabet: 4, profile, master_seed: 11, instance_index: 5 }
    }

    #[test]
    fn profile_text_round_trip() {
        for p in Profile::CYCLE {
            assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        }
        assert!("noisy-copy(1.5)".parse::<Profile>().is_err());
        assert!("bogus".parse::<Profile>().is_err());
    }

    #[test]
    fn regenerates_identically() {
        for p in Profile::CYCLE {
            let x = random_instance(&spec(p)).unwrap();
            let y = random_instance(&spec(p)).unwrap();
            assert!(x.approx_eq(&y, 0.0));
        }
    }

    #[test]
    fn copied_has_no_disagreement() {
        let s = random_instance(&spec(Profile::Copied)).unwrap();
        let ia = s.register_index("A").unwrap();
        assert!(s.terms().all(|(k, _)| k[ia] == k[ia + 1]));
    }

    #[test]
    fn noiseless_copy_is_copied() {
        let x = random_instance(&spec(Profile::Copied)).unwrap();
        let y = random_instance(&spec(Profile::NoisyCopy(0.0))).unwrap();
        assert_eq!(x.num_terms(), y.num_terms());
        for ((ka, ba), (kb, bb)) in x.terms().zip(y.terms()) {
            assert_eq!(ka, kb);
            assert_eq!(ba, bb);
        }
    }

    #[test]
    fn caps() {
        let mut s = spec(Profile::Copied);
        s.n_bits_a = 9;
        s.n_bits_b = 9;
        assert!(matches!(random_instance(&s), Err(Error::CapExceeded(_))));
        let mut s = spec(Profile::Independent);
        s.eve_alphabet = 17;
        assert!(matches!(random_instance(&s), Err(Error::CapExceeded(_))));
        let mut s = spec(Profile::Copied);
        s.n_bits_b = 2;
        assert!(matches!(random_instance(&s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn trace_is_subnormalized() {
        for i in 0..20 {
            let mut s = spec(Profile::CYCLE[i % 4]);
            s.instance_index = i as u64;
            let t = random_instance(&s).unwrap().total_trace();
            assert!(t <= 1.0 + 1e-12 && t >= (-MAX_SCALE_BITS).exp2() - 1e-12, "{t}");
        }
    }
}
