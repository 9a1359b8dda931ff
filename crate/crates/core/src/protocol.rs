//! Post-processing steps on classical-quantum states: error verification,
//! abort collapse, privacy amplification, correctness and key length.
//!
//! The verification outcome `V` is always appended as a classical register
//! and therefore treated as public: every distance computed afterwards sees
//! it on Eve's side. The "virtual" no-abort scenario is simply the state
//! before [`abort_collapse`]; its `V = 0` branch is identical to the actual
//! one by construction.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::bits::{BitString, Symbol};
use crate::block::HermitianBlock;
use crate::cq_state::{Alphabet, CqState, Register};
use crate::error::{Error, Result};
use crate::hashing::{enumerate_family, ToeplitzHash, FAMILY_CAP_BITS};

pub const HASH_REGISTER: &str = "H";
pub const VERDICT_REGISTER: &str = "V";
pub const FAMILY_REGISTER: &str = "F";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `V = 0`.
    Continue,
    /// `V = 1`.
    Abort,
}

impl Verdict {
    pub fn symbol(self) -> Symbol {
        Symbol::bit(self == Verdict::Abort)
    }
}

/// A state with the verification registers appended (`H` when hash-based, and `V`).
#[derive(Debug, Clone)]
pub struct VerificationOutcome {
    pub state: CqState,
    /// `|H|`; zero for predicate verification, which announces only `V`.
    pub tag_bits: usize,
}

impl VerificationOutcome {
    /// The sub-normalized branch `ρ^{V=v}`, with `V` removed.
    pub fn branch(&self, verdict: Verdict) -> Result<CqState> {
        self.state.condition(VERDICT_REGISTER, &verdict.symbol())
    }

    /// `Pr[V = 0]` (relative to the input trace, not renormalized).
    pub fn continue_probability(&self) -> Result<f64> {
        Ok(self.branch(Verdict::Continue)?.total_trace())
    }
}

fn bit_width(state: &CqState, register: &str) -> Result<usize> {
    state
        .register(register)?
        .alphabet
        .bit_width()
        .ok_or_else(|| Error::InvalidRegister(alloc::format!("{register} does not hold bit-strings")))
}

fn bits_at(k: &[Symbol], idx: usize, register: &str) -> Result<BitString> {
    k[idx].as_bits().copied().ok_or_else(|| Error::AbortSymbolPresent(register.to_string()))
}

/// Hash-based verification: appends `H = h(A)` and `V = [h(A) ≠ h(B)]`.
pub fn verify_with_hash(
    state: &CqState,
    reg_a: &str,
    reg_b: &str,
    hash: &ToeplitzHash,
) -> Result<VerificationOutcome> {
    for reg in [reg_a, reg_b] {
        let width = bit_width(state, reg)?;
        if width != hash.n_in() {
            return Err(Error::LengthMismatch { expected: hash.n_in(), found: width });
        }
    }
    for reg in [HASH_REGISTER, VERDICT_REGISTER] {
        if state.has_register(reg) {
            return Err(Error::DuplicateRegister(reg.to_string()));
        }
    }
    let ia = state.register_index(reg_a)?;
    let ib = state.register_index(reg_b)?;
    let mut registers = state.registers().to_vec();
    registers.push(Register::bits(HASH_REGISTER, hash.n_out()));
    registers.push(Register::bits(VERDICT_REGISTER, 1));
    let out = state.remap(registers, |k| {
        let ha = hash.apply_value(bits_at(k, ia, reg_a)?.value());
        let hb = hash.apply_value(bits_at(k, ib, reg_b)?.value());
        let mut k = k.to_vec();
        k.push(Symbol::Bits(BitString::new(ha, hash.n_out())?));
        k.push(Symbol::bit(ha != hb));
        Ok(k)
    })?;
    Ok(VerificationOutcome { state: out, tag_bits: hash.n_out() })
}

/// Verification by an arbitrary rule on the assignment; only `V` is announced.
pub fn verify_with_predicate<F>(state: &CqState, mut predicate: F) -> Result<VerificationOutcome>
where
    F: FnMut(&[Symbol]) -> Verdict,
{
    let out = state.apply_classical_function(Register::bits(VERDICT_REGISTER, 1), |k| predicate(k).symbol())?;
    Ok(VerificationOutcome { state: out, tag_bits: 0 })
}

/// Replaces every key register by `⊥` on `V = 1` terms; `V = 0` terms, Eve
/// blocks and all other registers are untouched.
pub fn abort_collapse(outcome: &VerificationOutcome, key_registers: &[&str]) -> Result<CqState> {
    let state = &outcome.state;
    let iv = state.register_index(VERDICT_REGISTER)?;
    let key_idx: Vec<usize> = key_registers.iter().map(|n| state.register_index(n)).collect::<Result<_>>()?;
    let mut registers = state.registers().to_vec();
    for &i in &key_idx {
        registers[i].alphabet = registers[i].alphabet.with_abort();
    }
    let abort = Verdict::Abort.symbol();
    state.remap(registers, |k| {
        let mut k = k.to_vec();
        if k[iv] == abort {
            for &i in &key_idx {
                k[i] = Symbol::Abort;
            }
        }
        Ok(k)
    })
}

/// How the privacy-amplification function is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum PaMode {
    /// One publicly known function.
    Fixed(ToeplitzHash),
    /// Uniform over the whole Toeplitz family, materialized as the public register `F`.
    Averaged,
    /// Uniform over the listed members (for inputs too wide to enumerate), also as `F`.
    Sampled(Vec<ToeplitzHash>),
}

/// Appends `output = f(source)`; `⊥` sources map to `⊥`.
///
/// In the averaged and sampled modes a public register `F` holding the
/// function's seed is added first (or reused if the state already has one),
/// so the result is `Σ_f Pr[F=f] [f]_F ⊗ [f(a)]_{K'} ⊗ …`. The source
/// register is kept; callers marginalize it before evaluating distances.
pub fn privacy_amplification(
    state: &CqState,
    source: &str,
    output: &str,
    out_bits: usize,
    mode: &PaMode,
) -> Result<CqState> {
    let n_in = bit_width(state, source)?;
    if out_bits == 0 || out_bits > n_in {
        return Err(Error::OutOfRange("privacy amplification output length"));
    }
    let isrc = state.register_index(source)?;
    let out_alphabet = if state.registers()[isrc].alphabet.has_abort() {
        Alphabet::bits_with_abort(out_bits)
    } else {
        Alphabet::bits(out_bits)
    };
    let out_register = Register::new(output, out_alphabet);
    let hash_of = move |h: &ToeplitzHash, s: Symbol| -> Result<Symbol> {
        match s {
            Symbol::Abort => Ok(Symbol::Abort),
            Symbol::Bits(a) => Ok(Symbol::Bits(h.apply(&a)?)),
        }
    };

    let seed_bits = n_in + out_bits - 1;
    let family: Vec<ToeplitzHash> = match mode {
        PaMode::Fixed(h) => {
            if h.n_in() != n_in || h.n_out() != out_bits {
                return Err(Error::LengthMismatch { expected: n_in, found: h.n_in() });
            }
            let mut failure = None;
            let out = state.apply_classical_function(out_register, |k| {
                hash_of(h, k[isrc]).unwrap_or_else(|e| {
                    failure = Some(e);
                    Symbol::Abort
                })
            });
            return match failure {
                Some(e) => Err(e),
                None => out,
            };
        }
        PaMode::Averaged => {
            if seed_bits > FAMILY_CAP_BITS {
                return Err(Error::FamilyTooLarge { seed_bits });
            }
            enumerate_family(n_in, out_bits)?.collect()
        }
        PaMode::Sampled(hashes) => {
            if hashes.is_empty() {
                return Err(Error::OutOfRange("sampled hash list"));
            }
            if let Some(h) = hashes.iter().find(|h| h.n_in() != n_in || h.n_out() != out_bits) {
                return Err(Error::LengthMismatch { expected: n_in, found: h.n_in() });
            }
            hashes.clone()
        }
    };

    if state.has_register(output) {
        return Err(Error::DuplicateRegister(output.to_string()));
    }

    if state.has_register(FAMILY_REGISTER) {
        let ifam = state.register_index(FAMILY_REGISTER)?;
        let width = bit_width(state, FAMILY_REGISTER)?;
        if width != seed_bits {
            return Err(Error::LengthMismatch { expected: seed_bits, found: width });
        }
        let mut registers = state.registers().to_vec();
        registers.push(out_register);
        return state.remap(registers, |k| {
            let seed = bits_at(k, ifam, FAMILY_REGISTER)?;
            let h = ToeplitzHash::new(n_in, out_bits, seed)?;
            let mut k = k.to_vec();
            k.push(hash_of(&h, k[isrc])?);
            Ok(k)
        });
    }

    let weight = 1.0 / family.len() as f64;
    let mut terms: BTreeMap<Vec<Symbol>, HermitianBlock> = BTreeMap::new();
    for (k, b) in state.terms() {
        let scaled = b.scale(weight);
        for h in &family {
            let mut nk = k.to_vec();
            nk.push(Symbol::Bits(h.seed()));
            nk.push(hash_of(h, k[isrc])?);
            match terms.get_mut(&nk) {
                Some(existing) => existing.add_scaled(&scaled, 1.0),
                None => {
                    terms.insert(nk, scaled.clone());
                }
            }
        }
    }
    let mut registers = state.registers().to_vec();
    registers.push(Register::bits(FAMILY_REGISTER, seed_bits));
    registers.push(out_register);
    Ok(CqState::from_parts(registers, state.eve_dim(), terms, state.tolerances()))
}

/// Inputs to the final key-length computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyLengthParams {
    /// Lower bound on `H_min(A|E)` in bits.
    pub hmin_bound: f64,
    pub eps_sec: f64,
    /// `|H|`, the verification tag length.
    pub tag_bits: u32,
}

impl KeyLengthParams {
    /// `ℓ = ⌊H_min − 2 log₂(1/ε_sec)⌋`, before the verification overhead.
    pub fn base_length(&self) -> Result<i64> {
        if !self.hmin_bound.is_finite() || self.hmin_bound <= 0.0 {
            return Err(Error::OutOfRange("hmin_bound"));
        }
        if !(self.eps_sec > 0.0 && self.eps_sec <= 1.0) {
            return Err(Error::OutOfRange("eps_sec"));
        }
        let raw = self.hmin_bound - 2.0 * libm::log2(1.0 / self.eps_sec);
        // log2 of an exact power of two may land an ulp away from the integer
        let nearest = libm::round(raw);
        let snapped = if (raw - nearest).abs() < 1e-12 { nearest } else { libm::floor(raw) };
        Ok(snapped as i64)
    }
}

/// `ℓ − |H| − 1`: the privacy-amplification output length once the
/// announced tag and the verification bit are paid for.
pub fn key_length(params: &KeyLengthParams) -> Result<u32> {
    let key_length = params.base_length()? - params.tag_bits as i64 - 1;
    if key_length < 1 {
        return Err(Error::KeyLengthNonpositive { key_length });
    }
    Ok(key_length as u32)
}

/// `Pr[K_A ≠ K_B]`, with `⊥ = ⊥` counted as a match.
pub fn prob_keys_differ(state: &CqState, reg_ka: &str, reg_kb: &str) -> Result<f64> {
    let ia = state.register_index(reg_ka)?;
    let ib = state.register_index(reg_kb)?;
    Ok(state.terms().filter(|(k, _)| k[ia] != k[ib]).map(|(_, b)| b.trace()).fold(0.0, |acc, x| acc + x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectnessBound {
    /// Family-averaged `Pr[V = 0 | A ≠ B]`.
    pub empirical: f64,
    /// `2^{-n_out}`.
    pub analytic: f64,
    pub pass: bool,
}

/// Exhaustive family average of `Pr[V=0 ∧ A≠B] / Pr[A≠B]` for hash
/// verification with `n_out`-bit tags, against the universal bound.
pub fn correctness_bound(state: &CqState, reg_a: &str, reg_b: &str, n_out: usize) -> Result<CorrectnessBound> {
    let n_in = bit_width(state, reg_a)?;
    let width_b = bit_width(state, reg_b)?;
    if width_b != n_in {
        return Err(Error::LengthMismatch { expected: n_in, found: width_b });
    }
    let family: Vec<ToeplitzHash> = enumerate_family(n_in, n_out)?.collect();
    let ia = state.register_index(reg_a)?;
    let ib = state.register_index(reg_b)?;
    let mut pairs: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for (k, b) in state.terms() {
        let a = bits_at(k, ia, reg_a)?.value();
        let c = bits_at(k, ib, reg_b)?.value();
        if a != c {
            *pairs.entry((a, c)).or_insert(0.0) += b.trace();
        }
    }
    let disagreement: f64 = pairs.values().fold(0.0, |acc, x| acc + x);
    if disagreement <= 0.0 {
        return Err(Error::NoDisagreementMass);
    }
    let mut undetected = 0.0;
    for (&(a, c), &w) in &pairs {
        let hits = family.iter().filter(|h| h.apply_value(a) == h.apply_value(c)).count();
        undetected += w * hits as f64 / family.len() as f64;
    }
    let empirical = undetected / disagreement;
    let analytic = libm::pow(2.0, -(n_out as f64));
    Ok(CorrectnessBound { empirical, analytic, pass: empirical <= analytic + state.tolerances().arithmetic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::secrecy_distance;
    use alloc::vec;

    fn s(text: &str) -> Symbol {
        text.parse().unwrap()
    }

    fn classical(registers: Vec<Register>, terms: Vec<(Vec<&str>, f64)>) -> CqState {
        CqState::build(
            registers,
            1,
            terms.into_iter().map(|(k, w)| (k.into_iter().map(s).collect(), HermitianBlock::diagonal(vec![w]))).collect(),
        )
        .unwrap()
    }

    fn uniform_copied(n: usize) -> CqState {
        let w = 1.0 / (1u64 << n) as f64;
        let terms = BitString::all(n)
            .map(|a| (vec![Symbol::Bits(a), Symbol::Bits(a)], HermitianBlock::identity(1).scale(w)))
            .collect();
        CqState::build(vec![Register::bits("A", n), Register::bits("B", n)], 1, terms).unwrap()
    }

    #[test]
    fn identical_keys_always_continue() {
        let st = uniform_copied(3);
        for h in enumerate_family(3, 2).unwrap() {
            let out = verify_with_hash(&st, "A", "B", &h).unwrap();
            assert_eq!(out.continue_probability().unwrap(), 1.0);
            assert_eq!(out.tag_bits, 2);
        }
    }

    #[test]
    fn deterministic_mismatch_passes_at_collision_rate() {
        let st = classical(vec![Register::bits("A", 3), Register::bits("B", 3)], vec![(vec!["101", "011"], 1.0)]);
        let family: Vec<_> = enumerate_family(3, 2).unwrap().collect();
        let avg: f64 = family
            .iter()
            .map(|h| verify_with_hash(&st, "A", "B", h).unwrap().continue_probability().unwrap())
            .fold(0.0, |acc, x| acc + x)
            / family.len() as f64;
        assert_eq!(avg, 0.25);
    }

    #[test]
    fn hash_width_must_match() {
        let st = uniform_copied(3);
        let h = ToeplitzHash::new(2, 1, BitString::zeros(2)).unwrap();
        assert!(matches!(verify_with_hash(&st, "A", "B", &h), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn predicate_extremes() {
        let st = uniform_copied(2);
        let go = verify_with_predicate(&st, |_| Verdict::Continue).unwrap();
        assert!(go.branch(Verdict::Continue).unwrap().approx_eq(&st, 0.0));
        assert_eq!(go.tag_bits, 0);
        let stop = verify_with_predicate(&st, |_| Verdict::Abort).unwrap();
        assert_eq!(stop.branch(Verdict::Abort).unwrap().total_trace(), st.total_trace());
    }

    #[test]
    fn collapse_without_aborts_changes_nothing_but_alphabets() {
        let st = uniform_copied(2);
        let out = verify_with_predicate(&st, |_| Verdict::Continue).unwrap();
        let collapsed = abort_collapse(&out, &["A", "B"]).unwrap();
        assert_eq!(collapsed.trace_out_eve(), out.state.trace_out_eve());
        assert!(collapsed.register("A").unwrap().alphabet.has_abort());
    }

    #[test]
    fn full_abort_is_ideal() {
        let st = uniform_copied(2);
        let out = verify_with_predicate(&st, |_| Verdict::Abort).unwrap();
        let collapsed = abort_collapse(&out, &["A", "B"]).unwrap();
        assert_eq!(collapsed.num_terms(), 1);
        let ideal = collapsed.ideal_state(&["A", "B"]).unwrap();
        assert_eq!(crate::metrics::trace_distance(&collapsed, &ideal).unwrap(), 0.0);
    }

    #[test]
    fn fixed_pa_selects_first_bit() {
        let st = uniform_copied(2);
        let first_bit = ToeplitzHash::new(2, 1, s("10").as_bits().copied().unwrap()).unwrap();
        let out = privacy_amplification(&st, "A", "K", 1, &PaMode::Fixed(first_bit)).unwrap();
        let ia = out.register_index("A").unwrap();
        let ik = out.register_index("K").unwrap();
        for (k, _) in out.terms() {
            assert_eq!(k[ik].as_bits().unwrap().bit(0), k[ia].as_bits().unwrap().bit(0));
        }
    }

    #[test]
    fn averaged_pa_of_uniform_independent_key_is_perfect() {
        let terms = BitString::all(4)
            .flat_map(|a| {
                (0..2).map(move |e| (vec![Symbol::Bits(a)], HermitianBlock::projector(2, e).scale(1.0 / 32.0)))
            })
            .collect();
        let st = CqState::build(vec![Register::bits("A", 4)], 2, terms).unwrap();
        let pa = privacy_amplification(&st, "A", "K", 2, &PaMode::Averaged).unwrap();
        assert!(pa.has_register(FAMILY_REGISTER));
        assert!((pa.total_trace() - 1.0).abs() < 1e-12);
        let k = pa.marginalize(&["A"]).unwrap();
        // Zero-row members are not surjective; the average is exact, not zero.
        let d = secrecy_distance(&k, "K").unwrap();
        let lhl = libm::pow(2.0, -(4.0 - 2.0) / 2.0);
        assert!(d <= lhl, "{d}");
    }

    #[test]
    fn bijective_pa_preserves_secrecy() {
        let st = classical(
            vec![Register::bits("A", 2), Register::bits("E", 1)],
            vec![(vec!["00", "0"], 0.4), (vec!["01", "1"], 0.1), (vec!["10", "0"], 0.3), (vec!["11", "1"], 0.2)],
        );
        // seed 010 → rows 10 and 01: the identity map
        let id = ToeplitzHash::new(2, 2, s("010").as_bits().copied().unwrap()).unwrap();
        let pa = privacy_amplification(&st, "A", "K", 2, &PaMode::Fixed(id)).unwrap();
        let k = pa.marginalize(&["A"]).unwrap();
        let before = secrecy_distance(&st, "A").unwrap();
        let after = secrecy_distance(&k, "K").unwrap();
        assert!((before - after).abs() < 1e-15);
    }

    #[test]
    fn pa_reuses_existing_family_register() {
        let st = uniform_copied(3);
        let pa = privacy_amplification(&st, "A", "KA", 2, &PaMode::Averaged).unwrap();
        let pa = privacy_amplification(&pa, "B", "KB", 2, &PaMode::Averaged).unwrap();
        assert_eq!(prob_keys_differ(&pa, "KA", "KB").unwrap(), 0.0);
        assert!(matches!(
            privacy_amplification(&pa, "A", "KC", 1, &PaMode::Averaged),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pa_rejects_bad_lengths() {
        let st = uniform_copied(3);
        assert!(privacy_amplification(&st, "A", "K", 0, &PaMode::Averaged).is_err());
        assert!(privacy_amplification(&st, "A", "K", 4, &PaMode::Averaged).is_err());
        let h = ToeplitzHash::new(3, 1, BitString::zeros(3)).unwrap();
        assert!(privacy_amplification(&st, "A", "K", 2, &PaMode::Fixed(h)).is_err());
    }

    #[test]
    fn key_length_examples() {
        let p = KeyLengthParams { hmin_bound: 100.0, eps_sec: libm::pow(2.0, -20.0), tag_bits: 10 };
        assert_eq!(key_length(&p).unwrap(), 49);
        let p = KeyLengthParams { hmin_bound: 100.0, eps_sec: 1e-6, tag_bits: 10 };
        assert_eq!(key_length(&p).unwrap(), 49);
        let p = KeyLengthParams { hmin_bound: 17.0, eps_sec: 1.0, tag_bits: 0 };
        assert_eq!(key_length(&p).unwrap(), 16);
        let p = KeyLengthParams { hmin_bound: 5.0, eps_sec: 0.125, tag_bits: 0 };
        assert!(matches!(key_length(&p), Err(Error::KeyLengthNonpositive { key_length: -2 })));
        let p = KeyLengthParams { hmin_bound: 5.0, eps_sec: 0.0, tag_bits: 0 };
        assert!(matches!(key_length(&p), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn keys_differ_examples() {
        let st = uniform_copied(1);
        assert_eq!(prob_keys_differ(&st, "A", "B").unwrap(), 0.0);
        let indep = classical(
            vec![Register::bits("A", 1), Register::bits("B", 1)],
            vec![(vec!["0", "0"], 0.25), (vec!["0", "1"], 0.25), (vec!["1", "0"], 0.25), (vec!["1", "1"], 0.25)],
        );
        assert_eq!(prob_keys_differ(&indep, "A", "B").unwrap(), 0.5);
    }

    #[test]
    fn correctness_bound_examples() {
        let st = classical(vec![Register::bits("A", 4), Register::bits("B", 4)], vec![(vec!["1001", "0011"], 1.0)]);
        let r = correctness_bound(&st, "A", "B", 2).unwrap();
        assert_eq!(r.empirical, 0.25);
        assert_eq!(r.analytic, 0.25);
        assert!(r.pass);
        assert_eq!(correctness_bound(&uniform_copied(3), "A", "B", 1), Err(Error::NoDisagreementMass));
    }
}
