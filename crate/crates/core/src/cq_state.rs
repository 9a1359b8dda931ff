//! Sub-normalized classical-quantum states.
//!
//! A [`CqState`] is `Σ_x [x₁]⊗…⊗[x_r] ⊗ ρ_E^x` over named classical
//! registers and one quantum system `E`. Terms are keyed by the full
//! assignment tuple; absent tuples carry the zero block. Every operation
//! returns a new state.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bits::{BitString, Symbol};
use crate::block::{HermitianBlock, MAX_EVE_DIM};
use crate::error::{Error, Result};

/// Classical marginal: assignment → weight.
pub type ClassicalDistribution = BTreeMap<Vec<Symbol>, f64>;

/// Ordered, finite set of symbols a register may hold.
#[derive(Debug, Clone)]
pub enum Alphabet {
    /// All bit-strings of `width` bits in numeric order, then `⊥` if `abort`.
    Bits { width: u8, abort: bool },
    Listed(Vec<Symbol>),
}

impl Alphabet {
    pub fn bits(width: usize) -> Self {
        assert!(width <= 64);
        Alphabet::Bits { width: width as u8, abort: false }
    }

    pub fn bits_with_abort(width: usize) -> Self {
        assert!(width <= 64);
        Alphabet::Bits { width: width as u8, abort: true }
    }

    pub fn listed(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidRegister("empty alphabet".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidRegister(alloc::format!("repeated symbol {s}")));
            }
        }
        Ok(Alphabet::Listed(symbols))
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        match (self, symbol) {
            (Alphabet::Bits { width, .. }, Symbol::Bits(b)) => b.len() == *width as usize,
            (Alphabet::Bits { abort, .. }, Symbol::Abort) => *abort,
            (Alphabet::Listed(list), s) => list.contains(s),
        }
    }

    pub fn has_abort(&self) -> bool {
        self.contains(&Symbol::Abort)
    }

    /// Number of symbols, as a float so 64-bit alphabets are representable.
    pub fn size(&self) -> f64 {
        match self {
            Alphabet::Bits { width, abort } => {
                libm::pow(2.0, *width as f64) + if *abort { 1.0 } else { 0.0 }
            }
            Alphabet::Listed(list) => list.len() as f64,
        }
    }

    /// Number of non-abort symbols.
    pub fn key_count(&self) -> f64 {
        self.size() - if self.has_abort() { 1.0 } else { 0.0 }
    }

    /// Common width when every non-abort symbol is a bit-string of one length.
    pub fn bit_width(&self) -> Option<usize> {
        match self {
            Alphabet::Bits { width, .. } => Some(*width as usize),
            Alphabet::Listed(list) => {
                let mut widths = list.iter().filter_map(|s| s.as_bits().map(BitString::len));
                let first = widths.next()?;
                widths.all(|w| w == first).then_some(first)
            }
        }
    }

    /// The same alphabet with `⊥` appended if missing.
    pub fn with_abort(&self) -> Alphabet {
        match self {
            Alphabet::Bits { width, .. } => Alphabet::Bits { width: *width, abort: true },
            Alphabet::Listed(list) => {
                let mut list = list.clone();
                if !list.contains(&Symbol::Abort) {
                    list.push(Symbol::Abort);
                }
                Alphabet::Listed(list)
            }
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = Symbol> + '_> {
        match self {
            Alphabet::Bits { width, abort } => {
                let bits = BitString::all(*width as usize).map(Symbol::Bits);
                if *abort {
                    Box::new(bits.chain(core::iter::once(Symbol::Abort)))
                } else {
                    Box::new(bits)
                }
            }
            Alphabet::Listed(list) => Box::new(list.iter().copied()),
        }
    }

    /// Non-abort symbols in alphabet order.
    pub fn keys(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.iter().filter(|s| !s.is_abort())
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Alphabet::Bits { width: a, abort: x }, Alphabet::Bits { width: b, abort: y }) => {
                a == b && x == y
            }
            (Alphabet::Listed(a), Alphabet::Listed(b)) => a == b,
            _ => self.size() == other.size() && self.size() <= 1e7 && self.iter().eq(other.iter()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Register {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Register { name: name.into(), alphabet }
    }

    pub fn bits(name: impl Into<String>, width: usize) -> Self {
        Register::new(name, Alphabet::bits(width))
    }
}

/// Numeric tolerances carried by a state and everything derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, positivity, sub-normalization and diagonality checks.
    pub validation: f64,
    /// Arithmetic comparisons between computed quantities.
    pub arithmetic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { validation: 1e-9, arithmetic: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct CqState {
    registers: Vec<Register>,
    eve_dim: usize,
    terms: BTreeMap<Vec<Symbol>, HermitianBlock>,
    tolerances: Tolerances,
}

impl CqState {
    /// Validates and assembles a state; duplicate assignments are summed.
    pub fn build(
        registers: Vec<Register>,
        eve_dim: usize,
        terms: Vec<(Vec<Symbol>, HermitianBlock)>,
    ) -> Result<Self> {
        Self::build_with(registers, eve_dim, terms, Tolerances::default())
    }

    pub fn build_with(
        registers: Vec<Register>,
        eve_dim: usize,
        terms: Vec<(Vec<Symbol>, HermitianBlock)>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        if eve_dim == 0 || eve_dim > MAX_EVE_DIM {
            return Err(Error::EveDimOutOfRange(eve_dim));
        }
        check_registers(&registers)?;
        let mut map: BTreeMap<Vec<Symbol>, HermitianBlock> = BTreeMap::new();
        for (assignment, block) in terms {
            check_assignment(&registers, &assignment)?;
            if block.dim() != eve_dim {
                return Err(Error::DimensionMismatch { expected: eve_dim, found: block.dim() });
            }
            let deviation = block.hermiticity_deviation();
            if deviation > tolerances.validation || deviation.is_nan() {
                return Err(Error::NonHermitianBlock { deviation });
            }
            block.check_psd(tolerances.validation)?;
            match map.get_mut(&assignment) {
                Some(existing) => existing.add_scaled(&block, 1.0),
                None => {
                    map.insert(assignment, block);
                }
            }
        }
        map.retain(|_, b| !b.is_zero());
        let state = CqState { registers, eve_dim, terms: map, tolerances };
        let trace = state.total_trace();
        if trace > 1.0 + tolerances.validation {
            return Err(Error::TraceExceedsOne { trace });
        }
        Ok(state)
    }

    /// The zero operator over the given registers.
    pub fn zero(registers: Vec<Register>, eve_dim: usize) -> Result<Self> {
        Self::build(registers, eve_dim, Vec::new())
    }

    /// Assembles a state whose invariants the caller already guarantees.
    pub(crate) fn from_parts(
        registers: Vec<Register>,
        eve_dim: usize,
        mut terms: BTreeMap<Vec<Symbol>, HermitianBlock>,
        tolerances: Tolerances,
    ) -> Self {
        terms.retain(|_, b| !b.is_zero());
        CqState { registers, eve_dim, terms, tolerances }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register_names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn eve_dim(&self) -> usize {
        self.eve_dim
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Symbol], &HermitianBlock)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn block(&self, assignment: &[Symbol]) -> Option<&HermitianBlock> {
        self.terms.get(assignment)
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.register_index(name).map(|i| &self.registers[i])
    }

    pub fn has_register(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn total_trace(&self) -> f64 {
        self.terms.values().map(HermitianBlock::trace).fold(0.0, |acc, x| acc + x)
    }

    /// `ρ^{R=value}`: keeps terms with `R = value` and removes register `R`.
    pub fn condition(&self, register: &str, value: &Symbol) -> Result<CqState> {
        let idx = self.register_index(register)?;
        if !self.registers[idx].alphabet.contains(value) {
            return Err(Error::UnknownValue { register: register.to_string(), value: value.to_string() });
        }
        let mut registers = self.registers.clone();
        registers.remove(idx);
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k[idx] == *value)
            .map(|(k, b)| {
                let mut k = k.clone();
                k.remove(idx);
                (k, b.clone())
            })
            .collect();
        Ok(CqState::from_parts(registers, self.eve_dim, terms, self.tolerances))
    }

    /// Partial trace over the named classical registers.
    pub fn marginalize(&self, drop: &[&str]) -> Result<CqState> {
        let mut dropped = alloc::vec![false; self.registers.len()];
        for name in drop {
            dropped[self.register_index(name)?] = true;
        }
        let registers =
            self.registers.iter().zip(&dropped).filter(|(_, &d)| !d).map(|(r, _)| r.clone()).collect();
        self.remap(registers, |k| {
            Ok(k.iter().zip(&dropped).filter(|(_, &d)| !d).map(|(s, _)| *s).collect())
        })
    }

    /// Keeps only the named registers (in the state's order).
    pub fn restrict_to(&self, keep: &[&str]) -> Result<CqState> {
        for name in keep {
            self.register_index(name)?;
        }
        let drop: Vec<&str> = self.register_names().filter(|n| !keep.contains(n)).collect();
        self.marginalize(&drop)
    }

    /// Eve's reduced operator `ρ_E`.
    pub fn reduced_eve(&self) -> HermitianBlock {
        let mut acc = HermitianBlock::zeros(self.eve_dim);
        for b in self.terms.values() {
            acc.add_scaled(b, 1.0);
        }
        acc
    }

    /// Classical marginal over all registers: `weight(x) = tr ρ_E^x`.
    pub fn trace_out_eve(&self) -> ClassicalDistribution {
        self.terms.iter().map(|(k, b)| (k.clone(), b.trace())).collect()
    }

    /// Appends `new_register` holding `f(assignment)` on every term.
    pub fn apply_classical_function<F>(&self, new_register: Register, mut f: F) -> Result<CqState>
    where
        F: FnMut(&[Symbol]) -> Symbol,
    {
        if self.has_register(&new_register.name) {
            return Err(Error::DuplicateRegister(new_register.name));
        }
        let mut terms = BTreeMap::new();
        for (k, b) in &self.terms {
            let s = f(k);
            if !new_register.alphabet.contains(&s) {
                return Err(Error::AlphabetMismatch { register: new_register.name, symbol: s.to_string() });
            }
            let mut k = k.clone();
            k.push(s);
            terms.insert(k, b.clone());
        }
        let mut registers = self.registers.clone();
        registers.push(new_register);
        Ok(CqState::from_parts(registers, self.eve_dim, terms, self.tolerances))
    }

    /// Ideal counterpart with respect to the given key registers.
    ///
    /// Every other classical register is public. For each public value `p`,
    /// the non-abort part is replaced by `Σ_k 2^{-ℓ} [k]…[k] ⊗ ρ_E^{p}`
    /// (uniform, perfectly correlated keys), where `ρ_E^{p}` sums the non-abort
    /// blocks of that branch. Abort terms (all keys `⊥`) are already ideal and
    /// are copied unchanged.
    pub fn ideal_state(&self, key_registers: &[&str]) -> Result<CqState> {
        if key_registers.is_empty() {
            return Err(Error::OutOfRange("key register list"));
        }
        let key_idx: Vec<usize> =
            key_registers.iter().map(|n| self.register_index(n)).collect::<Result<_>>()?;
        let key_alphabet = &self.registers[key_idx[0]].alphabet;
        let key_symbols: Vec<Symbol> = key_alphabet.keys().collect();
        for &i in &key_idx[1..] {
            let other = &self.registers[i].alphabet;
            if other.key_count() != key_alphabet.key_count() || !other.keys().eq(key_symbols.iter().copied()) {
                return Err(Error::KeyAlphabetMismatch);
            }
        }
        let public_idx: Vec<usize> =
            (0..self.registers.len()).filter(|i| !key_idx.contains(i)).collect();
        let weight = 1.0 / key_symbols.len() as f64;

        let mut out: BTreeMap<Vec<Symbol>, HermitianBlock> = BTreeMap::new();
        let mut branches: BTreeMap<Vec<Symbol>, HermitianBlock> = BTreeMap::new();
        for (k, b) in &self.terms {
            let aborts = key_idx.iter().filter(|&&i| k[i].is_abort()).count();
            if aborts == key_idx.len() {
                out.insert(k.clone(), b.clone());
            } else if aborts > 0 {
                return Err(Error::MixedAbortTerm);
            } else {
                let public: Vec<Symbol> = public_idx.iter().map(|&i| k[i]).collect();
                branches
                    .entry(public)
                    .or_insert_with(|| HermitianBlock::zeros(self.eve_dim))
                    .add_scaled(b, 1.0);
            }
        }
        for (public, eve) in branches {
            let block = eve.scale(weight);
            for key in &key_symbols {
                let mut full = alloc::vec![Symbol::Abort; self.registers.len()];
                for &i in &key_idx {
                    full[i] = *key;
                }
                for (&i, s) in public_idx.iter().zip(&public) {
                    full[i] = *s;
                }
                out.insert(full, block.clone());
            }
        }
        Ok(CqState::from_parts(self.registers.clone(), self.eve_dim, out, self.tolerances))
    }

    /// Same registers and Eve dimension, and every block (absent = zero)
    /// entrywise within `tolerance`.
    pub fn approx_eq(&self, other: &CqState, tolerance: f64) -> bool {
        if self.registers != other.registers || self.eve_dim != other.eve_dim {
            return false;
        }
        let zero = HermitianBlock::zeros(self.eve_dim);
        let within = |a: &HermitianBlock, b: &HermitianBlock| a.max_abs_diff(b) <= tolerance;
        self.terms.iter().all(|(k, b)| within(b, other.terms.get(k).unwrap_or(&zero)))
            && other.terms.iter().all(|(k, b)| within(b, self.terms.get(k).unwrap_or(&zero)))
    }

    /// Rewrites every assignment with `f`, summing blocks that collide.
    pub(crate) fn remap<F>(&self, registers: Vec<Register>, mut f: F) -> Result<CqState>
    where
        F: FnMut(&[Symbol]) -> Result<Vec<Symbol>>,
    {
        let mut terms: BTreeMap<Vec<Symbol>, HermitianBlock> = BTreeMap::new();
        for (k, b) in &self.terms {
            let nk = f(k)?;
            match terms.get_mut(&nk) {
                Some(existing) => existing.add_scaled(b, 1.0),
                None => {
                    terms.insert(nk, b.clone());
                }
            }
        }
        Ok(CqState::from_parts(registers, self.eve_dim, terms, self.tolerances))
    }
}

fn check_registers(registers: &[Register]) -> Result<()> {
    for (i, r) in registers.iter().enumerate() {
        if r.name.is_empty() {
            return Err(Error::InvalidRegister("empty register name".into()));
        }
        if registers[..i].iter().any(|o| o.name == r.name) {
            return Err(Error::DuplicateRegister(r.name.clone()));
        }
        if let Alphabet::Listed(list) = &r.alphabet {
            Alphabet::listed(list.clone())?;
        }
    }
    Ok(())
}

fn check_assignment(registers: &[Register], assignment: &[Symbol]) -> Result<()> {
    if assignment.len() != registers.len() {
        return Err(Error::AlphabetMismatch {
            register: String::from("<arity>"),
            symbol: alloc::format!("{} values for {} registers", assignment.len(), registers.len()),
        });
    }
    for (r, s) in registers.iter().zip(assignment) {
        if !r.alphabet.contains(s) {
            return Err(Error::AlphabetMismatch { register: r.name.clone(), symbol: s.to_string() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bits(s: &str) -> Symbol {
        s.parse().unwrap()
    }

    /// `⅛ Σ_{x,y,z} [xy]_A [zx]_B [z]_E`, assembled by hand.
    fn loophole_state() -> CqState {
        let mut terms = Vec::new();
        for x in 0..2u64 {
            for y in 0..2u64 {
                for z in 0..2u64 {
                    let a = Symbol::bits(x << 1 | y, 2).unwrap();
                    let b = Symbol::bits(z << 1 | x, 2).unwrap();
                    terms.push((vec![a, b], HermitianBlock::projector(2, z as usize).scale(0.125)));
                }
            }
        }
        CqState::build(vec![Register::bits("A", 2), Register::bits("B", 2)], 2, terms).unwrap()
    }

    #[test]
    fn build_counterexample_state() {
        let s = loophole_state();
        assert_eq!(s.num_terms(), 8);
        assert_eq!(s.total_trace(), 1.0);
    }

    #[test]
    fn build_empty_and_single() {
        let z = CqState::build(vec![Register::bits("A", 1)], 2, vec![]).unwrap();
        assert_eq!(z.total_trace(), 0.0);
        let one = CqState::build(
            vec![Register::bits("A", 1)],
            2,
            vec![(vec![bits("0")], HermitianBlock::identity(2).scale(0.5))],
        )
        .unwrap();
        assert_eq!(one.total_trace(), 1.0);
    }

    #[test]
    fn build_errors() {
        let regs = vec![Register::bits("A", 1)];
        let e = CqState::build(regs.clone(), 1, vec![(vec![bits("01")], HermitianBlock::identity(1))]);
        assert!(matches!(e, Err(Error::AlphabetMismatch { .. })));
        let e = CqState::build(regs.clone(), 1, vec![(vec![Symbol::Abort], HermitianBlock::identity(1))]);
        assert!(matches!(e, Err(Error::AlphabetMismatch { .. })));
        let e = CqState::build(regs.clone(), 1, vec![(vec![bits("0")], HermitianBlock::diagonal(vec![-0.5]))]);
        assert!(matches!(e, Err(Error::NegativeBlock { .. })));
        let e = CqState::build(
            regs.clone(),
            1,
            vec![
                (vec![bits("0")], HermitianBlock::identity(1).scale(0.75)),
                (vec![bits("1")], HermitianBlock::identity(1).scale(0.75)),
            ],
        );
        assert!(matches!(e, Err(Error::TraceExceedsOne { .. })));
        let e = CqState::build(vec![Register::bits("A", 1), Register::bits("A", 1)], 1, vec![]);
        assert!(matches!(e, Err(Error::DuplicateRegister(_))));
        assert!(matches!(CqState::build(regs, 65, vec![]), Err(Error::EveDimOutOfRange(65))));
    }

    #[test]
    fn duplicates_are_summed() {
        let s = CqState::build(
            vec![Register::bits("A", 1)],
            1,
            vec![
                (vec![bits("1")], HermitianBlock::identity(1).scale(0.25)),
                (vec![bits("1")], HermitianBlock::identity(1).scale(0.25)),
            ],
        )
        .unwrap();
        assert_eq!(s.num_terms(), 1);
        assert_eq!(s.block(&[bits("1")]).unwrap().trace(), 0.5);
    }

    #[test]
    fn condition_on_alice_value() {
        let s = loophole_state();
        let c = s.condition("A", &bits("00")).unwrap();
        assert_eq!(c.total_trace(), 0.25);
        assert_eq!(c.register_names().collect::<Vec<_>>(), vec!["B"]);
        assert!(matches!(s.condition("X", &bits("0")), Err(Error::UnknownRegister(_))));
        assert!(matches!(s.condition("A", &bits("0")), Err(Error::UnknownValue { .. })));
    }

    #[test]
    fn condition_on_empty_value_gives_zero_state() {
        let s = CqState::build(
            vec![Register::bits("A", 1)],
            1,
            vec![(vec![bits("0")], HermitianBlock::identity(1))],
        )
        .unwrap();
        let c = s.condition("A", &bits("1")).unwrap();
        assert_eq!(c.num_terms(), 0);
        assert_eq!(c.total_trace(), 0.0);
    }

    #[test]
    fn marginalize_bob_out() {
        let ae = loophole_state().marginalize(&["B"]).unwrap();
        assert_eq!(ae.num_terms(), 4);
        for (_, b) in ae.terms() {
            assert_eq!(b, &HermitianBlock::identity(2).scale(0.125));
        }
        let same = loophole_state().marginalize(&[]).unwrap();
        assert!(same.approx_eq(&loophole_state(), 0.0));
        let eve = loophole_state().marginalize(&["A", "B"]).unwrap();
        assert_eq!(eve.num_terms(), 1);
        assert_eq!(eve.block(&[]).unwrap(), &HermitianBlock::identity(2).scale(0.5));
    }

    #[test]
    fn trace_out_eve_is_uniform() {
        let d = loophole_state().trace_out_eve();
        assert_eq!(d.len(), 8);
        assert!(d.values().all(|&w| w == 0.125));
        assert!(CqState::zero(vec![], 1).unwrap().trace_out_eve().is_empty());
    }

    #[test]
    fn constant_function_is_deterministic_register() {
        let s = loophole_state();
        let t = s.apply_classical_function(Register::bits("C", 1), |_| Symbol::bit(false)).unwrap();
        assert_eq!(t.total_trace(), s.total_trace());
        assert!(t.marginalize(&["C"]).unwrap().approx_eq(&s, 0.0));
        let err = s.apply_classical_function(Register::bits("C", 1), |_| bits("11"));
        assert!(matches!(err, Err(Error::AlphabetMismatch { .. })));
        let err = s.apply_classical_function(Register::bits("A", 1), |_| Symbol::bit(false));
        assert!(matches!(err, Err(Error::DuplicateRegister(_))));
    }

    #[test]
    fn ideal_state_rejects_mixed_abort() {
        let regs = vec![Register::new("K", Alphabet::bits_with_abort(1)), Register::new("L", Alphabet::bits_with_abort(1))];
        let s = CqState::build(regs, 1, vec![(vec![Symbol::Abort, bits("0")], HermitianBlock::identity(1))]).unwrap();
        assert!(matches!(s.ideal_state(&["K", "L"]), Err(Error::MixedAbortTerm)));
    }

    #[test]
    fn ideal_of_uniform_independent_key_is_itself() {
        let ke = loophole_state()
            .apply_classical_function(Register::bits("K", 1), |k| Symbol::bit(k[0].as_bits().unwrap().bit(0)))
            .unwrap()
            .restrict_to(&["K"])
            .unwrap();
        let ideal = ke.ideal_state(&["K"]).unwrap();
        assert!(ideal.approx_eq(&ke, 1e-15));
    }

    #[test]
    fn alphabet_equality_is_semantic() {
        let listed = Alphabet::listed(vec![bits("0"), bits("1"), Symbol::Abort]).unwrap();
        assert_eq!(listed, Alphabet::bits_with_abort(1));
        assert_ne!(listed, Alphabet::bits(1));
        assert!(Alphabet::listed(vec![]).is_err());
        assert!(Alphabet::listed(vec![bits("0"), bits("0")]).is_err());
    }
}
