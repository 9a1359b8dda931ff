//! JSON state files.
//!
//! ```json
//! {
//!   "registers": [{"name": "A", "alphabet": ["00", "01", "10", "11"]}],
//!   "eve_dim": 2,
//!   "terms": [{"assignment": ["01"], "block": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}]
//! }
//! ```
//!
//! Symbols are bit-strings written most-significant bit first, or `"⊥"`.
//! Blocks are always written densely as `[re, im]` pairs; on load they are
//! validated (Hermitian, PSD, trace ≤ 1) and diagonal blocks are stored in
//! the compact form. Saving a loaded state reproduces every value exactly.
//!
//! Alphabets wider than [`LISTED_WIDTH_LIMIT`] bits are written as
//! `{"bits": w, "abort": false}` instead of an explicit list.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use veriloop_core::{Alphabet, BitString, CqState, HermitianBlock, Register, Symbol};

use crate::error::{Error, Result};

pub const LISTED_WIDTH_LIMIT: usize = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub registers: Vec<RegisterEntry>,
    pub eve_dim: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterEntry {
    pub name: String,
    pub alphabet: AlphabetEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetEntry {
    Listed(Vec<String>),
    Bits { bits: usize, #[serde(default)] abort: bool },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub assignment: Vec<String>,
    pub block: Vec<Vec<[f64; 2]>>,
}

fn parse_symbol(text: &str) -> Result<Symbol> {
    text.parse().map_err(|_| Error::StateFile(format!("bad symbol {text:?}")))
}

fn alphabet_from_entry(entry: &AlphabetEntry) -> Result<Alphabet> {
    match entry {
        AlphabetEntry::Bits { bits, abort } => {
            if *bits > 64 {
                return Err(Error::StateFile(format!("alphabet width {bits} exceeds 64")));
            }
            Ok(if *abort { Alphabet::bits_with_abort(*bits) } else { Alphabet::bits(*bits) })
        }
        AlphabetEntry::Listed(list) => {
            let symbols = list.iter().map(|s| parse_symbol(s)).collect::<Result<Vec<_>>>()?;
            let alphabet = Alphabet::listed(symbols)?;
            // an exhaustive bit list in numeric order is the same as the compact form
            if let Some(width) = alphabet.bit_width() {
                let compact = if alphabet.has_abort() {
                    Alphabet::bits_with_abort(width)
                } else {
                    Alphabet::bits(width)
                };
                if width <= 64 && compact == alphabet {
                    return Ok(compact);
                }
            }
            Ok(alphabet)
        }
    }
}

fn alphabet_to_entry(alphabet: &Alphabet) -> AlphabetEntry {
    match alphabet {
        Alphabet::Bits { width, abort } if *width as usize > LISTED_WIDTH_LIMIT => {
            AlphabetEntry::Bits { bits: *width as usize, abort: *abort }
        }
        _ => AlphabetEntry::Listed(alphabet.iter().map(|s| s.to_string()).collect()),
    }
}

impl StateFile {
    pub fn from_state(state: &CqState) -> Self {
        let d = state.eve_dim();
        let registers = state
            .registers()
            .iter()
            .map(|r| RegisterEntry { name: r.name.clone(), alphabet: alphabet_to_entry(&r.alphabet) })
            .collect();
        let terms = state
            .terms()
            .map(|(k, b)| TermEntry {
                assignment: k.iter().map(Symbol::to_string).collect(),
                block: (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let z = b.entry(i, j);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        StateFile { registers, eve_dim: d, terms }
    }

    pub fn to_state(&self) -> Result<CqState> {
        let registers = self
            .registers
            .iter()
            .map(|r| Ok(Register::new(r.name.clone(), alphabet_from_entry(&r.alphabet)?)))
            .collect::<Result<Vec<_>>>()?;
        let d = self.eve_dim;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (t, term) in self.terms.iter().enumerate() {
            let assignment = term.assignment.iter().map(|s| parse_symbol(s)).collect::<Result<Vec<_>>>()?;
            if term.block.len() != d || term.block.iter().any(|row| row.len() != d) {
                return Err(Error::StateFile(format!("term {t}: block is not {d}×{d}")));
            }
            let data: Vec<Complex64> =
                term.block.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
            let block = HermitianBlock::from_dense(d, data, veriloop_core::Tolerances::default().validation)?;
            terms.push((assignment, block.compact()));
        }
        Ok(CqState::build(registers, d, terms)?)
    }
}

pub fn from_json(text: &str) -> Result<CqState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::StateFile(e.to_string()))?;
    file.to_state()
}

pub fn to_json(state: &CqState) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(state)).expect("state files always serialize")
}

pub fn load(path: &Path) -> Result<CqState> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    from_json(&text)
}

pub fn save(state: &CqState, path: &Path) -> Result<()> {
    fs::write(path, to_json(state) + "\n").map_err(|source| Error::Io { path: path.to_owned(), source })
}

/// Hex seed parsing shared by the CLI: `len` bits, most-significant first.
pub fn parse_seed(hex: &str, len: usize) -> Result<BitString> {
    Ok(BitString::from_hex(hex, len)?)
}
