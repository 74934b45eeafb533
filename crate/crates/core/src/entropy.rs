//! Adaptive byte-oriented range coder.
//!
//! Classic carry-cache range coder (32-bit range, 64-bit low) driven by
//! per-context adaptive frequency tables over the 256-byte alphabet. Contexts
//! are selected by the caller per symbol; `ContextMode::Order0` collapses them
//! all onto one table, `ContextMode::Keyed` keeps 256 independent tables.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("entropy stream exhausted before all symbols were decoded")]
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextMode {
    Order0,
    Keyed,
}

const TOP: u32 = 1 << 24;
/// Frequency increment per observed symbol. Kept at 1 (Laplace-style
/// counting) so coded length tracks the global symbol histogram instead of
/// chasing local regimes; the octree coder asserts closeness to the
/// whole-stream order-0 entropy and recency weighting would break that.
const INC: u32 = 1;
/// Total frequency ceiling; tables are halved when it is reached. Must stay
/// well below TOP so `range / total` keeps enough precision per step.
const MAX_TOTAL: u32 = 1 << 19;

/// One adaptive order-0 frequency table over bytes.
#[derive(Clone)]
struct Model {
    freq: Vec<u32>,
    total: u32,
}

impl Model {
    fn new() -> Self {
        Model {
            freq: vec![1; 256],
            total: 256,
        }
    }

    fn cum(&self, sym: u8) -> u32 {
        self.freq[..sym as usize].iter().sum()
    }

    /// Symbol whose cumulative interval contains `target`, with its interval.
    fn locate(&self, target: u32) -> (u8, u32, u32) {
        let mut cum = 0u32;
        for (s, &f) in self.freq.iter().enumerate() {
            if target < cum + f {
                return (s as u8, cum, f);
            }
            cum += f;
        }
        // target < total by construction; the loop always returns.
        unreachable!("target out of cumulative range")
    }

    fn update(&mut self, sym: u8) {
        self.freq[sym as usize] += INC;
        self.total += INC;
        if self.total >= MAX_TOTAL {
            self.total = 0;
            for f in self.freq.iter_mut() {
                *f = (*f >> 1).max(1);
                self.total += *f;
            }
        }
    }
}

struct ModelBank {
    mode: ContextMode,
    models: Vec<Model>,
}

impl ModelBank {
    fn new(mode: ContextMode) -> Self {
        let n = match mode {
            ContextMode::Order0 => 1,
            ContextMode::Keyed => 256,
        };
        ModelBank {
            mode,
            models: vec![Model::new(); n],
        }
    }

    fn model(&mut self, ctx: u8) -> &mut Model {
        match self.mode {
            ContextMode::Order0 => &mut self.models[0],
            ContextMode::Keyed => &mut self.models[ctx as usize],
        }
    }
}

struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
        }
    }

    fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && total < MAX_TOTAL + INC);
        let r = self.range / total;
        self.low += r as u64 * cum as u64;
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            self.out.push(self.cache.wrapping_add(carry));
            for _ in 1..self.cache_size {
                self.out.push(0xFFu8.wrapping_add(carry));
            }
            self.cache = (self.low >> 24) as u8;
            self.cache_size = 0;
        }
        self.cache_size += 1;
        self.low = (self.low << 8) & 0xFFFF_FFFF;
    }

    fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    range: u32,
    code: u32,
    overrun: bool,
}

impl<'a> RangeDecoder<'a> {
    fn new(data: &'a [u8]) -> Self {
        let mut d = RangeDecoder {
            data,
            pos: 0,
            range: u32::MAX,
            code: 0,
            overrun: false,
        };
        // The encoder's first cache flush emits a leading zero byte.
        d.next_byte();
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte() as u32;
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        match self.data.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                b
            }
            None => {
                self.overrun = true;
                0
            }
        }
    }

    fn decode_target(&mut self, total: u32) -> u32 {
        let r = self.range / total;
        (self.code / r).min(total - 1)
    }

    fn decode_update(&mut self, cum: u32, freq: u32, total: u32) {
        let r = self.range / total;
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < TOP {
            self.code = (self.code << 8) | self.next_byte() as u32;
            self.range <<= 8;
        }
    }
}

/// Streaming byte encoder: adaptive model bank in front of the range coder.
pub struct ByteEncoder {
    rc: RangeEncoder,
    bank: ModelBank,
}

impl ByteEncoder {
    pub fn new(mode: ContextMode) -> Self {
        ByteEncoder {
            rc: RangeEncoder::new(),
            bank: ModelBank::new(mode),
        }
    }

    pub fn encode(&mut self, ctx: u8, sym: u8) {
        let m = self.bank.model(ctx);
        let cum = m.cum(sym);
        let freq = m.freq[sym as usize];
        let total = m.total;
        self.rc.encode(cum, freq, total);
        m.update(sym);
    }

    pub fn finish(self) -> Vec<u8> {
        self.rc.finish()
    }
}

/// Streaming byte decoder; the exact inverse of [`ByteEncoder`] when fed the
/// same context sequence.
pub struct ByteDecoder<'a> {
    rc: RangeDecoder<'a>,
    bank: ModelBank,
}

impl<'a> ByteDecoder<'a> {
    pub fn new(data: &'a [u8], mode: ContextMode) -> Self {
        ByteDecoder {
            rc: RangeDecoder::new(data),
            bank: ModelBank::new(mode),
        }
    }

    pub fn decode(&mut self, ctx: u8) -> Result<u8, EntropyError> {
        let m = self.bank.model(ctx);
        let target = self.rc.decode_target(m.total);
        let (sym, cum, freq) = m.locate(target);
        let total = m.total;
        self.rc.decode_update(cum, freq, total);
        m.update(sym);
        if self.rc.overrun {
            return Err(EntropyError::Exhausted);
        }
        Ok(sym)
    }
}

/// Convenience: code a whole buffer with a caller-supplied context rule.
pub fn encode_bytes(mode: ContextMode, ctx_of: impl Fn(usize, &[u8]) -> u8, data: &[u8]) -> Vec<u8> {
    let mut enc = ByteEncoder::new(mode);
    for (i, &b) in data.iter().enumerate() {
        enc.encode(ctx_of(i, data), b);
    }
    enc.finish()
}

/// Shannon bound in bits for an i.i.d. source with the given probabilities.
pub fn shannon_bound_bits(probs: &[f64], n_symbols: usize) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h * n_symbols as f64
}
