//! Uniform quantizer over a hyperrectangular region `H(C, L)`.
//!
//! The region spans `[C - L, C + L]` on every axis and is cut into `N`
//! equal cells per axis, so each cell has half-width `L / N` and the
//! worst-case quantization error is `L / N`. Only per-axis indices are ever
//! formed; the `N^n` cells are not enumerated.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::sets::{Hyperrectangle, CONTAINMENT_TOL};

/// Levels per axis and the state dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizerConfig {
    levels: u32,
    state_dim: usize,
}

impl QuantizerConfig {
    pub fn from_levels(state_dim: usize, levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidArgument("quantizer needs at least 2 levels"));
        }
        if levels > u32::from(u16::MAX) + 1 {
            return Err(Error::InvalidArgument(
                "at most 65536 levels fit the wire format",
            ));
        }
        if state_dim == 0 {
            return Err(Error::InvalidArgument("state dimension must be positive"));
        }
        Ok(Self { levels, state_dim })
    }

    /// `N = 2^{B_r / n}`; `B_r` must be a positive multiple of `n`.
    pub fn from_bits(state_dim: usize, bits: u32) -> Result<Self> {
        if state_dim == 0 || bits == 0 || !(bits as usize).is_multiple_of(state_dim) {
            return Err(Error::Config(format!(
                "bit budget {bits} is not a positive multiple of the state dimension {state_dim}"
            )));
        }
        let per_axis = bits / state_dim as u32;
        if per_axis > 16 {
            return Err(Error::InvalidArgument("at most 16 bits per axis"));
        }
        Self::from_levels(state_dim, 1 << per_axis)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Bits needed for one packet: `⌈log₂(N^n)⌉`, which is `n log₂ N` when
    /// `N` is a power of two.
    pub fn packet_bits(&self) -> u32 {
        let total = (self.levels as f64).log2() * self.state_dim as f64;
        let bits = total.ceil() as u32;
        // guard against log2 rounding just above an integer
        if bits > 0
            && (self.levels as u128)
                .checked_pow(self.state_dim as u32)
                .is_some_and(|c| c <= 1u128 << (bits - 1))
        {
            bits - 1
        } else {
            bits
        }
    }
}

/// Quantization region center `C^k`, per-axis range `L^k` and step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerState {
    pub center: Vector,
    pub range: Vector,
    pub k: u64,
}

impl QuantizerState {
    pub fn new(center: Vector, range: Vector, k: u64) -> Result<Self> {
        if center.dim() != range.dim() {
            return Err(Error::Dimension {
                context: "quantizer range",
                expected: center.dim(),
                found: range.dim(),
            });
        }
        if range.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument("quantizer range must be positive"));
        }
        Ok(Self { center, range, k })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// `S_Q = H(C, L)`.
    pub fn region(&self) -> Hyperrectangle {
        Hyperrectangle::new(self.center.clone(), self.range.clone()).expect("validated range")
    }

    /// Worst-case quantization error `L / N` per axis.
    pub fn max_error(&self, levels: u32) -> Vector {
        self.range.scale(1.0 / levels as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPacket {
    pub indices: Vec<u32>,
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPacket {
    pub value: Vector,
    pub k: u64,
}

/// How indices map back to points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecoderGeometry {
    /// Cell centroid `C - L + (L/N)(2P + 1)`, consistent with the encoder.
    #[default]
    Centroid,
    /// `C - L/2 + (L/2N)(2P + 1)`: cells laid over `[C - L/2, C + L/2]`,
    /// half the encoder's span. Kept so runs with it can be compared; it
    /// does not respect the `L/N` error bound.
    HalfSpan,
}

/// Per-axis index `⌊(x̂ᵢ + Lᵢ - Cᵢ) N / (2Lᵢ)⌋`. The closed upper edge maps
/// to `N - 1`; a value outside the region by more than the containment
/// slack is an overflow fault.
pub fn encode(xhat: &[f64], qs: &QuantizerState, levels: u32) -> Result<EncodedPacket> {
    if xhat.len() != qs.dim() {
        return Err(Error::Dimension {
            context: "encoder input",
            expected: qs.dim(),
            found: xhat.len(),
        });
    }
    let n_f = levels as f64;
    let mut indices = Vec::with_capacity(xhat.len());
    for (axis, &x) in xhat.iter().enumerate() {
        let (c, l) = (qs.center[axis], qs.range[axis]);
        if !x.is_finite() || (x - c).abs() > l + CONTAINMENT_TOL {
            return Err(Error::Overflow {
                k: qs.k,
                axis,
                value: x,
                lower: c - l,
                upper: c + l,
            });
        }
        let raw = ((x + l - c) * n_f / (2.0 * l)).floor();
        indices.push(raw.clamp(0.0, n_f - 1.0) as u32);
    }
    Ok(EncodedPacket { indices, k: qs.k })
}

pub fn decode(pkt: &EncodedPacket, qs: &QuantizerState, levels: u32) -> Result<DecodedPacket> {
    decode_with(pkt, qs, levels, DecoderGeometry::Centroid)
}

pub fn decode_with(
    pkt: &EncodedPacket,
    qs: &QuantizerState,
    levels: u32,
    geometry: DecoderGeometry,
) -> Result<DecodedPacket> {
    if pkt.indices.len() != qs.dim() {
        return Err(Error::Dimension {
            context: "decoder input",
            expected: qs.dim(),
            found: pkt.indices.len(),
        });
    }
    let n_f = levels as f64;
    let mut value = Vector::zeros(qs.dim());
    for (axis, &idx) in pkt.indices.iter().enumerate() {
        if idx >= levels {
            return Err(Error::IndexOutOfRange {
                axis,
                index: idx,
                levels,
            });
        }
        let (c, l) = (qs.center[axis], qs.range[axis]);
        let odd = 2.0 * idx as f64 + 1.0;
        value[axis] = match geometry {
            DecoderGeometry::Centroid => c - l + l / n_f * odd,
            DecoderGeometry::HalfSpan => c - l / 2.0 + l / (2.0 * n_f) * odd,
        };
    }
    Ok(DecodedPacket { value, k: pkt.k })
}

/// `ē^{k+1} = (Λ̄/N) ē^k + (β_ue^k / N) 1`.
pub fn max_qerror_step(
    eq_bar: &Vector,
    lambda_bar: &Matrix,
    beta_ue_k: f64,
    levels: u32,
) -> Result<Vector> {
    let n_f = levels as f64;
    let mapped = lambda_bar.try_mul_vec(eq_bar)?;
    Ok(Vector::new(
        mapped.iter().map(|v| (v + beta_ue_k) / n_f).collect(),
    ))
}

/// Entrywise `|Mᵢⱼ|`.
pub fn abs_matrix(m: &Matrix) -> Matrix {
    m.abs()
}

impl EncodedPacket {
    /// Wire record: `k` as little-endian `u32`, then each index as
    /// little-endian `u16`.
    pub fn write_wire<W: Write>(&self, mut w: W) -> Result<()> {
        let k =
            u32::try_from(self.k).map_err(|_| Error::InvalidArgument("step index exceeds u32"))?;
        w.write_all(&k.to_le_bytes())?;
        for &i in &self.indices {
            let i = u16::try_from(i).map_err(|_| Error::InvalidArgument("index exceeds u16"))?;
            w.write_all(&i.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_wire<R: Read>(mut r: R, state_dim: usize) -> Result<Self> {
        let mut k = [0u8; 4];
        r.read_exact(&mut k)?;
        let mut indices = Vec::with_capacity(state_dim);
        for _ in 0..state_dim {
            let mut b = [0u8; 2];
            r.read_exact(&mut b)?;
            indices.push(u32::from(u16::from_le_bytes(b)));
        }
        Ok(Self {
            indices,
            k: u64::from(u32::from_le_bytes(k)),
        })
    }

    /// Dense channel payload: the mixed-radix number `Σ Pᵢ N^i` in
    /// [`QuantizerConfig::packet_bits`] bits, little-endian bytes.
    pub fn pack_bits(&self, cfg: &QuantizerConfig) -> Result<Vec<u8>> {
        let value = self.to_radix(cfg)?;
        let bits = cfg.packet_bits() as usize;
        Ok(value.to_le_bytes()[..bits.div_ceil(8)].to_vec())
    }

    pub fn unpack_bits(bytes: &[u8], cfg: &QuantizerConfig, k: u64) -> Result<Self> {
        if bytes.len() > 16 {
            return Err(Error::InvalidArgument("payload longer than 128 bits"));
        }
        let mut buf = [0u8; 16];
        buf[..bytes.len()].copy_from_slice(bytes);
        let mut value = u128::from_le_bytes(buf);
        let base = u128::from(cfg.levels);
        let mut indices = Vec::with_capacity(cfg.state_dim);
        for _ in 0..cfg.state_dim {
            indices.push((value % base) as u32);
            value /= base;
        }
        if value != 0 {
            return Err(Error::InvalidArgument("payload has bits beyond the packet"));
        }
        Ok(Self { indices, k })
    }

    fn to_radix(&self, cfg: &QuantizerConfig) -> Result<u128> {
        let base = u128::from(cfg.levels);
        let mut value: u128 = 0;
        for (axis, &i) in self.indices.iter().enumerate().rev() {
            if i >= cfg.levels {
                return Err(Error::IndexOutOfRange {
                    axis,
                    index: i,
                    levels: cfg.levels,
                });
            }
            value = value
                .checked_mul(base)
                .and_then(|v| v.checked_add(u128::from(i)))
                .ok_or(Error::InvalidArgument("packet does not fit 128 bits"))?;
        }
        Ok(value)
    }
}
