//! Minimal RIFF/WAVE reader and writer for 16-bit PCM.

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedWav {
    /// Mono samples in `[-1, 1]`; multi-channel input is averaged.
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    pub channels: u16,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Decodes a 16-bit PCM WAV file. Integer samples map to `s / 32768`.
pub fn parse_wav(bytes: &[u8]) -> Result<DecodedWav> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader("missing RIFF/WAVE signature".into()));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + size > bytes.len() {
                    return Err(Error::MalformedHeader(format!("fmt chunk of {size} bytes")));
                }
                let mut tag = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if tag == FORMAT_EXTENSIBLE {
                    if size < 40 {
                        return Err(Error::MalformedHeader("short extensible fmt chunk".into()));
                    }
                    tag = u16_at(bytes, body + 24);
                }
                if tag != FORMAT_PCM {
                    return Err(Error::UnsupportedEncoding(format!("format tag {tag:#06x}")));
                }
                if bits != 16 {
                    return Err(Error::UnsupportedEncoding(format!("{bits}-bit samples")));
                }
                if channels == 0 || rate == 0 {
                    return Err(Error::MalformedHeader(format!(
                        "{channels} channels at {rate} Hz"
                    )));
                }
                format = Some((tag, rate, channels));
            }
            b"data" => {
                let (_, sample_rate, channels) = format
                    .ok_or_else(|| Error::MalformedHeader("data chunk before fmt chunk".into()))?;
                let available = bytes.len() - body;
                if size > available {
                    return Err(Error::TruncatedData(format!(
                        "header declares {size} bytes, {available} present"
                    )));
                }
                let frame = 2 * channels as usize;
                if !size.is_multiple_of(frame) {
                    return Err(Error::TruncatedData(format!(
                        "{size} bytes is not a whole number of {frame}-byte frames"
                    )));
                }
                let samples: Vec<f32> = bytes[body..body + size]
                    .chunks_exact(frame)
                    .map(|f| {
                        let sum: f32 = f
                            .chunks_exact(2)
                            .map(|s| i16::from_le_bytes([s[0], s[1]]) as f32 / 32768.0)
                            .sum();
                        sum / channels as f32
                    })
                    .collect();
                if samples.is_empty() {
                    return Err(Error::TruncatedData("no samples".into()));
                }
                return Ok(DecodedWav {
                    samples,
                    sample_rate,
                    channels,
                });
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = body + size + (size & 1);
    }
    match format {
        None => Err(Error::MalformedHeader("no fmt chunk".into())),
        Some(_) => Err(Error::TruncatedData("no data chunk".into())),
    }
}

/// Quantizes to 16-bit: `round(x·32768)` clamped to the i16 range.
pub fn quantize(x: f32) -> i16 {
    (x as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes mono samples as a canonical 44-byte-header 16-bit PCM WAV.
pub fn write_wav(samples: &[f32], sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}
