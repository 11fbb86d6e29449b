//! `--surgery bottom|top|mask:<hex>`.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurgeryArg {
    Bottom,
    Top,
    Mask(String),
}

impl FromStr for SurgeryArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bottom" => Ok(SurgeryArg::Bottom),
            "top" => Ok(SurgeryArg::Top),
            _ => match s.strip_prefix("mask:") {
                Some(hex) if !hex.is_empty() && hex.chars().all(|c| c.is_ascii_hexdigit()) => {
                    Ok(SurgeryArg::Mask(hex.to_string()))
                }
                Some(hex) => Err(format!("mask {hex:?} is not a hex string")),
                None => Err(format!("expected bottom, top or mask:<hex>, got {s:?}")),
            },
        }
    }
}

/// Decodes a hex mask for `pairs` dual pairs. The string is read as one
/// number; bit `i` (least significant first) selects the second edge of
/// pair `i`. The digit count must be exactly `ceil(pairs / 4)`.
pub fn decode(hex: &str, pairs: usize) -> Result<Vec<bool>, String> {
    let want = pairs.div_ceil(4).max(1);
    if hex.len() != want {
        return Err(format!("mask has {} hex digits, {pairs} dual pairs need {want}", hex.len()));
    }
    let mut bits = Vec::with_capacity(4 * want);
    for c in hex.chars().rev() {
        let d = c.to_digit(16).ok_or_else(|| format!("{c:?} is not a hex digit"))?;
        bits.extend((0..4).map(|b| d >> b & 1 == 1));
    }
    if let Some(stray) = bits.iter().skip(pairs).position(|&b| b) {
        return Err(format!("mask sets bit {} but there are only {pairs} dual pairs", pairs + stray));
    }
    bits.truncate(pairs);
    Ok(bits)
}
