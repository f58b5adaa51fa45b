use std::io::Write;

use crate::bits::Bits;
use crate::error::Result;

/// Bitstream layouts accepted by the external test battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StsFormat {
    /// Packed bytes, first bit in the most-significant position.
    Binary,
    /// One `0`/`1` character per bit.
    Ascii,
}

/// Writes `bits` for the external battery. Binary output pads the final
/// byte with zero bits; pass the bit count to the tool, not the file size.
pub fn export_sts(bits: &Bits, format: StsFormat, out: &mut impl Write) -> Result<()> {
    match format {
        StsFormat::Binary => {
            let bytes: Vec<u8> = bits.to_bytes().into_iter().map(u8::reverse_bits).collect();
            out.write_all(&bytes)?;
        }
        StsFormat::Ascii => {
            out.write_all(bits.to_string().as_bytes())?;
        }
    }
    Ok(())
}
