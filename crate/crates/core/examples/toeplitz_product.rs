//! One Toeplitz product three ways: entry by entry, as a sum of sub-matrix
//! products, and through the precomputed column table.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toeplitz_qrng::toeplitz::{submatrix_product, submatrix_window, toeplitz_entry};
use toeplitz_qrng::{matvec_blocked, matvec_full, Bits, ColumnTable, ExtractorDims, Seed};

fn main() -> toeplitz_qrng::Result<()> {
    // A 2x4 matrix from the seed s1..s5 = 1,0,1,1,0.
    let dims = ExtractorDims::new(2, 4, 2)?;
    let seed = Seed::new("10110".parse()?);
    for r in 1..=2 {
        let row: String = (1..=4)
            .map(|c| if toeplitz_entry(&seed, &dims, r, c).unwrap() { '1' } else { '0' })
            .collect();
        println!("row {r}: {row}");
    }
    let raw: Bits = "1101".parse()?;
    println!("T * {raw} = {}", matvec_full(&seed, &dims, &raw)?);
    for i in 1..=dims.steps() {
        let w = submatrix_window(&seed, &dims, i)?;
        let part = submatrix_product(&w, &raw.slice((i - 1) * 2, 2), &dims)?;
        println!("  step {i}: window {w}, partial {part}");
    }

    // The same agreement at full size.
    let dims = ExtractorDims::new(519, 768, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seed = Seed::random(&dims, &mut rng);
    let raw = Bits::from_fn(768, |i| (i * 7919) % 3 == 0);
    let full = matvec_full(&seed, &dims, &raw)?;
    assert_eq!(full, matvec_blocked(&seed, &dims, &raw)?);
    assert_eq!(full, ColumnTable::new(&seed, &dims)?.multiply(&raw)?);
    println!("{dims}: {} ones in the output, all three paths agree", full.count_ones());
    Ok(())
}
