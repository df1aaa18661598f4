use crate::error::{Error, Result};
use crate::polynomial::PolyObjective;
use crate::rng::SeededRng;

use super::noise::Sampler;
use super::partition::{monomials, MonomialPartition};

/// Add one independent draw to every degree-1 and ordered degree-2
/// coefficient: `noise_s` on Φ_s, `noise_n` on Φ_n. `c0` is left alone.
///
/// Draws happen in [`monomials`] order so a seed pins the output exactly.
pub fn perturb(
    poly: &PolyObjective,
    noise_s: Sampler,
    noise_n: Sampler,
    partition: &MonomialPartition,
    rng: &mut SeededRng,
) -> Result<PolyObjective> {
    if partition.d != poly.d {
        return Err(Error::DimensionMismatch {
            expected: poly.d,
            got: partition.d,
        });
    }
    let mut out = poly.clone();
    for (m, coef) in monomials(poly.d).zip(out.perturbable_mut()) {
        let sampler = if partition.is_sensitive(m) { noise_s } else { noise_n };
        *coef += sampler.draw(rng);
    }
    Ok(out)
}
